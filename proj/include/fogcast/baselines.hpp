#pragma once

// Comparison schemes for single-junction broadcast.

#include <cstdint>
#include <vector>

#include "fogcast/index_coding.hpp"

namespace fogcast {

// One source packet per distinct demanded node, shuffled by `seed`.
std::vector<NodePacket> baseline_rand(const DemandGraph& d, std::uint64_t seed = 0);

// Source of the most demanded node first (ties to the lowest index). Then,
// while demands remain, the most demanded unsatisfied node x is paired with
// the lowest y for which x ^ y satisfies every open demand into x; when no
// such y exists, m_x goes out as a source.
std::vector<NodePacket> baseline_on_demand(const DemandGraph& d);

// Seed for one RSU and slot derived from a run seed.
std::uint64_t mix_seed(std::uint64_t seed, const std::string& rsu, std::int64_t slot);

}  // namespace fogcast
