#pragma once

#include <initializer_list>
#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "fogcast/core.hpp"
#include "fogcast/index_coding.hpp"

namespace testing {

using fogcast::DemandGraph;
using fogcast::IndexCodingScheme;
using fogcast::MapId;

DemandGraph graph(int n, std::initializer_list<std::pair<int, int>> demands,
                  std::set<int> prior = {});

// Scheme as a set of component sets over "m<k>" identifiers.
std::set<std::set<MapId>> components(const IndexCodingScheme& scheme);
std::set<std::set<MapId>> components(
    std::initializer_list<std::initializer_list<int>> packets);

// Decodability straight from decode_closure on string identifiers.
bool closure_decodable(const IndexCodingScheme& scheme, const DemandGraph& g);

// Minimum scheme size by enumerating packet subsets and checking each with
// decode_closure. Independent of the library's bitmask search.
std::size_t closure_min_size(const DemandGraph& g);

// Uniform random subset of the n(n-1) possible demands.
DemandGraph random_graph(std::mt19937_64& rng, int n, double density);

}  // namespace testing

namespace testing {

// Sum over every (RSU, slot) of the minimum scheme size of the demand graph
// formed by the vehicles turning there, each holding only the segment it
// arrives on. Uses closure_min_size, so junction degree must stay small.
std::size_t junction_minimum_total(const fogcast::RoadNetwork& network,
                                   std::span<const fogcast::TripPlan> plans);

}  // namespace testing
