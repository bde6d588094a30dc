#pragma once

// Trace-driven replay of a whole scenario under one dissemination scheme, the
// broadcast delay model and a synthetic trace generator.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fogcast/baselines.hpp"
#include "fogcast/core.hpp"
#include "fogcast/meeting.hpp"
#include "fogcast/scheduler.hpp"

namespace fogcast {

enum class Scheme { Rand, OneJIdxCd, OneJIdxCdPI, OnDemand, OnlSchd, OflSchd };

// "Rand", "1J-IdxCd", "1J-IdxCd-PI", "OnDemand", "ONLSchd", "OFLSchd"
std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

// Rand either sends the sources of the current junction's demands or, the
// first time a vehicle is heard, everything left on its trip.
enum class RandMode { Junction, Trip };

std::string_view to_string(RandMode mode);
std::optional<RandMode> parse_rand_mode(std::string_view name);

struct DelayModel {
  Bytes mtu = 1024;
  double data_rate = 6e6;         // bits per second
  double processing_delay = 1e-3;  // seconds per coded packet
};

// ceil(total / mtu) frames at mtu * 8 / rate seconds each, plus the processing
// delay of every coded packet.
double overall_delay(std::span<const Packet> transmissions, const DelayModel& model = {});
double overall_delay(std::span<const Packet> transmissions, double processing_delay,
                     Bytes mtu, double data_rate);

struct ScenarioConfig {
  Scheme scheme = Scheme::OneJIdxCd;
  RandMode rand_mode = RandMode::Junction;
  // Capacity, tau, seed and threads. Its prior_segments are the prior set of
  // 1J-IdxCd-PI and are ignored by every other scheme.
  SchedulerConfig scheduler;
  double slot_seconds = 1.0;
  DelayModel delay;
};

struct Scenario {
  RoadNetwork network;
  MapDataCatalog catalog;
  std::vector<TripPlan> plans;
  ScenarioConfig config;

  // Every broken invariant, empty when the scenario can run.
  std::vector<std::string> diagnostics() const;
  // Throws ScenarioError when diagnostics() is not empty.
  void validate() const;
};

class ScenarioError : public Error {
 public:
  explicit ScenarioError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

// Counters for one junction in one slot. Junctions without an RSU only carry
// cellular traffic.
struct SlotMetrics {
  Slot slot = 0;
  JunctionId rsu;
  std::uint64_t broadcast_transmissions = 0;
  std::uint64_t coded_transmissions = 0;
  Bytes broadcast_bytes = 0;
  std::uint64_t cellular_transmissions = 0;
  Bytes cellular_bytes = 0;
  std::uint64_t satisfied_vehicles = 0;
  double overall_delay_seconds = 0.0;

  friend bool operator==(const SlotMetrics&, const SlotMetrics&) = default;
};

struct MetricTotals {
  std::uint64_t broadcast_transmissions = 0;
  std::uint64_t coded_transmissions = 0;
  Bytes broadcast_bytes = 0;
  std::uint64_t cellular_transmissions = 0;
  Bytes cellular_bytes = 0;
  std::uint64_t satisfied_vehicles = 0;
  double overall_delay_seconds = 0.0;

  friend bool operator==(const MetricTotals&, const MetricTotals&) = default;
};

struct Metrics {
  std::string scheme;
  // Sorted by (slot, rsu).
  std::vector<SlotMetrics> records;
  MetricTotals totals;

  // Requirements by how they were met.
  std::uint64_t static_requirements = 0;
  std::uint64_t dynamic_requirements = 0;
  std::uint64_t met_by_broadcast = 0;
  std::uint64_t met_by_cellular = 0;
  std::uint64_t met_by_prior = 0;

  // Hop distance -> advance downloads.
  std::map<int, std::uint64_t> predownload_histogram;

  // Slots between the first departure and the last arrival, and the slots
  // with at least one broadcast.
  std::uint64_t slots = 0;
  std::uint64_t active_slots = 0;
  double slot_seconds = 1.0;
  double broadcast_bytes_per_slot = 0.0;
  double broadcast_bytes_per_active_slot = 0.0;
  double transmissions_per_slot = 0.0;
  double transmissions_per_active_slot = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Replays the scenario under its scheme. Throws ScenarioError.
Metrics run(const Scenario& scenario);

// Scheme to broadcast policy and scheduler configuration actually used.
BroadcastPolicy policy_of(const ScenarioConfig& config);
SchedulerConfig scheduler_config_of(const ScenarioConfig& config);

Metrics metrics_from(const ScheduleResult& result, const Scenario& scenario);

// Advance downloads per hop distance between the serving RSU and the nearer
// end of the downloaded segment.
std::map<int, std::uint64_t> predownload_distance_histogram(
    std::span<const AdvanceRecord> advance, const RoadNetwork& network);

// ---------------------------------------------------------------------------
// Traces

// Junctions "J<x>_<y>" spaced block_m apart, segments "J<a>-J<b>" in id
// order. A seeded share of the junctions hosts an RSU.
RoadNetwork grid_network(int width, int height, double block_m = 200.0,
                         double rsu_fraction = 1.0, std::uint64_t seed = 0);

enum class Mobility { ShortestPath, RandomTurn };

struct TraceConfig {
  int vehicles = 0;
  Slot horizon = 100;
  std::uint64_t seed = 0;
  Mobility mobility = Mobility::ShortestPath;
  // Random-turn mode: probability of keeping straight and the trip length
  // range in hops.
  double straight_probability = 0.6;
  int min_hops = 2;
  int max_hops = 8;
};

struct SyntheticTraces {
  std::vector<TripPlan> plans;
  // One sample per vehicle per junction visit.
  std::vector<TraceSample> samples;
};

// Vehicles advance one junction per slot. Shortest paths use one seeded
// perturbation of the segment lengths shared by every vehicle, so paths are
// unique. Throws DisconnectedNetwork.
SyntheticTraces synthesize_traces(const RoadNetwork& network, const TraceConfig& config);

// Rebuilds trip plans from samples: consecutive samples at the same junction
// collapse to one visit entered at the first and left at the last. Samples
// without a junction snap to the nearest junction within snap_radius_m or are
// skipped. Throws InvalidPlan when consecutive junctions are not adjacent.
std::vector<TripPlan> plans_from_traces(const RoadNetwork& network,
                                        std::span<const TraceSample> samples,
                                        double snap_radius_m = 50.0);

}  // namespace fogcast
