#pragma once

// Capacity-constrained dissemination over trip plans. A slot engine replays
// every vehicle's trip, builds static and dynamic demand graphs at each RSU a
// vehicle enters, asks a broadcast policy for packets, delivers them to every
// vehicle present and falls back to cellular unicast for whatever is still
// missing at the deadline.
//
// Trip conventions: a vehicle starts holding the static item of its first
// segment. At path[i], 1 <= i < K, it moves from segments[i - 1] to
// segments[i] and needs s:segments[i] by segment_times[i]. On arriving at
// path[i] it publishes d:segments[i - 1]@junction_times[i]. It needs the
// freshest item of segments[i] generated in [segment_times[i] - tau,
// segment_times[i]], when one exists.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "fogcast/core.hpp"
#include "fogcast/index_coding.hpp"

namespace fogcast {

enum class BroadcastPolicy {
  RandJunction,  // sources of the distinct demanded items, shuffled
  RandTrip,      // whole remaining trip of every vehicle at its first RSU
  IndexCoded,    // one_j_idxcd with source substitution
  OnDemand,      // most-demanded source first, then greedy binary packets
  Online,        // best subgraph under capacity, cellular fallback at once
  Offline,       // online coding plus advance downloads with known plans
};

std::string_view to_string(BroadcastPolicy policy);

struct SchedulerConfig {
  // Per-slot RSU download capacity in bytes; unlimited when unset.
  std::optional<Bytes> capacity;
  std::map<JunctionId, Bytes> rsu_capacity;
  Slot tau = 1;
  // Segments whose static data every vehicle holds before departing.
  std::set<SegmentId> prior_segments;
  std::uint64_t seed = 0;
  int threads = 1;

  std::optional<Bytes> capacity_of(const JunctionId& rsu) const;
};

enum class ItemKind { Static, Dynamic };
enum class PacketTag { Static, Dynamic, Advance };
enum class Channel { Broadcast, Cellular, Prior };

std::string_view to_string(PacketTag tag);
std::string_view to_string(Channel channel);

struct BroadcastRecord {
  JunctionId rsu;
  Slot slot = 0;
  Packet packet = Packet::source("", 0);
  PacketTag tag = PacketTag::Static;
};

struct CellularRecord {
  VehicleId vehicle;
  Slot slot = 0;
  MapId item;
  Bytes bytes = 0;
  // Junction the vehicle was at when the item was pushed.
  JunctionId junction;
};

struct AdvanceRecord {
  JunctionId rsu;
  Slot slot = 0;
  SegmentId segment;
  // Vehicles whose pending item this packet resolved.
  std::set<VehicleId> vehicles;
  // Hop distance from the RSU to the nearer end of the segment.
  int distance = 0;
};

// One static or dynamic obligation and how it was met.
struct Requirement {
  VehicleId vehicle;
  ItemKind kind = ItemKind::Static;
  SegmentId segment;
  MapId item;
  JunctionId junction;
  Slot deadline = 0;
  Channel channel = Channel::Broadcast;
};

struct RsuSlotStats {
  JunctionId junction;
  Slot slot = 0;
  std::size_t broadcast_packets = 0;
  std::size_t coded_packets = 0;
  Bytes broadcast_bytes = 0;
  std::size_t cellular_count = 0;
  Bytes cellular_bytes = 0;
  std::size_t demanding_vehicles = 0;
  std::size_t satisfied_vehicles = 0;
  std::optional<Bytes> capacity;
};

struct ScheduleDecision {
  using BroadcastKey = std::tuple<JunctionId, Slot, SegmentId>;
  using CellularKey = std::tuple<VehicleId, Slot, SegmentId>;
  std::set<BroadcastKey> broadcast_static;
  std::set<BroadcastKey> broadcast_dynamic;
  std::set<CellularKey> cellular_static;
  std::set<CellularKey> cellular_dynamic;
};

struct ScheduleResult {
  BroadcastPolicy policy = BroadcastPolicy::Online;
  ScheduleDecision decision;
  std::vector<BroadcastRecord> broadcasts;
  std::vector<CellularRecord> cellular;
  std::vector<AdvanceRecord> advance;
  std::vector<Requirement> requirements;
  // Keyed by (slot, junction); junctions without an RSU only carry cellular.
  std::map<std::pair<Slot, JunctionId>, RsuSlotStats> stats;

  Bytes cellular_bytes() const;
  Bytes broadcast_bytes() const;
};

// ---------------------------------------------------------------------------
// Single RSU building blocks

// Knowledge used to judge whether a listener can decode; when a vehicle is
// missing, it is assumed to hold the item of its demand's source node and the
// graph's prior nodes.
using KnowledgeView = std::map<VehicleId, std::set<MapId>>;

struct SubgraphChoice {
  std::set<int> nodes;
  DemandGraph graph;
  IndexCodingScheme scheme;
  std::vector<Packet> packets;
  Bytes bytes = 0;
  // W(H): vehicles able to decode every demand they have in d.
  std::size_t satisfied = 0;
  std::set<VehicleId> served;
};

// Exhaustive over node subsets of d (greedy node dropping beyond 12 nodes).
// Packet sizes come from the catalog, or 1 byte each without one. Demands with
// no listeners count as one anonymous vehicle each.
SubgraphChoice best_subgraph(const DemandGraph& d, std::optional<Bytes> budget,
                             const MapDataCatalog* catalog = nullptr,
                             const KnowledgeView* knowledge = nullptr);

struct RsuPlan {
  SubgraphChoice static_choice;
  SubgraphChoice dynamic_choice;
  std::vector<Packet> static_packets;
  std::vector<Packet> dynamic_packets;
  Bytes used = 0;
  // (vehicle, item) demands left undecodable by this plan.
  std::vector<std::pair<VehicleId, MapId>> unserved_static;
  std::vector<std::pair<VehicleId, MapId>> unserved_dynamic;
};

// One RSU, one slot of the online scheduler: static pass first, then the
// dynamic pass with whatever budget is left.
RsuPlan onl_schd(const DemandGraph& static_graph, const DemandGraph& dynamic_graph,
                 std::optional<Bytes> capacity, const MapDataCatalog& catalog,
                 const KnowledgeView& knowledge);

// ---------------------------------------------------------------------------
// Whole-trip runs

ScheduleResult run_schedule(const RoadNetwork& network, const MapDataCatalog& catalog,
                            std::span<const TripPlan> plans, const SchedulerConfig& config,
                            BroadcastPolicy policy);

inline ScheduleResult run_online(const RoadNetwork& network, const MapDataCatalog& catalog,
                                 std::span<const TripPlan> plans,
                                 const SchedulerConfig& config) {
  return run_schedule(network, catalog, plans, config, BroadcastPolicy::Online);
}

inline ScheduleResult ofl_schd(const RoadNetwork& network, const MapDataCatalog& catalog,
                               std::span<const TripPlan> plans,
                               const SchedulerConfig& config) {
  return run_schedule(network, catalog, plans, config, BroadcastPolicy::Offline);
}

// Catalog with every dynamic item the plans generate registered.
MapDataCatalog with_generated_items(const MapDataCatalog& catalog,
                                    std::span<const TripPlan> plans);

// Largest byte total of distinct items demanded at one RSU in one slot when
// every vehicle starts from its preload only.
Bytes peak_demand(const RoadNetwork& network, const MapDataCatalog& catalog,
                  std::span<const TripPlan> plans, const SchedulerConfig& config);

struct DeliveryReport {
  std::vector<std::string> capacity_violations;
  std::vector<std::string> missing_static;
  std::vector<std::string> missing_dynamic;

  bool ok() const {
    return capacity_violations.empty() && missing_static.empty() && missing_dynamic.empty();
  }
};

// Replays broadcasts and cellular pushes slot by slot against fresh knowledge
// and checks capacity per RSU slot, static delivery by each deadline and a
// fresh dynamic item at each deadline.
DeliveryReport verify_delivery(const RoadNetwork& network, const MapDataCatalog& catalog,
                               std::span<const TripPlan> plans, const SchedulerConfig& config,
                               const ScheduleResult& result);

}  // namespace fogcast
