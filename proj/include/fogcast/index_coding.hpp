#pragma once

// Single-junction index coding: demand graphs, the cycle-elimination coder with
// source selection, source substitution, decodability witnesses and an
// exhaustive minimum-scheme oracle.

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fogcast/core.hpp"

namespace fogcast {

// "A vehicle holding m_from demands m_to", both 1-based junction node indices.
struct Demand {
  int from = 0;
  int to = 0;
  friend auto operator<=>(const Demand&, const Demand&) = default;
};

struct DemandGraph {
  JunctionId junction;
  int n = 0;
  std::set<Demand> demands;
  // Node indices every vehicle already holds (the prior-information variant).
  std::set<int> prior_extra;

  // Filled when built from a road network: node k is segments[k - 1] and its
  // map-data item is items[k - 1] (empty when the segment has no item).
  std::vector<SegmentId> segments;
  std::vector<MapId> items;
  // Vehicles behind each demand edge.
  std::map<Demand, std::set<VehicleId>> listeners;

  // Throws InvalidDemand on indices outside 1..n or U-turn demands.
  static DemandGraph make(JunctionId junction, int n, std::set<Demand> demands,
                          std::set<int> prior_extra = {});
  void validate() const;

  // Nodes touched by at least one demand.
  std::set<int> nodes() const;
  // Node-induced subgraph; keeps n, items, priors and listeners of kept edges.
  DemandGraph induced(const std::set<int>& keep) const;
  // Map id of node k: items[k - 1] when present, otherwise "m<k>".
  MapId item(int k) const;
  int node_of(const SegmentId& segment) const;  // 0 when absent
};

struct Movement {
  VehicleId vehicle;
  SegmentId from;
  SegmentId to;
};

// Resolves the map item a segment node stands for in this graph; nullopt when
// the segment has nothing to deliver.
using ItemResolver = std::function<std::optional<MapId>(const SegmentId&)>;

// Emits k1 -> k2 for every movement whose target item the vehicle does not
// already hold. U-turns produce no demand. Throws UnknownSegment for
// movements that touch segments not incident to the junction.
DemandGraph build_demand_graph(
    const RoadNetwork& network, const JunctionId& junction,
    std::span<const Movement> movements,
    const std::map<VehicleId, std::set<MapId>>& knowledge,
    const ItemResolver& item_of = nullptr,
    const std::set<SegmentId>& prior_segments = {});

// A source packet (lo == hi) or a binary coded packet m_lo ^ m_hi.
class NodePacket {
 public:
  static NodePacket source(int k) { return NodePacket(k, k); }
  static NodePacket coded(int a, int b);

  bool is_source() const { return lo_ == hi_; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  bool touches(int k) const { return lo_ == k || hi_ == k; }
  int other(int k) const { return lo_ == k ? hi_ : lo_; }
  std::string label() const;

  friend auto operator<=>(const NodePacket&, const NodePacket&) = default;

 private:
  NodePacket(int lo, int hi) : lo_(lo), hi_(hi) {}
  int lo_;
  int hi_;
};

struct IndexCodingScheme {
  std::set<NodePacket> packets;
  // Working state of cycle elimination, keyed by unordered node pair.
  std::map<std::pair<int, int>, bool> locks;

  std::size_t size() const { return packets.size(); }
  std::size_t coded_count() const;
  bool contains(const NodePacket& p) const { return packets.contains(p); }
};

struct DecodeReport {
  bool decodable = true;
  // Packets in decode order, starting from the vehicle's prior.
  std::map<Demand, std::vector<NodePacket>> witness;
  std::vector<Demand> undecodable;

  explicit operator bool() const { return decodable; }
};

// Cycle elimination over the coded-only scheme with one packet per demand.
// Within a cycle the lexicographically largest unlocked packet goes first; a
// removal that breaks a demand is reverted and the packet locked.
IndexCodingScheme eliminate_cycles(const DemandGraph& graph);

// Minimum-size scheme: picks the set of segments to send as sources
// (exhaustively, closed under demand successors), then eliminates cycles
// on the demands left between the remaining segments.
IndexCodingScheme one_j_idxcd(const DemandGraph& graph);

// Replaces every coded packet lying on the witness path of exactly one demand
// by that demand's source packet. Throws InvalidDemand if the scheme does not
// satisfy the graph.
IndexCodingScheme substitute_sources(const IndexCodingScheme& scheme,
                                     const DemandGraph& graph);

DecodeReport is_decodable(const IndexCodingScheme& scheme, const DemandGraph& graph);

// Smallest decodable subset of the n sources plus C(n, 2) binary packets.
// Throws TooLarge when graph.n > max_n.
IndexCodingScheme brute_force_min_scheme(const DemandGraph& graph, int max_n = 5);

// Node indices decodable from `known` with the given packets.
std::set<int> decodable_nodes(const std::set<int>& known,
                              const std::set<NodePacket>& packets);

// Concrete packets for broadcasting; sizes come from the catalog, or 1 byte
// per packet when no catalog is supplied.
std::vector<Packet> to_packets(const IndexCodingScheme& scheme,
                               const DemandGraph& graph,
                               const MapDataCatalog* catalog = nullptr);

}  // namespace fogcast
