#pragma once

// Road network, trip plans, map-data catalog and the XOR packet algebra that
// every other module builds on. Payload bytes are never materialised here:
// packets carry identifiers and sizes only.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fogcast/error.hpp"

namespace fogcast {

using JunctionId = std::string;
using SegmentId = std::string;
using VehicleId = std::string;
using MapId = std::string;
using Slot = std::int64_t;
using Bytes = std::uint64_t;

// Map-data identifiers: "s:<segment>" for static data and
// "d:<segment>@<slot>" for the dynamic item generated in a slot.
MapId static_id(const SegmentId& segment);
MapId dynamic_id(const SegmentId& segment, Slot slot);

struct ParsedMapId {
  bool dynamic = false;
  SegmentId segment;
  Slot slot = 0;
};
std::optional<ParsedMapId> parse_map_id(std::string_view id);

// ---------------------------------------------------------------------------
// Packets

enum class PacketKind { Source, Coded };

class Packet {
 public:
  static Packet source(MapId id, Bytes size);
  // Throws InvalidDemand when fewer than two components are given.
  static Packet coded(std::set<MapId> components, Bytes size);
  // Source when one component, Coded otherwise. Empty sets are rejected.
  static Packet of(std::set<MapId> components, Bytes size);

  PacketKind kind() const {
    return components_.size() == 1 ? PacketKind::Source : PacketKind::Coded;
  }
  bool is_source() const { return kind() == PacketKind::Source; }
  const std::set<MapId>& components() const { return components_; }
  Bytes size() const { return size_; }

  // "s:a" or "s:a^s:b"
  std::string label() const;

  // Identity is the component set; XOR is commutative so order never matters.
  friend bool operator==(const Packet& a, const Packet& b) {
    return a.components_ == b.components_;
  }
  friend std::strong_ordering operator<=>(const Packet& a, const Packet& b) {
    return a.components_ <=> b.components_;
  }

 private:
  Packet(std::set<MapId> components, Bytes size)
      : components_(std::move(components)), size_(size) {}

  std::set<MapId> components_;
  Bytes size_ = 0;
};

// Symmetric difference of the component sets; size is the larger operand size
// (zero padding). Throws EmptyResult when everything cancels.
Packet xor_combine(const Packet& a, const Packet& b);

// Least fixed point of "x is decodable if some packet has every component
// except x decodable", seeded with prior.
std::set<MapId> decode_closure(const std::set<MapId>& prior,
                               std::span<const Packet> packets);

// Received packets and the identifiers they decode to for one vehicle.
// decoded() always equals decode_closure(prior, broadcast + cellular).
class KnowledgeSet {
 public:
  KnowledgeSet() = default;
  explicit KnowledgeSet(VehicleId vehicle) : vehicle_(std::move(vehicle)) {}

  const VehicleId& vehicle() const { return vehicle_; }

  void add_prior(const MapId& id);
  void receive_broadcast(const Packet& packet);
  void receive_cellular(const Packet& packet);

  bool knows(const MapId& id) const { return decoded_.contains(id); }
  const std::set<MapId>& prior() const { return prior_; }
  const std::set<MapId>& decoded() const { return decoded_; }
  const std::vector<Packet>& received_broadcast() const { return broadcast_; }
  const std::vector<Packet>& received_cellular() const { return cellular_; }

 private:
  void learn(const MapId& id);
  void absorb(const Packet& packet);
  void propagate();

  VehicleId vehicle_;
  std::set<MapId> prior_;
  std::set<MapId> decoded_;
  std::vector<Packet> broadcast_;
  std::vector<Packet> cellular_;
  std::vector<Packet> unresolved_;
};

// ---------------------------------------------------------------------------
// Road network

struct Junction {
  JunctionId id;
  double x = 0.0;
  double y = 0.0;
};

struct Segment {
  SegmentId id;
  JunctionId a;
  JunctionId b;
  double length_m = 1.0;
};

class RoadNetwork {
 public:
  RoadNetwork() = default;
  // Throws InvalidNetwork on dangling endpoints, duplicate ids, self loops or
  // RSUs placed on undeclared junctions.
  RoadNetwork(std::vector<Junction> junctions, std::vector<Segment> segments,
              std::set<JunctionId> rsus);

  const std::map<JunctionId, Junction>& junctions() const { return junctions_; }
  const std::map<SegmentId, Segment>& segments() const { return segments_; }
  const std::set<JunctionId>& rsus() const { return rsus_; }

  bool has_junction(const JunctionId& id) const { return junctions_.contains(id); }
  bool has_segment(const SegmentId& id) const { return segments_.contains(id); }
  bool is_rsu(const JunctionId& id) const { return rsus_.contains(id); }

  const Junction& junction(const JunctionId& id) const;
  const Segment& segment(const SegmentId& id) const;

  // Segments incident to a junction, sorted by id. Node k of a junction's
  // demand graph is incident(j)[k - 1].
  const std::vector<SegmentId>& incident(const JunctionId& id) const;
  // E_r: the segments incident to an RSU junction.
  const std::vector<SegmentId>& rsu_segments(const JunctionId& rsu) const;
  std::optional<SegmentId> segment_between(const JunctionId& a,
                                           const JunctionId& b) const;
  const JunctionId& other_end(const SegmentId& segment,
                              const JunctionId& from) const;

  // Unweighted hop counts from a junction; unreachable junctions are absent.
  std::map<JunctionId, int> hop_distances(const JunctionId& from) const;
  bool connected() const;

 private:
  std::map<JunctionId, Junction> junctions_;
  std::map<SegmentId, Segment> segments_;
  std::set<JunctionId> rsus_;
  std::map<JunctionId, std::vector<SegmentId>> incident_;
};

// ---------------------------------------------------------------------------
// Trip plans
//
// A vehicle starts at path[0] holding the map data of its first segment and
// ends at path.back(). segments[i] joins path[i] and path[i + 1] and is
// entered at segment_times[i]; path[i] is entered at junction_times[i].
// Ordering: junction_times[i] <= segment_times[i] < junction_times[i + 1].

struct TripPlan {
  VehicleId vehicle;
  std::vector<JunctionId> path;
  std::vector<SegmentId> segments;
  std::vector<Slot> junction_times;
  std::vector<Slot> segment_times;

  Slot start_time() const { return junction_times.front(); }
  Slot end_time() const { return junction_times.back(); }
};

// Builds the segment sequence from consecutive junctions. When segment_times
// is empty every segment is entered in the same slot as its start junction.
TripPlan make_plan(const RoadNetwork& network, VehicleId vehicle,
                   std::vector<JunctionId> path, std::vector<Slot> junction_times,
                   std::vector<Slot> segment_times = {});

// Throws InvalidPlan with a description of the first broken invariant.
void validate_plan(const TripPlan& plan, const RoadNetwork& network);

// ---------------------------------------------------------------------------
// Map data catalog

class MapDataCatalog {
 public:
  // Static item m^s_e. A default size applies to segments without an entry.
  void set_static_size(const SegmentId& segment, Bytes size);
  void set_default_static_size(Bytes size);
  Bytes static_size(const SegmentId& segment) const;
  bool has_static_size(const SegmentId& segment) const;

  // Size of every dynamic item generated on a segment; zero disables dynamic
  // data for that segment.
  void set_dynamic_size(const SegmentId& segment, Bytes size);
  void set_default_dynamic_size(Bytes size);
  Bytes dynamic_size(const SegmentId& segment) const;
  bool dynamic_enabled(const SegmentId& segment) const {
    return dynamic_size(segment) > 0;
  }

  // m^d_e(t) registry.
  void add_dynamic_item(const SegmentId& segment, Slot slot);
  bool has_dynamic_item(const SegmentId& segment, Slot slot) const;
  // Latest item of a segment with from <= slot <= upto.
  std::optional<Slot> latest_dynamic(const SegmentId& segment, Slot from,
                                     Slot upto) const;
  const std::map<SegmentId, std::set<Slot>>& dynamic_items() const {
    return dynamic_items_;
  }

  // Explicit sizes for coded packets keyed by component set.
  void set_coded_size(std::set<MapId> components, Bytes size);
  const std::map<std::set<MapId>, Bytes>& coded_sizes() const {
    return coded_sizes_;
  }

  Bytes item_size(const MapId& id) const;
  // Coded-size table entry if present, else the largest component size.
  Bytes packet_size(const std::set<MapId>& components) const;
  Packet make_packet(std::set<MapId> components) const;

  const std::map<SegmentId, Bytes>& static_sizes() const { return static_sizes_; }
  const std::map<SegmentId, Bytes>& dynamic_sizes() const { return dynamic_sizes_; }
  Bytes default_static_size() const { return default_static_; }
  Bytes default_dynamic_size() const { return default_dynamic_; }

 private:
  std::map<SegmentId, Bytes> static_sizes_;
  std::map<SegmentId, Bytes> dynamic_sizes_;
  Bytes default_static_ = 0;
  Bytes default_dynamic_ = 0;
  std::map<SegmentId, std::set<Slot>> dynamic_items_;
  std::map<std::set<MapId>, Bytes> coded_sizes_;
};

}  // namespace fogcast
