#include "fogcast/core.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <sstream>

namespace fogcast {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::UnknownSegment: return "UnknownSegment";
    case ErrorCode::InvalidDemand: return "InvalidDemand";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::PointOutOfBounds: return "PointOutOfBounds";
    case ErrorCode::InvalidOccupancy: return "InvalidOccupancy";
    case ErrorCode::DepthMismatch: return "DepthMismatch";
    case ErrorCode::ParameterMismatch: return "ParameterMismatch";
    case ErrorCode::InvalidNetwork: return "InvalidNetwork";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::DisconnectedNetwork: return "DisconnectedNetwork";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

MapId static_id(const SegmentId& segment) { return "s:" + segment; }

MapId dynamic_id(const SegmentId& segment, Slot slot) {
  return "d:" + segment + "@" + std::to_string(slot);
}

std::optional<ParsedMapId> parse_map_id(std::string_view id) {
  if (id.size() < 3 || id[1] != ':') return std::nullopt;
  ParsedMapId parsed;
  if (id[0] == 's') {
    parsed.segment = std::string(id.substr(2));
    return parsed;
  }
  if (id[0] != 'd') return std::nullopt;
  const auto at = id.rfind('@');
  if (at == std::string_view::npos || at <= 2) return std::nullopt;
  parsed.dynamic = true;
  parsed.segment = std::string(id.substr(2, at - 2));
  const auto digits = id.substr(at + 1);
  const auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), parsed.slot);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return parsed;
}

// ---------------------------------------------------------------------------

Packet Packet::source(MapId id, Bytes size) {
  return Packet({std::move(id)}, size);
}

Packet Packet::coded(std::set<MapId> components, Bytes size) {
  if (components.size() < 2) {
    throw Error(ErrorCode::InvalidDemand,
                "coded packet needs at least two components");
  }
  return Packet(std::move(components), size);
}

Packet Packet::of(std::set<MapId> components, Bytes size) {
  if (components.empty()) {
    throw Error(ErrorCode::EmptyResult, "packet has no components");
  }
  return Packet(std::move(components), size);
}

std::string Packet::label() const {
  std::string out;
  for (const auto& c : components_) {
    if (!out.empty()) out += '^';
    out += c;
  }
  return out;
}

Packet xor_combine(const Packet& a, const Packet& b) {
  std::set<MapId> result;
  std::set_symmetric_difference(a.components().begin(), a.components().end(),
                                b.components().begin(), b.components().end(),
                                std::inserter(result, result.end()));
  if (result.empty()) {
    throw Error(ErrorCode::EmptyResult,
                "xor of identical packets {" + a.label() + "} cancels");
  }
  return Packet::of(std::move(result), std::max(a.size(), b.size()));
}

std::set<MapId> decode_closure(const std::set<MapId>& prior,
                               std::span<const Packet> packets) {
  std::set<MapId> known = prior;
  std::vector<const Packet*> pending;
  for (const auto& p : packets) pending.push_back(&p);

  bool grew = true;
  while (grew) {
    grew = false;
    for (auto it = pending.begin(); it != pending.end();) {
      const MapId* missing = nullptr;
      int unknown = 0;
      for (const auto& c : (*it)->components()) {
        if (!known.contains(c)) {
          missing = &c;
          if (++unknown > 1) break;
        }
      }
      if (unknown == 0) {
        it = pending.erase(it);
      } else if (unknown == 1) {
        known.insert(*missing);
        grew = true;
        it = pending.erase(it);
      } else {
        ++it;
      }
    }
  }
  return known;
}

// ---------------------------------------------------------------------------

void KnowledgeSet::add_prior(const MapId& id) {
  prior_.insert(id);
  learn(id);
  propagate();
}

void KnowledgeSet::receive_broadcast(const Packet& packet) {
  broadcast_.push_back(packet);
  absorb(packet);
}

void KnowledgeSet::receive_cellular(const Packet& packet) {
  cellular_.push_back(packet);
  absorb(packet);
}

void KnowledgeSet::learn(const MapId& id) { decoded_.insert(id); }

void KnowledgeSet::absorb(const Packet& packet) {
  unresolved_.push_back(packet);
  propagate();
}

void KnowledgeSet::propagate() {
  bool grew = true;
  while (grew) {
    grew = false;
    for (auto it = unresolved_.begin(); it != unresolved_.end();) {
      const MapId* missing = nullptr;
      int unknown = 0;
      for (const auto& c : it->components()) {
        if (!decoded_.contains(c)) {
          missing = &c;
          if (++unknown > 1) break;
        }
      }
      if (unknown == 0) {
        it = unresolved_.erase(it);
      } else if (unknown == 1) {
        decoded_.insert(*missing);
        grew = true;
        it = unresolved_.erase(it);
      } else {
        ++it;
      }
    }
  }
}

// ---------------------------------------------------------------------------

RoadNetwork::RoadNetwork(std::vector<Junction> junctions,
                         std::vector<Segment> segments,
                         std::set<JunctionId> rsus)
    : rsus_(std::move(rsus)) {
  for (auto& j : junctions) {
    if (j.id.empty()) throw Error(ErrorCode::InvalidNetwork, "empty junction id");
    const auto id = j.id;
    if (!junctions_.emplace(id, std::move(j)).second) {
      throw Error(ErrorCode::InvalidNetwork, "duplicate junction " + id);
    }
    incident_[id];
  }
  for (auto& s : segments) {
    if (!junctions_.contains(s.a) || !junctions_.contains(s.b)) {
      throw Error(ErrorCode::InvalidNetwork,
                  "segment " + s.id + " references an undeclared junction");
    }
    if (s.a == s.b) {
      throw Error(ErrorCode::InvalidNetwork, "segment " + s.id + " is a self loop");
    }
    if (s.length_m <= 0.0) {
      throw Error(ErrorCode::InvalidNetwork,
                  "segment " + s.id + " has non-positive length");
    }
    const auto id = s.id;
    incident_[s.a].push_back(id);
    incident_[s.b].push_back(id);
    if (!segments_.emplace(id, std::move(s)).second) {
      throw Error(ErrorCode::InvalidNetwork, "duplicate segment " + id);
    }
  }
  for (auto& [id, list] : incident_) std::sort(list.begin(), list.end());
  for (const auto& r : rsus_) {
    if (!junctions_.contains(r)) {
      throw Error(ErrorCode::InvalidNetwork, "RSU on undeclared junction " + r);
    }
  }
}

const Junction& RoadNetwork::junction(const JunctionId& id) const {
  const auto it = junctions_.find(id);
  if (it == junctions_.end()) {
    throw Error(ErrorCode::InvalidNetwork, "unknown junction " + id);
  }
  return it->second;
}

const Segment& RoadNetwork::segment(const SegmentId& id) const {
  const auto it = segments_.find(id);
  if (it == segments_.end()) {
    throw Error(ErrorCode::UnknownSegment, "unknown segment " + id);
  }
  return it->second;
}

const std::vector<SegmentId>& RoadNetwork::incident(const JunctionId& id) const {
  const auto it = incident_.find(id);
  if (it == incident_.end()) {
    throw Error(ErrorCode::InvalidNetwork, "unknown junction " + id);
  }
  return it->second;
}

const std::vector<SegmentId>& RoadNetwork::rsu_segments(const JunctionId& rsu) const {
  if (!is_rsu(rsu)) throw Error(ErrorCode::InvalidNetwork, rsu + " is not an RSU");
  return incident(rsu);
}

std::optional<SegmentId> RoadNetwork::segment_between(const JunctionId& a,
                                                      const JunctionId& b) const {
  const auto it = incident_.find(a);
  if (it == incident_.end()) return std::nullopt;
  for (const auto& s : it->second) {
    const auto& seg = segments_.at(s);
    if ((seg.a == a && seg.b == b) || (seg.a == b && seg.b == a)) return s;
  }
  return std::nullopt;
}

const JunctionId& RoadNetwork::other_end(const SegmentId& segment,
                                         const JunctionId& from) const {
  const auto& s = this->segment(segment);
  if (s.a == from) return s.b;
  if (s.b == from) return s.a;
  throw Error(ErrorCode::UnknownSegment,
              "segment " + segment + " is not incident to " + from);
}

std::map<JunctionId, int> RoadNetwork::hop_distances(const JunctionId& from) const {
  std::map<JunctionId, int> dist;
  if (!junctions_.contains(from)) return dist;
  std::deque<JunctionId> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const auto here = queue.front();
    queue.pop_front();
    for (const auto& s : incident_.at(here)) {
      const auto& next = other_end(s, here);
      if (dist.emplace(next, dist[here] + 1).second) queue.push_back(next);
    }
  }
  return dist;
}

bool RoadNetwork::connected() const {
  if (junctions_.empty()) return true;
  return hop_distances(junctions_.begin()->first).size() == junctions_.size();
}

// ---------------------------------------------------------------------------

TripPlan make_plan(const RoadNetwork& network, VehicleId vehicle,
                   std::vector<JunctionId> path, std::vector<Slot> junction_times,
                   std::vector<Slot> segment_times) {
  TripPlan plan;
  plan.vehicle = std::move(vehicle);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const auto seg = network.segment_between(path[i], path[i + 1]);
    if (!seg) {
      throw Error(ErrorCode::InvalidPlan, "no segment joins " + path[i] + " and " +
                                              path[i + 1] + " for " + plan.vehicle);
    }
    plan.segments.push_back(*seg);
  }
  if (segment_times.empty() && path.size() == junction_times.size()) {
    segment_times.assign(junction_times.begin(),
                         junction_times.end() - (junction_times.empty() ? 0 : 1));
  }
  plan.path = std::move(path);
  plan.junction_times = std::move(junction_times);
  plan.segment_times = std::move(segment_times);
  validate_plan(plan, network);
  return plan;
}

void validate_plan(const TripPlan& plan, const RoadNetwork& network) {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::InvalidPlan, "plan " + plan.vehicle + ": " + what);
  };
  if (plan.vehicle.empty()) fail("empty vehicle id");
  if (plan.path.size() < 2) fail("path needs at least two junctions");
  if (plan.junction_times.size() != plan.path.size()) fail("junction time count mismatch");
  if (plan.segments.size() + 1 != plan.path.size()) fail("segment count mismatch");
  if (plan.segment_times.size() != plan.segments.size()) fail("segment time count mismatch");
  for (const auto& j : plan.path) {
    if (!network.has_junction(j)) fail("unknown junction " + j);
  }
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    if (!network.has_segment(plan.segments[i])) fail("unknown segment " + plan.segments[i]);
    const auto& s = network.segment(plan.segments[i]);
    const bool joins = (s.a == plan.path[i] && s.b == plan.path[i + 1]) ||
                       (s.b == plan.path[i] && s.a == plan.path[i + 1]);
    if (!joins) fail("segment " + s.id + " does not join consecutive junctions");
    if (plan.junction_times[i] >= plan.junction_times[i + 1]) {
      fail("junction times not strictly increasing");
    }
    if (plan.segment_times[i] < plan.junction_times[i] ||
        plan.segment_times[i] >= plan.junction_times[i + 1]) {
      fail("segment " + s.id + " entry time outside its junction window");
    }
  }
}

// ---------------------------------------------------------------------------

void MapDataCatalog::set_static_size(const SegmentId& segment, Bytes size) {
  if (size == 0) throw Error(ErrorCode::ScenarioInvalid, "static size of " + segment + " is zero");
  static_sizes_[segment] = size;
}

void MapDataCatalog::set_default_static_size(Bytes size) { default_static_ = size; }

Bytes MapDataCatalog::static_size(const SegmentId& segment) const {
  const auto it = static_sizes_.find(segment);
  if (it != static_sizes_.end()) return it->second;
  if (default_static_ == 0) {
    throw Error(ErrorCode::ScenarioInvalid, "no static size for segment " + segment);
  }
  return default_static_;
}

bool MapDataCatalog::has_static_size(const SegmentId& segment) const {
  return static_sizes_.contains(segment) || default_static_ > 0;
}

void MapDataCatalog::set_dynamic_size(const SegmentId& segment, Bytes size) {
  dynamic_sizes_[segment] = size;
}

void MapDataCatalog::set_default_dynamic_size(Bytes size) { default_dynamic_ = size; }

Bytes MapDataCatalog::dynamic_size(const SegmentId& segment) const {
  const auto it = dynamic_sizes_.find(segment);
  return it != dynamic_sizes_.end() ? it->second : default_dynamic_;
}

void MapDataCatalog::add_dynamic_item(const SegmentId& segment, Slot slot) {
  dynamic_items_[segment].insert(slot);
}

bool MapDataCatalog::has_dynamic_item(const SegmentId& segment, Slot slot) const {
  const auto it = dynamic_items_.find(segment);
  return it != dynamic_items_.end() && it->second.contains(slot);
}

std::optional<Slot> MapDataCatalog::latest_dynamic(const SegmentId& segment,
                                                   Slot from, Slot upto) const {
  const auto it = dynamic_items_.find(segment);
  if (it == dynamic_items_.end() || upto < from) return std::nullopt;
  auto pos = it->second.upper_bound(upto);
  if (pos == it->second.begin()) return std::nullopt;
  --pos;
  if (*pos < from) return std::nullopt;
  return *pos;
}

void MapDataCatalog::set_coded_size(std::set<MapId> components, Bytes size) {
  if (size == 0) throw Error(ErrorCode::ScenarioInvalid, "coded size entry is zero");
  if (components.size() < 2) {
    throw Error(ErrorCode::ScenarioInvalid, "coded size entry needs two or more components");
  }
  coded_sizes_[std::move(components)] = size;
}

Bytes MapDataCatalog::item_size(const MapId& id) const {
  const auto parsed = parse_map_id(id);
  if (!parsed) throw Error(ErrorCode::ParseError, "malformed map id " + id);
  if (!parsed->dynamic) return static_size(parsed->segment);
  const auto size = dynamic_size(parsed->segment);
  if (size == 0) {
    throw Error(ErrorCode::ScenarioInvalid, "no dynamic size for segment " + parsed->segment);
  }
  return size;
}

Bytes MapDataCatalog::packet_size(const std::set<MapId>& components) const {
  if (components.size() >= 2) {
    const auto it = coded_sizes_.find(components);
    if (it != coded_sizes_.end()) return it->second;
  }
  Bytes size = 0;
  for (const auto& c : components) size = std::max(size, item_size(c));
  return size;
}

Packet MapDataCatalog::make_packet(std::set<MapId> components) const {
  const auto size = packet_size(components);
  return Packet::of(std::move(components), size);
}

}  // namespace fogcast
