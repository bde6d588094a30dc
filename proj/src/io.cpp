#include "fogcast/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fogcast {

namespace {

namespace fs = std::filesystem;

template <class F>
auto parsing(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

void require_object(const Json& j, const std::string& what) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, what + " must be a JSON object");
}

Json resolve(const Json& j, const fs::path& base) {
  if (!j.is_string()) return j;
  return load_json(base / j.get<std::string>());
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class Key>
Json key_list(const std::set<Key>& keys) {
  Json out = Json::array();
  for (const auto& k : keys) {
    out.push_back(Json::array({std::get<0>(k), std::get<1>(k), std::get<2>(k)}));
  }
  return out;
}

template <class Key>
std::set<Key> key_set(const Json& j) {
  std::set<Key> out;
  for (const auto& row : j) {
    out.insert({row.at(0).get<std::string>(), row.at(1).get<Slot>(), row.at(2).get<std::string>()});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Json load_json(const fs::path& path) {
  const auto text = read_text(path);
  return parsing(path.string(), [&] { return Json::parse(text); });
}

void save_json(const fs::path& path, const Json& value) {
  write_text(path, value.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

RoadNetwork network_from_json(const Json& j) {
  require_object(j, "network");
  return parsing("network", [&] {
    std::vector<Junction> junctions;
    for (const auto& x : j.at("junctions")) {
      junctions.push_back(
          {x.at("id").get<std::string>(), get_or(x, "x", 0.0), get_or(x, "y", 0.0)});
    }
    std::vector<Segment> segments;
    for (const auto& s : j.at("segments")) {
      segments.push_back({s.at("id").get<std::string>(), s.at("a").get<std::string>(),
                          s.at("b").get<std::string>(), get_or(s, "length_m", 1.0)});
    }
    auto rsus = get_or(j, "rsus", std::set<JunctionId>{});
    return RoadNetwork(std::move(junctions), std::move(segments), std::move(rsus));
  });
}

Json to_json(const RoadNetwork& network) {
  Json junctions = Json::array();
  for (const auto& [id, j] : network.junctions()) {
    junctions.push_back({{"id", id}, {"x", j.x}, {"y", j.y}});
  }
  Json segments = Json::array();
  for (const auto& [id, s] : network.segments()) {
    segments.push_back({{"id", id}, {"a", s.a}, {"b", s.b}, {"length_m", s.length_m}});
  }
  return {{"junctions", junctions}, {"segments", segments}, {"rsus", network.rsus()}};
}

MapDataCatalog catalog_from_json(const Json& j) {
  require_object(j, "catalog");
  return parsing("catalog", [&] {
    MapDataCatalog c;
    c.set_default_static_size(get_or<Bytes>(j, "default_static_size", 0));
    c.set_default_dynamic_size(get_or<Bytes>(j, "default_dynamic_size", 0));
    const auto static_sizes = get_or(j, "static_sizes", Json::object());
    const auto dynamic_sizes = get_or(j, "dynamic_sizes", Json::object());
    const auto coded_sizes = get_or(j, "coded_sizes", Json::array());
    for (const auto& [seg, size] : static_sizes.items()) {
      c.set_static_size(seg, size.get<Bytes>());
    }
    for (const auto& [seg, size] : dynamic_sizes.items()) {
      c.set_dynamic_size(seg, size.get<Bytes>());
    }
    for (const auto& entry : coded_sizes) {
      auto components = entry.at("components").get<std::set<MapId>>();
      for (const auto& id : components) {
        if (!parse_map_id(id)) throw Error(ErrorCode::ParseError, "malformed map id " + id);
      }
      c.set_coded_size(std::move(components), entry.at("size").get<Bytes>());
    }
    return c;
  });
}

Json to_json(const MapDataCatalog& catalog) {
  Json coded = Json::array();
  for (const auto& [components, size] : catalog.coded_sizes()) {
    coded.push_back({{"components", components}, {"size", size}});
  }
  return {{"default_static_size", catalog.default_static_size()},
          {"default_dynamic_size", catalog.default_dynamic_size()},
          {"static_sizes", catalog.static_sizes()},
          {"dynamic_sizes", catalog.dynamic_sizes()},
          {"coded_sizes", coded}};
}

std::vector<TripPlan> plans_from_json(const Json& j, const RoadNetwork& network) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "plans must be a JSON array");
  return parsing("plans", [&] {
    std::vector<TripPlan> out;
    for (const auto& p : j) {
      out.push_back(make_plan(network, p.at("vehicle").get<std::string>(),
                              p.at("path").get<std::vector<JunctionId>>(),
                              p.at("junction_times").get<std::vector<Slot>>(),
                              get_or(p, "segment_times", std::vector<Slot>{})));
    }
    return out;
  });
}

Json to_json(std::span<const TripPlan> plans) {
  Json out = Json::array();
  for (const auto& p : plans) {
    out.push_back({{"vehicle", p.vehicle},
                   {"path", p.path},
                   {"junction_times", p.junction_times},
                   {"segment_times", p.segment_times}});
  }
  return out;
}

ScenarioConfig config_from_json(const Json& j) {
  require_object(j, "config");
  return parsing("config", [&] {
    ScenarioConfig c;
    if (j.contains("scheme")) {
      const auto name = j.at("scheme").get<std::string>();
      auto s = parse_scheme(name);
      if (!s) throw Error(ErrorCode::ParseError, "unknown scheme " + name);
      c.scheme = *s;
    }
    if (j.contains("rand_mode")) {
      const auto name = j.at("rand_mode").get<std::string>();
      auto m = parse_rand_mode(name);
      if (!m) throw Error(ErrorCode::ParseError, "unknown rand mode " + name);
      c.rand_mode = *m;
    }
    auto& s = c.scheduler;
    if (j.contains("capacity") && !j.at("capacity").is_null()) {
      s.capacity = j.at("capacity").get<Bytes>();
    }
    s.rsu_capacity = get_or(j, "rsu_capacity", s.rsu_capacity);
    s.tau = get_or(j, "tau", s.tau);
    s.prior_segments = get_or(j, "prior_segments", s.prior_segments);
    s.seed = get_or(j, "seed", s.seed);
    s.threads = get_or(j, "threads", s.threads);
    c.slot_seconds = get_or(j, "slot_seconds", c.slot_seconds);
    if (j.contains("delay")) {
      const auto& d = j.at("delay");
      c.delay.mtu = get_or(d, "mtu", c.delay.mtu);
      c.delay.data_rate = get_or(d, "data_rate", c.delay.data_rate);
      c.delay.processing_delay = get_or(d, "processing_delay", c.delay.processing_delay);
    }
    return c;
  });
}

Json to_json(const ScenarioConfig& config) {
  const auto& s = config.scheduler;
  return {{"scheme", to_string(config.scheme)},
          {"rand_mode", to_string(config.rand_mode)},
          {"capacity", s.capacity ? Json(*s.capacity) : Json(nullptr)},
          {"rsu_capacity", s.rsu_capacity},
          {"tau", s.tau},
          {"prior_segments", s.prior_segments},
          {"seed", s.seed},
          {"threads", s.threads},
          {"slot_seconds", config.slot_seconds},
          {"delay",
           {{"mtu", config.delay.mtu},
            {"data_rate", config.delay.data_rate},
            {"processing_delay", config.delay.processing_delay}}}};
}

Scenario scenario_from_json(const Json& j, const fs::path& base_dir) {
  require_object(j, "scenario");
  Scenario s;
  if (!j.contains("network")) throw Error(ErrorCode::ParseError, "scenario lacks a network");
  s.network = network_from_json(resolve(j.at("network"), base_dir));
  if (j.contains("catalog")) s.catalog = catalog_from_json(resolve(j.at("catalog"), base_dir));
  if (j.contains("config")) s.config = config_from_json(resolve(j.at("config"), base_dir));
  if (j.contains("plans")) {
    s.plans = plans_from_json(resolve(j.at("plans"), base_dir), s.network);
  } else if (j.contains("traces")) {
    const auto name = parsing("scenario", [&] { return j.at("traces").get<std::string>(); });
    std::ifstream in(base_dir / name);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + (base_dir / name).string());
    const auto samples = read_trace_csv(in);
    s.plans = plans_from_traces(s.network, samples, get_or(j, "snap_radius_m", 50.0));
  }
  return s;
}

Scenario load_scenario(const fs::path& path) {
  return scenario_from_json(load_json(path), path.parent_path());
}

// ---------------------------------------------------------------------------

DemandGraph demand_graph_from_json(const Json& j) {
  require_object(j, "demand graph");
  return parsing("demand graph", [&] {
    std::set<Demand> demands;
    for (const auto& e : j.at("demands")) {
      demands.insert({e.at(0).get<int>(), e.at(1).get<int>()});
    }
    auto g = DemandGraph::make(get_or<std::string>(j, "junction", ""), j.at("n").get<int>(),
                               std::move(demands), get_or(j, "prior", std::set<int>{}));
    g.segments = get_or(j, "segments", std::vector<SegmentId>{});
    g.items = get_or(j, "items", std::vector<MapId>{});
    return g;
  });
}

Json to_json(const DemandGraph& graph) {
  Json demands = Json::array();
  for (const auto& d : graph.demands) demands.push_back({d.from, d.to});
  Json out{{"junction", graph.junction},
           {"n", graph.n},
           {"demands", demands},
           {"prior", graph.prior_extra}};
  if (!graph.segments.empty()) out["segments"] = graph.segments;
  if (!graph.items.empty()) out["items"] = graph.items;
  return out;
}

IndexCodingScheme scheme_from_json(const Json& j) {
  require_object(j, "scheme");
  return parsing("scheme", [&] {
    IndexCodingScheme s;
    for (const auto& p : j.at("packets")) {
      const auto nodes = p.at("nodes").get<std::vector<int>>();
      if (nodes.size() == 1) {
        s.packets.insert(NodePacket::source(nodes[0]));
      } else if (nodes.size() == 2) {
        s.packets.insert(NodePacket::coded(nodes[0], nodes[1]));
      } else {
        throw Error(ErrorCode::ParseError, "packets carry one or two nodes");
      }
    }
    return s;
  });
}

Json scheme_to_json(const IndexCodingScheme& scheme, const DemandGraph& graph) {
  Json packets = Json::array();
  for (const auto& p : scheme.packets) {
    Json nodes = p.is_source() ? Json::array({p.lo()}) : Json::array({p.lo(), p.hi()});
    Json items = p.is_source() ? Json::array({graph.item(p.lo())})
                               : Json::array({graph.item(p.lo()), graph.item(p.hi())});
    packets.push_back({{"nodes", nodes}, {"label", p.label()}, {"items", items}});
  }
  return {{"junction", graph.junction},
          {"n", graph.n},
          {"size", scheme.size()},
          {"coded", scheme.coded_count()},
          {"packets", packets}};
}

// ---------------------------------------------------------------------------

namespace {

Json totals_json(const MetricTotals& t) {
  return {{"broadcast_transmissions", t.broadcast_transmissions},
          {"coded_transmissions", t.coded_transmissions},
          {"broadcast_bytes", t.broadcast_bytes},
          {"cellular_transmissions", t.cellular_transmissions},
          {"cellular_bytes", t.cellular_bytes},
          {"satisfied_vehicles", t.satisfied_vehicles},
          {"overall_delay_seconds", t.overall_delay_seconds}};
}

template <class T>
void read_counters(const Json& j, T& t) {
  t.broadcast_transmissions = j.at("broadcast_transmissions").get<std::uint64_t>();
  t.coded_transmissions = j.at("coded_transmissions").get<std::uint64_t>();
  t.broadcast_bytes = j.at("broadcast_bytes").get<Bytes>();
  t.cellular_transmissions = j.at("cellular_transmissions").get<std::uint64_t>();
  t.cellular_bytes = j.at("cellular_bytes").get<Bytes>();
  t.satisfied_vehicles = j.at("satisfied_vehicles").get<std::uint64_t>();
  t.overall_delay_seconds = j.at("overall_delay_seconds").get<double>();
}

}  // namespace

Json to_json(const Metrics& m) {
  Json records = Json::array();
  for (const auto& r : m.records) {
    MetricTotals t{r.broadcast_transmissions, r.coded_transmissions, r.broadcast_bytes,
                   r.cellular_transmissions,  r.cellular_bytes,      r.satisfied_vehicles,
                   r.overall_delay_seconds};
    Json row = totals_json(t);
    row["slot"] = r.slot;
    row["rsu"] = r.rsu;
    records.push_back(std::move(row));
  }
  Json histogram = Json::array();
  for (const auto& [d, n] : m.predownload_histogram) {
    histogram.push_back({{"distance", d}, {"count", n}});
  }
  return {{"scheme", m.scheme},
          {"records", records},
          {"totals", totals_json(m.totals)},
          {"requirements",
           {{"static", m.static_requirements},
            {"dynamic", m.dynamic_requirements},
            {"broadcast", m.met_by_broadcast},
            {"cellular", m.met_by_cellular},
            {"prior", m.met_by_prior}}},
          {"predownload_histogram", histogram},
          {"slots", m.slots},
          {"active_slots", m.active_slots},
          {"slot_seconds", m.slot_seconds},
          {"averages",
           {{"broadcast_bytes_per_slot", m.broadcast_bytes_per_slot},
            {"broadcast_bytes_per_active_slot", m.broadcast_bytes_per_active_slot},
            {"transmissions_per_slot", m.transmissions_per_slot},
            {"transmissions_per_active_slot", m.transmissions_per_active_slot}}}};
}

Metrics metrics_from_json(const Json& j) {
  require_object(j, "metrics");
  return parsing("metrics", [&] {
    Metrics m;
    m.scheme = j.at("scheme").get<std::string>();
    for (const auto& row : j.at("records")) {
      SlotMetrics r;
      read_counters(row, r);
      r.slot = row.at("slot").get<Slot>();
      r.rsu = row.at("rsu").get<std::string>();
      m.records.push_back(std::move(r));
    }
    read_counters(j.at("totals"), m.totals);
    const auto& q = j.at("requirements");
    m.static_requirements = q.at("static").get<std::uint64_t>();
    m.dynamic_requirements = q.at("dynamic").get<std::uint64_t>();
    m.met_by_broadcast = q.at("broadcast").get<std::uint64_t>();
    m.met_by_cellular = q.at("cellular").get<std::uint64_t>();
    m.met_by_prior = q.at("prior").get<std::uint64_t>();
    for (const auto& h : j.at("predownload_histogram")) {
      m.predownload_histogram[h.at("distance").get<int>()] = h.at("count").get<std::uint64_t>();
    }
    m.slots = j.at("slots").get<std::uint64_t>();
    m.active_slots = j.at("active_slots").get<std::uint64_t>();
    m.slot_seconds = j.at("slot_seconds").get<double>();
    const auto& a = j.at("averages");
    m.broadcast_bytes_per_slot = a.at("broadcast_bytes_per_slot").get<double>();
    m.broadcast_bytes_per_active_slot = a.at("broadcast_bytes_per_active_slot").get<double>();
    m.transmissions_per_slot = a.at("transmissions_per_slot").get<double>();
    m.transmissions_per_active_slot = a.at("transmissions_per_active_slot").get<double>();
    return m;
  });
}

// ---------------------------------------------------------------------------

DecisionSummary summarize(const ScheduleResult& result) {
  DecisionSummary s;
  s.policy = std::string(to_string(result.policy));
  s.decision = result.decision;
  s.broadcast_packets = result.broadcasts.size();
  s.broadcast_bytes = result.broadcast_bytes();
  s.cellular_packets = result.cellular.size();
  s.cellular_bytes = result.cellular_bytes();
  s.advance = result.advance;
  return s;
}

Json to_json(const DecisionSummary& s) {
  Json advance = Json::array();
  for (const auto& a : s.advance) {
    advance.push_back({{"rsu", a.rsu},
                       {"slot", a.slot},
                       {"segment", a.segment},
                       {"vehicles", a.vehicles},
                       {"distance", a.distance}});
  }
  return {{"policy", s.policy},
          {"broadcast_static", key_list(s.decision.broadcast_static)},
          {"broadcast_dynamic", key_list(s.decision.broadcast_dynamic)},
          {"cellular_static", key_list(s.decision.cellular_static)},
          {"cellular_dynamic", key_list(s.decision.cellular_dynamic)},
          {"broadcast_packets", s.broadcast_packets},
          {"broadcast_bytes", s.broadcast_bytes},
          {"cellular_packets", s.cellular_packets},
          {"cellular_bytes", s.cellular_bytes},
          {"advance", advance}};
}

DecisionSummary summary_from_json(const Json& j) {
  require_object(j, "decision summary");
  return parsing("decision summary", [&] {
    DecisionSummary s;
    s.policy = j.at("policy").get<std::string>();
    s.decision.broadcast_static = key_set<ScheduleDecision::BroadcastKey>(j.at("broadcast_static"));
    s.decision.broadcast_dynamic =
        key_set<ScheduleDecision::BroadcastKey>(j.at("broadcast_dynamic"));
    s.decision.cellular_static = key_set<ScheduleDecision::CellularKey>(j.at("cellular_static"));
    s.decision.cellular_dynamic = key_set<ScheduleDecision::CellularKey>(j.at("cellular_dynamic"));
    s.broadcast_packets = j.at("broadcast_packets").get<std::uint64_t>();
    s.broadcast_bytes = j.at("broadcast_bytes").get<Bytes>();
    s.cellular_packets = j.at("cellular_packets").get<std::uint64_t>();
    s.cellular_bytes = j.at("cellular_bytes").get<Bytes>();
    for (const auto& a : j.at("advance")) {
      s.advance.push_back({a.at("rsu").get<std::string>(), a.at("slot").get<Slot>(),
                           a.at("segment").get<std::string>(),
                           a.at("vehicles").get<std::set<VehicleId>>(),
                           a.at("distance").get<int>()});
    }
    return s;
  });
}

// ---------------------------------------------------------------------------

std::vector<TraceSample> read_trace_csv(std::istream& in) {
  std::vector<TraceSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (lineno == 1 && !f.empty() && f[0] == "vehicle_id") continue;
    if (f.size() < 4 || f.size() > 6) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) +
                                             ": expected 4 to 6 fields");
    }
    TraceSample s;
    try {
      s.vehicle = f[0];
      std::size_t used = 0;
      s.slot = std::stoll(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument(f[1]);
      s.x = std::stod(f[2]);
      s.y = std::stod(f[3]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) +
                                             ": malformed number");
    }
    if (s.vehicle.empty()) {
      throw Error(ErrorCode::ParseError, "trace line " + std::to_string(lineno) +
                                             ": empty vehicle id");
    }
    if (f.size() > 4) s.junction = f[4];
    if (f.size() > 5) s.segment = f[5];
    out.push_back(std::move(s));
  }
  return out;
}

void write_trace_csv(std::ostream& out, std::span<const TraceSample> samples) {
  out << "vehicle_id,slot,x,y,junction_id,segment_id\n";
  out.precision(17);
  for (const auto& s : samples) {
    out << s.vehicle << ',' << s.slot << ',' << s.x << ',' << s.y << ',' << s.junction << ','
        << s.segment << '\n';
  }
}

void write_metrics_csv(std::ostream& out, const Metrics& metrics) {
  out << "slot,rsu,metric,value\n";
  out.precision(17);
  for (const auto& r : metrics.records) {
    const auto row = [&](const char* name, auto value) {
      out << r.slot << ',' << r.rsu << ',' << name << ',' << value << '\n';
    };
    row("broadcast_transmissions", r.broadcast_transmissions);
    row("coded_transmissions", r.coded_transmissions);
    row("broadcast_bytes", r.broadcast_bytes);
    row("cellular_transmissions", r.cellular_transmissions);
    row("cellular_bytes", r.cellular_bytes);
    row("satisfied_vehicles", r.satisfied_vehicles);
    row("overall_delay_seconds", r.overall_delay_seconds);
  }
}

void write_matrix_csv(std::ostream& out, const MeetingMatrix& matrix) {
  for (std::size_t i = 0; i < matrix.dimension(); ++i) {
    for (std::size_t k = 0; k < matrix.dimension(); ++k) {
      if (k) out << ',';
      out << matrix.at(i, k);
    }
    out << '\n';
  }
}

}  // namespace fogcast
