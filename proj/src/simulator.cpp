#include "fogcast/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

namespace fogcast {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

std::string padded(std::size_t value, std::size_t width) {
  auto s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

// Shortest-path tree from one junction over fixed segment weights. Ties break
// towards the smaller junction id so the result is deterministic.
std::map<JunctionId, JunctionId> shortest_tree(const RoadNetwork& network,
                                               const std::map<SegmentId, double>& weight,
                                               const JunctionId& origin) {
  using Item = std::pair<double, JunctionId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::map<JunctionId, double> dist{{origin, 0.0}};
  std::map<JunctionId, JunctionId> parent;
  std::set<JunctionId> done;
  queue.push({0.0, origin});
  while (!queue.empty()) {
    auto [d, j] = queue.top();
    queue.pop();
    if (!done.insert(j).second) continue;
    for (const auto& seg : network.incident(j)) {
      const auto& next = network.other_end(seg, j);
      const double nd = d + weight.at(seg);
      auto it = dist.find(next);
      if (it == dist.end() || nd < it->second) {
        dist[next] = nd;
        parent[next] = j;
        queue.push({nd, next});
      }
    }
  }
  return parent;
}

std::vector<JunctionId> tree_path(const std::map<JunctionId, JunctionId>& parent,
                                  const JunctionId& origin, const JunctionId& dest) {
  std::vector<JunctionId> path{dest};
  while (path.back() != origin) path.push_back(parent.at(path.back()));
  std::reverse(path.begin(), path.end());
  return path;
}

// Neighbour reached by keeping the current heading, if any.
std::optional<JunctionId> straight_on(const RoadNetwork& network, const JunctionId& prev,
                                      const JunctionId& cur) {
  const auto& a = network.junction(prev);
  const auto& b = network.junction(cur);
  const double hx = b.x - a.x;
  const double hy = b.y - a.y;
  for (const auto& seg : network.incident(cur)) {
    const auto& next = network.other_end(seg, cur);
    const auto& c = network.junction(next);
    const double cx = c.x - b.x;
    const double cy = c.y - b.y;
    const double cross = hx * cy - hy * cx;
    const double dot = hx * cx + hy * cy;
    if (std::abs(cross) < 1e-9 && dot > 0) return next;
  }
  return std::nullopt;
}

std::vector<JunctionId> random_turn_path(const RoadNetwork& network,
                                         const std::vector<JunctionId>& junctions,
                                         const TraceConfig& config, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick_start(0, junctions.size() - 1);
  std::uniform_int_distribution<int> pick_len(config.min_hops,
                                              std::max(config.min_hops, config.max_hops));
  std::bernoulli_distribution keep_straight(config.straight_probability);

  std::vector<JunctionId> path{junctions[pick_start(rng)]};
  const int hops = pick_len(rng);
  std::set<JunctionId> seen{path.front()};
  while (static_cast<int>(path.size()) <= hops) {
    const auto& cur = path.back();
    std::vector<JunctionId> options;
    for (const auto& seg : network.incident(cur)) {
      const auto& next = network.other_end(seg, cur);
      if (!seen.contains(next)) options.push_back(next);
    }
    if (options.empty()) break;
    std::optional<JunctionId> next;
    if (path.size() >= 2) {
      auto ahead = straight_on(network, path[path.size() - 2], cur);
      if (ahead && !seen.contains(*ahead) && keep_straight(rng)) next = ahead;
    }
    if (!next) {
      std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
      next = options[pick(rng)];
    }
    seen.insert(*next);
    path.push_back(*next);
  }
  return path;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::Rand: return "Rand";
    case Scheme::OneJIdxCd: return "1J-IdxCd";
    case Scheme::OneJIdxCdPI: return "1J-IdxCd-PI";
    case Scheme::OnDemand: return "OnDemand";
    case Scheme::OnlSchd: return "ONLSchd";
    case Scheme::OflSchd: return "OFLSchd";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (auto s : {Scheme::Rand, Scheme::OneJIdxCd, Scheme::OneJIdxCdPI, Scheme::OnDemand,
                 Scheme::OnlSchd, Scheme::OflSchd}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view to_string(RandMode mode) {
  return mode == RandMode::Junction ? "junction" : "trip";
}

std::optional<RandMode> parse_rand_mode(std::string_view name) {
  if (name == "junction") return RandMode::Junction;
  if (name == "trip") return RandMode::Trip;
  return std::nullopt;
}

double overall_delay(std::span<const Packet> transmissions, double processing_delay,
                     Bytes mtu, double data_rate) {
  if (mtu == 0 || !(data_rate > 0)) {
    throw Error(ErrorCode::ScenarioInvalid, "delay model needs a positive mtu and data rate");
  }
  Bytes total = 0;
  std::size_t coded = 0;
  for (const auto& p : transmissions) {
    total += p.size();
    coded += !p.is_source();
  }
  const Bytes frames = (total + mtu - 1) / mtu;
  const double frame_seconds = static_cast<double>(mtu) * 8.0 / data_rate;
  return static_cast<double>(frames) * frame_seconds +
         processing_delay * static_cast<double>(coded);
}

double overall_delay(std::span<const Packet> transmissions, const DelayModel& model) {
  return overall_delay(transmissions, model.processing_delay, model.mtu, model.data_rate);
}

// ---------------------------------------------------------------------------

ScenarioError::ScenarioError(std::vector<std::string> diagnostics)
    : Error(ErrorCode::ScenarioInvalid, join(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

std::vector<std::string> Scenario::diagnostics() const {
  std::vector<std::string> out;
  std::set<VehicleId> vehicles;
  for (const auto& plan : plans) {
    if (!vehicles.insert(plan.vehicle).second) {
      out.push_back("duplicate vehicle " + plan.vehicle);
    }
    try {
      validate_plan(plan, network);
    } catch (const Error& e) {
      out.push_back(e.what());
      continue;
    }
    for (const auto& seg : plan.segments) {
      if (!catalog.has_static_size(seg)) out.push_back("no static size for segment " + seg);
    }
  }
  for (const auto& [components, size] : catalog.coded_sizes()) {
    if (size == 0) out.push_back("coded size entry is zero");
    for (const auto& c : components) {
      if (!parse_map_id(c)) out.push_back("coded size entry has malformed id " + c);
    }
  }
  for (const auto& seg : config.scheduler.prior_segments) {
    if (!network.has_segment(seg)) out.push_back("prior segment " + seg + " is unknown");
  }
  for (const auto& [rsu, cap] : config.scheduler.rsu_capacity) {
    if (!network.is_rsu(rsu)) out.push_back("capacity given for non-RSU junction " + rsu);
  }
  if (config.scheduler.tau < 0) out.push_back("tau is negative");
  if (config.scheduler.threads < 1) out.push_back("threads must be at least 1");
  if (!(config.slot_seconds > 0)) out.push_back("slot length must be positive");
  if (config.delay.mtu == 0) out.push_back("mtu must be positive");
  if (!(config.delay.data_rate > 0)) out.push_back("data rate must be positive");
  if (config.delay.processing_delay < 0) out.push_back("processing delay is negative");
  return out;
}

void Scenario::validate() const {
  auto diags = diagnostics();
  if (!diags.empty()) throw ScenarioError(std::move(diags));
}

BroadcastPolicy policy_of(const ScenarioConfig& config) {
  switch (config.scheme) {
    case Scheme::Rand:
      return config.rand_mode == RandMode::Trip ? BroadcastPolicy::RandTrip
                                                : BroadcastPolicy::RandJunction;
    case Scheme::OneJIdxCd:
    case Scheme::OneJIdxCdPI: return BroadcastPolicy::IndexCoded;
    case Scheme::OnDemand: return BroadcastPolicy::OnDemand;
    case Scheme::OnlSchd: return BroadcastPolicy::Online;
    case Scheme::OflSchd: return BroadcastPolicy::Offline;
  }
  return BroadcastPolicy::IndexCoded;
}

SchedulerConfig scheduler_config_of(const ScenarioConfig& config) {
  SchedulerConfig out = config.scheduler;
  if (config.scheme != Scheme::OneJIdxCdPI) out.prior_segments.clear();
  return out;
}

std::map<int, std::uint64_t> predownload_distance_histogram(
    std::span<const AdvanceRecord> advance, const RoadNetwork& network) {
  std::map<int, std::uint64_t> out;
  std::map<JunctionId, std::map<JunctionId, int>> hops;
  for (const auto& rec : advance) {
    auto it = hops.find(rec.rsu);
    if (it == hops.end()) it = hops.emplace(rec.rsu, network.hop_distances(rec.rsu)).first;
    const auto& seg = network.segment(rec.segment);
    int best = std::numeric_limits<int>::max();
    for (const auto& end : {seg.a, seg.b}) {
      if (auto d = it->second.find(end); d != it->second.end()) best = std::min(best, d->second);
    }
    if (best != std::numeric_limits<int>::max()) ++out[best];
  }
  return out;
}

Metrics metrics_from(const ScheduleResult& result, const Scenario& scenario) {
  Metrics m;
  m.scheme = std::string(to_string(scenario.config.scheme));
  m.slot_seconds = scenario.config.slot_seconds;

  std::map<std::pair<Slot, JunctionId>, std::vector<Packet>> sent;
  for (const auto& b : result.broadcasts) sent[{b.slot, b.rsu}].push_back(b.packet);

  for (const auto& [key, st] : result.stats) {
    SlotMetrics r;
    r.slot = key.first;
    r.rsu = key.second;
    r.broadcast_transmissions = st.broadcast_packets;
    r.coded_transmissions = st.coded_packets;
    r.broadcast_bytes = st.broadcast_bytes;
    r.cellular_transmissions = st.cellular_count;
    r.cellular_bytes = st.cellular_bytes;
    r.satisfied_vehicles = st.satisfied_vehicles;
    if (auto it = sent.find(key); it != sent.end()) {
      r.overall_delay_seconds = overall_delay(it->second, scenario.config.delay);
    }
    m.totals.broadcast_transmissions += r.broadcast_transmissions;
    m.totals.coded_transmissions += r.coded_transmissions;
    m.totals.broadcast_bytes += r.broadcast_bytes;
    m.totals.cellular_transmissions += r.cellular_transmissions;
    m.totals.cellular_bytes += r.cellular_bytes;
    m.totals.satisfied_vehicles += r.satisfied_vehicles;
    m.totals.overall_delay_seconds += r.overall_delay_seconds;
    m.records.push_back(std::move(r));
  }

  for (const auto& q : result.requirements) {
    (q.kind == ItemKind::Static ? m.static_requirements : m.dynamic_requirements) += 1;
    switch (q.channel) {
      case Channel::Broadcast: ++m.met_by_broadcast; break;
      case Channel::Cellular: ++m.met_by_cellular; break;
      case Channel::Prior: ++m.met_by_prior; break;
    }
  }

  m.predownload_histogram = predownload_distance_histogram(result.advance, scenario.network);

  if (!scenario.plans.empty()) {
    Slot first = std::numeric_limits<Slot>::max();
    Slot last = std::numeric_limits<Slot>::min();
    for (const auto& p : scenario.plans) {
      first = std::min(first, p.start_time());
      last = std::max(last, p.end_time());
    }
    m.slots = static_cast<std::uint64_t>(last - first + 1);
  }
  std::set<Slot> active;
  for (const auto& b : result.broadcasts) active.insert(b.slot);
  m.active_slots = active.size();

  const auto per = [](double total, std::uint64_t n) {
    return n == 0 ? 0.0 : total / static_cast<double>(n);
  };
  const auto bytes = static_cast<double>(m.totals.broadcast_bytes);
  const auto count = static_cast<double>(m.totals.broadcast_transmissions);
  m.broadcast_bytes_per_slot = per(bytes, m.slots);
  m.broadcast_bytes_per_active_slot = per(bytes, m.active_slots);
  m.transmissions_per_slot = per(count, m.slots);
  m.transmissions_per_active_slot = per(count, m.active_slots);
  return m;
}

Metrics run(const Scenario& scenario) {
  scenario.validate();
  const auto result = run_schedule(scenario.network, scenario.catalog, scenario.plans,
                                   scheduler_config_of(scenario.config),
                                   policy_of(scenario.config));
  return metrics_from(result, scenario);
}

// ---------------------------------------------------------------------------

RoadNetwork grid_network(int width, int height, double block_m, double rsu_fraction,
                         std::uint64_t seed) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidNetwork, "grid needs positive dimensions");
  }
  const auto name = [](int x, int y) {
    return "J" + std::to_string(x) + "_" + std::to_string(y);
  };
  std::vector<Junction> junctions;
  std::vector<Segment> segments;
  const auto link = [&](const JunctionId& a, const JunctionId& b) {
    const auto& lo = std::min(a, b);
    const auto& hi = std::max(a, b);
    segments.push_back({lo + "-" + hi, lo, hi, block_m});
  };
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) {
      junctions.push_back({name(x, y), x * block_m, y * block_m});
      if (x + 1 < width) link(name(x, y), name(x + 1, y));
      if (y + 1 < height) link(name(x, y), name(x, y + 1));
    }
  }
  std::vector<JunctionId> ids;
  for (const auto& j : junctions) ids.push_back(j.id);
  std::sort(ids.begin(), ids.end());
  std::set<JunctionId> rsus;
  if (rsu_fraction >= 1.0) {
    rsus.insert(ids.begin(), ids.end());
  } else if (rsu_fraction > 0.0) {
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto count = static_cast<std::size_t>(std::lround(rsu_fraction * ids.size()));
    rsus.insert(ids.begin(), ids.begin() + std::min(count, ids.size()));
  }
  return RoadNetwork(std::move(junctions), std::move(segments), std::move(rsus));
}

SyntheticTraces synthesize_traces(const RoadNetwork& network, const TraceConfig& config) {
  SyntheticTraces out;
  if (config.vehicles <= 0) return out;
  if (network.junctions().size() < 2 || !network.connected()) {
    throw Error(ErrorCode::DisconnectedNetwork, "trace synthesis needs a connected network");
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::map<SegmentId, double> weight;
  for (const auto& [id, seg] : network.segments()) {
    weight[id] = seg.length_m * (1.0 + 0.05 * jitter(rng));
  }

  std::vector<JunctionId> junctions;
  for (const auto& [id, j] : network.junctions()) junctions.push_back(id);
  std::uniform_int_distribution<std::size_t> pick(0, junctions.size() - 1);

  std::map<JunctionId, std::map<JunctionId, JunctionId>> trees;
  std::set<std::pair<JunctionId, JunctionId>> used_od;
  const std::size_t width = std::to_string(config.vehicles - 1).size();

  for (int k = 0; k < config.vehicles; ++k) {
    std::vector<JunctionId> path;
    if (config.mobility == Mobility::ShortestPath) {
      JunctionId o;
      JunctionId d;
      for (int attempt = 0; attempt < 100; ++attempt) {
        o = junctions[pick(rng)];
        do d = junctions[pick(rng)];
        while (d == o);
        if (!used_od.contains({o, d})) break;
      }
      used_od.insert({o, d});
      auto it = trees.find(o);
      if (it == trees.end()) it = trees.emplace(o, shortest_tree(network, weight, o)).first;
      path = tree_path(it->second, o, d);
    } else {
      do path = random_turn_path(network, junctions, config, rng);
      while (path.size() < 2);
    }

    const Slot hops = static_cast<Slot>(path.size()) - 1;
    std::uniform_int_distribution<Slot> pick_start(0, std::max<Slot>(0, config.horizon - hops));
    const Slot start = pick_start(rng);
    std::vector<Slot> times;
    for (Slot i = 0; i <= hops; ++i) times.push_back(start + i);

    auto plan = make_plan(network, "v" + padded(k, width), path, times);
    for (std::size_t i = 0; i < plan.path.size(); ++i) {
      const auto& j = network.junction(plan.path[i]);
      const auto& seg = i < plan.segments.size() ? plan.segments[i] : plan.segments.back();
      out.samples.push_back({plan.vehicle, plan.junction_times[i], j.x, j.y, j.id, seg});
    }
    out.plans.push_back(std::move(plan));
  }
  return out;
}

std::vector<TripPlan> plans_from_traces(const RoadNetwork& network,
                                        std::span<const TraceSample> samples,
                                        double snap_radius_m) {
  std::map<VehicleId, std::vector<const TraceSample*>> by_vehicle;
  for (const auto& s : samples) by_vehicle[s.vehicle].push_back(&s);

  const auto snap = [&](const TraceSample& s) -> std::optional<JunctionId> {
    if (!s.junction.empty()) {
      if (!network.has_junction(s.junction)) {
        throw Error(ErrorCode::InvalidPlan, "trace names unknown junction " + s.junction);
      }
      return s.junction;
    }
    std::optional<JunctionId> best;
    double best_d = snap_radius_m;
    for (const auto& [id, j] : network.junctions()) {
      const double d = std::hypot(j.x - s.x, j.y - s.y);
      if (d <= best_d) {
        best_d = d;
        best = id;
      }
    }
    return best;
  };

  std::vector<TripPlan> out;
  for (auto& [vehicle, rows] : by_vehicle) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto* a, const auto* b) { return a->slot < b->slot; });
    std::vector<JunctionId> path;
    std::vector<Slot> entered;
    std::vector<Slot> left;
    for (const auto* s : rows) {
      auto j = snap(*s);
      if (!j) continue;
      if (!path.empty() && path.back() == *j) {
        left.back() = s->slot;
        continue;
      }
      path.push_back(*j);
      entered.push_back(s->slot);
      left.push_back(s->slot);
    }
    if (path.size() < 2) continue;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (!network.segment_between(path[i], path[i + 1])) {
        throw Error(ErrorCode::InvalidPlan, "trace of " + vehicle + " jumps from " + path[i] +
                                                " to " + path[i + 1]);
      }
    }
    left.pop_back();
    out.push_back(make_plan(network, vehicle, path, entered, left));
  }
  return out;
}

}  // namespace fogcast
