#include "fogcast/scheduler.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <random>

#include "fogcast/baselines.hpp"

namespace fogcast {

namespace {

constexpr int kExhaustiveNodes = 12;

using Key = std::pair<Slot, JunctionId>;

Bytes total_size(const std::vector<Packet>& packets) {
  Bytes sum = 0;
  for (const auto& p : packets) sum += p.size();
  return sum;
}

std::vector<Packet> materialize(const std::vector<NodePacket>& nodes, const DemandGraph& g,
                                const MapDataCatalog* catalog) {
  std::vector<Packet> out;
  for (const auto& p : nodes) {
    std::set<MapId> comps{g.item(p.lo()), g.item(p.hi())};
    out.push_back(catalog ? catalog->make_packet(std::move(comps))
                          : Packet::of(std::move(comps), 1));
  }
  return out;
}

// Every (vehicle, demand) pair of a graph; anonymous demands get a synthetic
// vehicle name so W still counts them.
std::map<VehicleId, std::vector<Demand>> listeners_of(const DemandGraph& d) {
  std::map<VehicleId, std::vector<Demand>> out;
  for (const auto& dem : d.demands) {
    auto it = d.listeners.find(dem);
    if (it == d.listeners.end() || it->second.empty()) {
      out["#" + std::to_string(dem.from) + ">" + std::to_string(dem.to)].push_back(dem);
    } else {
      for (const auto& v : it->second) out[v].push_back(dem);
    }
  }
  return out;
}

std::set<MapId> assumed_knowledge(const DemandGraph& d, const std::vector<Demand>& demands) {
  std::set<MapId> k;
  for (int p : d.prior_extra) k.insert(d.item(p));
  for (const auto& dem : demands) k.insert(d.item(dem.from));
  return k;
}

struct Evaluation {
  IndexCodingScheme scheme;
  DemandGraph graph;
  std::vector<Packet> packets;
  Bytes bytes = 0;
  std::set<VehicleId> served;
};

Evaluation evaluate(const DemandGraph& d, const std::set<int>& nodes,
                    const MapDataCatalog* catalog, const KnowledgeView* knowledge,
                    const std::map<VehicleId, std::vector<Demand>>& who) {
  Evaluation e;
  e.graph = d.induced(nodes);
  e.scheme = substitute_sources(one_j_idxcd(e.graph), e.graph);
  e.packets = to_packets(e.scheme, e.graph, catalog);
  e.bytes = catalog ? total_size(e.packets) : e.packets.size();
  for (const auto& [v, demands] : who) {
    std::set<MapId> prior;
    const auto kit = knowledge ? knowledge->find(v) : KnowledgeView::const_iterator{};
    if (knowledge && kit != knowledge->end()) {
      prior = kit->second;
    } else {
      prior = assumed_knowledge(d, demands);
    }
    const auto decoded = decode_closure(prior, e.packets);
    if (std::all_of(demands.begin(), demands.end(),
                    [&](const Demand& dem) { return decoded.contains(d.item(dem.to)); })) {
      e.served.insert(v);
    }
  }
  return e;
}

bool better(const Evaluation& a, const std::set<int>& an, const Evaluation& b,
            const std::set<int>& bn) {
  if (a.served.size() != b.served.size()) return a.served.size() > b.served.size();
  if (a.bytes != b.bytes) return a.bytes < b.bytes;
  return std::lexicographical_compare(an.begin(), an.end(), bn.begin(), bn.end());
}

bool fits(Bytes bytes, std::optional<Bytes> budget) { return !budget || bytes <= *budget; }

}  // namespace

std::string_view to_string(BroadcastPolicy policy) {
  switch (policy) {
    case BroadcastPolicy::RandJunction: return "rand-junction";
    case BroadcastPolicy::RandTrip: return "rand-trip";
    case BroadcastPolicy::IndexCoded: return "index-coded";
    case BroadcastPolicy::OnDemand: return "on-demand";
    case BroadcastPolicy::Online: return "online";
    case BroadcastPolicy::Offline: return "offline";
  }
  return "unknown";
}

std::string_view to_string(PacketTag tag) {
  switch (tag) {
    case PacketTag::Static: return "static";
    case PacketTag::Dynamic: return "dynamic";
    case PacketTag::Advance: return "advance";
  }
  return "unknown";
}

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::Broadcast: return "broadcast";
    case Channel::Cellular: return "cellular";
    case Channel::Prior: return "prior";
  }
  return "unknown";
}

std::optional<Bytes> SchedulerConfig::capacity_of(const JunctionId& rsu) const {
  if (auto it = rsu_capacity.find(rsu); it != rsu_capacity.end()) return it->second;
  return capacity;
}

Bytes ScheduleResult::cellular_bytes() const {
  Bytes sum = 0;
  for (const auto& c : cellular) sum += c.bytes;
  return sum;
}

Bytes ScheduleResult::broadcast_bytes() const {
  Bytes sum = 0;
  for (const auto& b : broadcasts) sum += b.packet.size();
  return sum;
}

SubgraphChoice best_subgraph(const DemandGraph& d, std::optional<Bytes> budget,
                             const MapDataCatalog* catalog, const KnowledgeView* knowledge) {
  const auto who = listeners_of(d);
  const std::set<int> all = d.nodes();
  const std::vector<int> nodes(all.begin(), all.end());

  std::set<int> best_nodes;
  Evaluation best = evaluate(d, {}, catalog, knowledge, who);

  if (nodes.size() <= kExhaustiveNodes) {
    const std::uint32_t limit = 1U << nodes.size();
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
      std::set<int> pick;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (mask >> i & 1U) pick.insert(nodes[i]);
      }
      Evaluation e = evaluate(d, pick, catalog, knowledge, who);
      if (fits(e.bytes, budget) && better(e, pick, best, best_nodes)) {
        best = std::move(e);
        best_nodes = std::move(pick);
      }
    }
  } else {
    // Drop the node whose removal keeps the most vehicles until it fits.
    std::set<int> current = all;
    Evaluation e = evaluate(d, current, catalog, knowledge, who);
    while (!fits(e.bytes, budget) && !current.empty()) {
      std::optional<std::pair<int, Evaluation>> step;
      for (int k : current) {
        auto trial = current;
        trial.erase(k);
        Evaluation t = evaluate(d, trial, catalog, knowledge, who);
        if (!step || t.served.size() > step->second.served.size() ||
            (t.served.size() == step->second.served.size() && t.bytes < step->second.bytes)) {
          step.emplace(k, std::move(t));
        }
      }
      current.erase(step->first);
      e = std::move(step->second);
    }
    if (fits(e.bytes, budget) && better(e, current, best, best_nodes)) {
      best = std::move(e);
      best_nodes = current;
    }
  }

  SubgraphChoice out;
  out.nodes = std::move(best_nodes);
  out.graph = std::move(best.graph);
  out.scheme = std::move(best.scheme);
  out.packets = std::move(best.packets);
  out.bytes = best.bytes;
  out.served = std::move(best.served);
  out.satisfied = out.served.size();
  out.graph.junction = d.junction;
  return out;
}

RsuPlan onl_schd(const DemandGraph& static_graph, const DemandGraph& dynamic_graph,
                 std::optional<Bytes> capacity, const MapDataCatalog& catalog,
                 const KnowledgeView& knowledge) {
  RsuPlan plan;
  plan.static_choice = best_subgraph(static_graph, capacity, &catalog, &knowledge);
  plan.static_packets = plan.static_choice.packets;
  plan.used = plan.static_choice.bytes;
  std::optional<Bytes> left;
  if (capacity) left = *capacity - plan.used;
  plan.dynamic_choice = best_subgraph(dynamic_graph, left, &catalog, &knowledge);
  plan.dynamic_packets = plan.dynamic_choice.packets;
  plan.used += plan.dynamic_choice.bytes;

  std::vector<Packet> all = plan.static_packets;
  all.insert(all.end(), plan.dynamic_packets.begin(), plan.dynamic_packets.end());
  auto collect = [&](const DemandGraph& g, auto& sink) {
    for (const auto& [v, demands] : listeners_of(g)) {
      std::set<MapId> prior;
      if (auto it = knowledge.find(v); it != knowledge.end()) {
        prior = it->second;
      } else {
        prior = assumed_knowledge(g, demands);
      }
      const auto decoded = decode_closure(prior, all);
      for (const auto& dem : demands) {
        if (!decoded.contains(g.item(dem.to))) sink.emplace_back(v, g.item(dem.to));
      }
    }
  };
  collect(static_graph, plan.unserved_static);
  collect(dynamic_graph, plan.unserved_dynamic);
  return plan;
}

MapDataCatalog with_generated_items(const MapDataCatalog& catalog,
                                    std::span<const TripPlan> plans) {
  MapDataCatalog out = catalog;
  for (const auto& p : plans) {
    for (std::size_t i = 1; i < p.path.size(); ++i) {
      const auto& seg = p.segments[i - 1];
      if (out.dynamic_enabled(seg)) out.add_dynamic_item(seg, p.junction_times[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slot engine

namespace {

struct Visit {
  std::size_t plan;
  std::size_t index;
};

struct Pending {
  std::size_t plan;
  std::size_t requirement;
  MapId item;
  SegmentId segment;
  ItemKind kind;
  Slot deadline;
  Slot origin;
  JunctionId junction;
  bool resolved = false;
};

struct StepOutput {
  JunctionId rsu;
  std::vector<std::pair<Packet, PacketTag>> packets;
  // (plan, item kind, item) demanded at this step.
  std::vector<std::tuple<std::size_t, ItemKind, MapId>> demands;
};

class Engine {
 public:
  Engine(const RoadNetwork& network, const MapDataCatalog& catalog,
         std::span<const TripPlan> plans, const SchedulerConfig& config,
         BroadcastPolicy policy)
      : network_(network),
        catalog_(with_generated_items(catalog, plans)),
        plans_(plans),
        config_(config),
        policy_(policy),
        knowledge_(plans.size()),
        cellular_items_(plans.size()) {
    result_.policy = policy;
    for (std::size_t p = 0; p < plans_.size(); ++p) {
      const auto& plan = plans_[p];
      validate_plan(plan, network_);
      knowledge_[p] = KnowledgeSet(plan.vehicle);
      starts_[plan.start_time()].push_back(p);
      first_heard_.push_back(plan.path.size());
      for (std::size_t i = 0; i < plan.path.size(); ++i) {
        const Slot t = plan.junction_times[i];
        visits_[{t, plan.path[i]}].push_back({p, i});
        if (i >= 1) arrivals_[t].push_back({p, i});
        if (i >= 1 && i + 1 < plan.path.size()) {
          deadlines_[plan.segment_times[i]].push_back({p, i});
        }
        if (first_heard_[p] == plan.path.size() && i + 1 < plan.path.size() &&
            network_.is_rsu(plan.path[i])) {
          first_heard_[p] = i;
        }
      }
      if (!plan.path.empty()) {
        first_slot_ = std::min(first_slot_, plan.start_time());
        last_slot_ = std::max(last_slot_, plan.end_time());
      }
    }
  }

  ScheduleResult run() {
    for (Slot t = first_slot_; t <= last_slot_; ++t) step(t);
    if (policy_ == BroadcastPolicy::Offline) {
      advance_phase();
      cellular_phase();
    }
    return std::move(result_);
  }

 private:
  bool offline() const { return policy_ == BroadcastPolicy::Offline; }

  void step(Slot t) {
    if (auto it = starts_.find(t); it != starts_.end()) {
      for (std::size_t p : it->second) preload(p);
    }
    if (auto it = arrivals_.find(t); it != arrivals_.end()) {
      for (auto [p, i] : it->second) {
        const auto& seg = plans_[p].segments[i - 1];
        if (catalog_.dynamic_enabled(seg)) knowledge_[p].add_prior(dynamic_id(seg, t));
      }
    }

    std::vector<JunctionId> rsus;
    for (auto it = visits_.lower_bound({t, ""}); it != visits_.end() && it->first.first == t;
         ++it) {
      if (network_.is_rsu(it->first.second)) rsus.push_back(it->first.second);
    }
    std::vector<StepOutput> outputs(rsus.size());
    const auto threads = static_cast<std::size_t>(std::max(1, config_.threads));
    if (threads > 1 && rsus.size() > 1) {
      std::vector<std::future<void>> work;
      for (std::size_t w = 0; w < std::min(threads, rsus.size()); ++w) {
        work.push_back(std::async(std::launch::async, [&, w] {
          for (std::size_t i = w; i < rsus.size(); i += threads) {
            outputs[i] = plan_rsu(rsus[i], t);
          }
        }));
      }
      for (auto& f : work) f.get();
    } else {
      for (std::size_t i = 0; i < rsus.size(); ++i) outputs[i] = plan_rsu(rsus[i], t);
    }
    for (auto& out : outputs) apply_rsu(out, t);

    if (auto it = deadlines_.find(t); it != deadlines_.end()) {
      for (auto [p, i] : it->second) check_deadline(p, i, t);
    }
  }

  void preload(std::size_t p) {
    const auto& plan = plans_[p];
    if (!plan.segments.empty()) knowledge_[p].add_prior(static_id(plan.segments.front()));
    for (const auto& s : config_.prior_segments) knowledge_[p].add_prior(static_id(s));
  }

  std::optional<MapId> fresh_item(const SegmentId& seg, Slot upto) const {
    if (!catalog_.dynamic_enabled(seg)) return std::nullopt;
    auto slot = catalog_.latest_dynamic(seg, upto - config_.tau, upto);
    if (!slot) return std::nullopt;
    return dynamic_id(seg, *slot);
  }

  bool knows_fresh(std::size_t p, const SegmentId& seg, Slot deadline) const {
    auto it = catalog_.dynamic_items().find(seg);
    if (it == catalog_.dynamic_items().end()) return false;
    for (auto s = it->second.lower_bound(deadline - config_.tau);
         s != it->second.end() && *s <= deadline; ++s) {
      if (knowledge_[p].knows(dynamic_id(seg, *s))) return true;
    }
    return false;
  }

  StepOutput plan_rsu(const JunctionId& r, Slot t) const {
    StepOutput out;
    out.rsu = r;
    const auto& visitors = visits_.at({t, r});
    std::optional<Bytes> capacity = config_.capacity_of(r);

    KnowledgeView view;
    std::vector<Movement> static_moves;
    std::vector<Movement> dynamic_moves;
    for (auto [p, i] : visitors) {
      const auto& plan = plans_[p];
      view[plan.vehicle] = knowledge_[p].decoded();
      if (i == 0 || i + 1 >= plan.path.size()) continue;
      const Movement m{plan.vehicle, plan.segments[i - 1], plan.segments[i]};
      static_moves.push_back(m);
      const auto target = fresh_item(m.to, t);
      const auto own = fresh_item(m.from, t);
      if (target && own && knowledge_[p].knows(*own) &&
          parse_map_id(*target)->slot >= plan.segment_times[i] - config_.tau &&
          !knows_fresh(p, m.to, plan.segment_times[i])) {
        dynamic_moves.push_back(m);
      }
    }
    const DemandGraph gs = build_demand_graph(network_, r, static_moves, view, nullptr,
                                              config_.prior_segments);
    const DemandGraph gd = build_demand_graph(
        network_, r, dynamic_moves, view,
        [&](const SegmentId& s) { return fresh_item(s, t); });

    for (const auto& [dem, vehicles] : gs.listeners) {
      for (const auto& v : vehicles) {
        out.demands.emplace_back(plan_of(visitors, v), ItemKind::Static, gs.item(dem.to));
      }
    }
    for (const auto& [dem, vehicles] : gd.listeners) {
      for (const auto& v : vehicles) {
        out.demands.emplace_back(plan_of(visitors, v), ItemKind::Dynamic, gd.item(dem.to));
      }
    }

    auto add = [&](const std::vector<Packet>& packets, PacketTag tag) {
      for (const auto& p : packets) out.packets.emplace_back(p, tag);
    };
    const std::uint64_t seed = mix_seed(config_.seed, r, t);
    switch (policy_) {
      case BroadcastPolicy::Online:
      case BroadcastPolicy::Offline: {
        RsuPlan plan = onl_schd(gs, gd, capacity, catalog_, view);
        add(plan.static_packets, PacketTag::Static);
        add(plan.dynamic_packets, PacketTag::Dynamic);
        break;
      }
      case BroadcastPolicy::IndexCoded:
        add(to_packets(substitute_sources(one_j_idxcd(gs), gs), gs, &catalog_),
            PacketTag::Static);
        add(to_packets(substitute_sources(one_j_idxcd(gd), gd), gd, &catalog_),
            PacketTag::Dynamic);
        break;
      case BroadcastPolicy::OnDemand:
        add(materialize(baseline_on_demand(gs), gs, &catalog_), PacketTag::Static);
        add(materialize(baseline_on_demand(gd), gd, &catalog_), PacketTag::Dynamic);
        break;
      case BroadcastPolicy::RandJunction:
        add(materialize(baseline_rand(gs, seed), gs, &catalog_), PacketTag::Static);
        add(materialize(baseline_rand(gd, seed ^ 1U), gd, &catalog_), PacketTag::Dynamic);
        break;
      case BroadcastPolicy::RandTrip: {
        std::vector<std::pair<Packet, PacketTag>> bulk;
        std::set<MapId> seen;
        for (auto [p, i] : visitors) {
          if (first_heard_[p] != i) continue;
          const auto& plan = plans_[p];
          for (std::size_t q = std::max<std::size_t>(i, 1); q < plan.segments.size(); ++q) {
            const MapId item = static_id(plan.segments[q]);
            if (knowledge_[p].knows(item) || !seen.insert(item).second) continue;
            bulk.emplace_back(catalog_.make_packet({item}), PacketTag::Static);
          }
        }
        for (const auto& p : materialize(baseline_rand(gd, seed ^ 1U), gd, &catalog_)) {
          if (seen.insert(*p.components().begin()).second) {
            bulk.emplace_back(p, PacketTag::Dynamic);
          }
        }
        std::mt19937_64 rng(seed);
        std::shuffle(bulk.begin(), bulk.end(), rng);
        out.packets = std::move(bulk);
        break;
      }
    }
    return out;
  }

  std::size_t plan_of(const std::vector<Visit>& visitors, const VehicleId& v) const {
    for (auto [p, i] : visitors) {
      if (plans_[p].vehicle == v) return p;
    }
    throw Error(ErrorCode::InvalidPlan, "listener " + v + " is not present");
  }

  RsuSlotStats& stats(Slot t, const JunctionId& j) {
    auto& s = result_.stats[{t, j}];
    s.slot = t;
    s.junction = j;
    return s;
  }

  void apply_rsu(const StepOutput& out, Slot t) {
    const auto& r = out.rsu;
    const auto& visitors = visits_.at({t, r});
    std::optional<Bytes> left = config_.capacity_of(r);
    auto& st = stats(t, r);
    st.capacity = left;

    std::vector<Packet> sent;
    for (const auto& [packet, tag] : out.packets) {
      if (left && packet.size() > *left) continue;
      if (left) *left -= packet.size();
      sent.push_back(packet);
      result_.broadcasts.push_back({r, t, packet, tag});
      for (const auto& id : packet.components()) {
        auto parsed = parse_map_id(id);
        if (!parsed) continue;
        auto& keys = tag == PacketTag::Dynamic ? result_.decision.broadcast_dynamic
                                               : result_.decision.broadcast_static;
        keys.insert({r, t, parsed->segment});
      }
      ++st.broadcast_packets;
      if (!packet.is_source()) ++st.coded_packets;
      st.broadcast_bytes += packet.size();
    }
    remaining_[{t, r}] = left;

    for (auto [p, i] : visitors) {
      for (const auto& packet : sent) knowledge_[p].receive_broadcast(packet);
    }

    std::map<std::size_t, bool> satisfied;
    for (const auto& [p, kind, item] : out.demands) {
      const bool ok = knowledge_[p].knows(item);
      auto [it, fresh] = satisfied.emplace(p, ok);
      if (!fresh) it->second = it->second && ok;
      if (!ok) fallback(p, kind, item, t, r, std::nullopt);
    }
    st.demanding_vehicles += satisfied.size();
    for (const auto& [p, ok] : satisfied) st.satisfied_vehicles += ok;
  }

  // Online policies push the item over cellular now; the offline scheduler
  // promises it and settles in the later phases.
  void fallback(std::size_t p, ItemKind kind, const MapId& item, Slot t, const JunctionId& j,
                std::optional<std::size_t> requirement) {
    if (offline()) {
      knowledge_[p].add_prior(item);
      pending_.push_back({p, requirement.value_or(npos), item, parse_map_id(item)->segment,
                          kind, 0, t, j});
      return;
    }
    push_cellular(p, kind, item, t, j);
  }

  void push_cellular(std::size_t p, ItemKind kind, const MapId& item, Slot t,
                     const JunctionId& j) {
    const Bytes size = catalog_.item_size(item);
    const Packet packet = Packet::source(item, size);
    knowledge_[p].receive_cellular(packet);
    cellular_items_[p].insert(item);
    result_.cellular.push_back({plans_[p].vehicle, t, item, size, j});
    const auto seg = parse_map_id(item)->segment;
    auto& keys = kind == ItemKind::Static ? result_.decision.cellular_static
                                          : result_.decision.cellular_dynamic;
    keys.insert({plans_[p].vehicle, t, seg});
    auto& st = stats(t, j);
    ++st.cellular_count;
    st.cellular_bytes += size;
  }

  void check_deadline(std::size_t p, std::size_t i, Slot t) {
    const auto& plan = plans_[p];
    const auto& seg = plan.segments[i];
    const auto& j = plan.path[i];

    const MapId s = static_id(seg);
    const std::size_t rs = result_.requirements.size();
    result_.requirements.push_back({plan.vehicle, ItemKind::Static, seg, s, j, t,
                                    Channel::Broadcast});
    if (!knowledge_[p].knows(s)) fallback(p, ItemKind::Static, s, t, j, rs);
    settle(p, rs);

    if (auto fresh = fresh_item(seg, t)) {
      const std::size_t rd = result_.requirements.size();
      result_.requirements.push_back({plan.vehicle, ItemKind::Dynamic, seg, *fresh, j, t,
                                      Channel::Broadcast});
      if (!knows_fresh(p, seg, t)) fallback(p, ItemKind::Dynamic, *fresh, t, j, rd);
      settle(p, rd);
    }
  }

  // Fixes the channel of a requirement; pending offline items are settled
  // when the advance and cellular phases run.
  void settle(std::size_t p, std::size_t r) {
    auto& req = result_.requirements[r];
    for (auto& pend : pending_) {
      if (pend.plan == p && pend.item == req.item && !pend.resolved &&
          (pend.requirement == npos || pend.requirement == r)) {
        pend.requirement = r;
        pend.deadline = req.deadline;
        return;
      }
    }
    if (req.kind == ItemKind::Static && config_.prior_segments.contains(req.segment)) {
      req.channel = Channel::Prior;
    } else if (cellular_items_[p].contains(req.item)) {
      req.channel = Channel::Cellular;
    }
  }

  void advance_phase() {
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < pending_.size(); ++k) {
      if (pending_[k].kind == ItemKind::Static && pending_[k].requirement != npos) {
        order.push_back(k);
      }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& pa = pending_[a];
      const auto& pb = pending_[b];
      const auto& va = plans_[pa.plan];
      const auto& vb = plans_[pb.plan];
      return std::tie(va.junction_times.front(), va.vehicle, pa.deadline, pa.segment) <
             std::tie(vb.junction_times.front(), vb.vehicle, pb.deadline, pb.segment);
    });

    std::set<std::tuple<JunctionId, Slot, MapId>> scheduled;
    for (std::size_t k : order) {
      if (pending_[k].resolved) continue;
      const auto& pend = pending_[k];
      const auto& plan = plans_[pend.plan];
      const Bytes size = catalog_.item_size(pend.item);
      for (std::size_t j = 0; j < plan.path.size(); ++j) {
        const Slot tr = plan.junction_times[j];
        const auto& r = plan.path[j];
        if (tr >= pend.deadline) break;
        if (!network_.is_rsu(r)) continue;
        const auto key = std::make_tuple(r, tr, pend.item);
        if (scheduled.contains(key)) {
          resolve_at(r, tr, pend.item);
          break;
        }
        auto slot_left = remaining_.find({tr, r});
        if (slot_left == remaining_.end()) {
          slot_left = remaining_.emplace(Key{tr, r}, config_.capacity_of(r)).first;
        }
        auto& left = slot_left->second;
        if (left && *left < size) continue;
        if (left) *left -= size;
        scheduled.insert(key);
        const Packet packet = Packet::source(pend.item, size);
        result_.broadcasts.push_back({r, tr, packet, PacketTag::Advance});
        result_.decision.broadcast_static.insert({r, tr, pend.segment});
        auto& st = stats(tr, r);
        ++st.broadcast_packets;
        st.broadcast_bytes += size;
        AdvanceRecord rec{r, tr, pend.segment, {}, segment_distance(r, pend.segment)};
        rec.vehicles = resolve_at(r, tr, pend.item);
        result_.advance.push_back(std::move(rec));
        break;
      }
    }
  }

  std::set<VehicleId> resolve_at(const JunctionId& r, Slot t, const MapId& item) {
    std::set<VehicleId> out;
    for (auto [p, i] : visits_.at({t, r})) {
      for (auto& pend : pending_) {
        if (pend.plan == p && pend.item == item && !pend.resolved && t < pend.deadline &&
            pend.requirement != npos) {
          pend.resolved = true;
          result_.requirements[pend.requirement].channel = Channel::Broadcast;
          out.insert(plans_[p].vehicle);
        }
      }
    }
    return out;
  }

  int segment_distance(const JunctionId& r, const SegmentId& seg) {
    auto it = hops_.find(r);
    if (it == hops_.end()) it = hops_.emplace(r, network_.hop_distances(r)).first;
    const auto& s = network_.segment(seg);
    int best = std::numeric_limits<int>::max();
    for (const auto& end : {s.a, s.b}) {
      if (auto d = it->second.find(end); d != it->second.end()) best = std::min(best, d->second);
    }
    return best;
  }

  void cellular_phase() {
    for (auto& pend : pending_) {
      if (pend.resolved) continue;
      pend.resolved = true;
      push_cellular(pend.plan, pend.kind, pend.item, pend.origin, pend.junction);
      if (pend.requirement != npos) {
        result_.requirements[pend.requirement].channel = Channel::Cellular;
      }
    }
  }

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  const RoadNetwork& network_;
  const MapDataCatalog catalog_;
  std::span<const TripPlan> plans_;
  const SchedulerConfig& config_;
  BroadcastPolicy policy_;

  std::vector<KnowledgeSet> knowledge_;
  std::vector<std::set<MapId>> cellular_items_;
  std::vector<std::size_t> first_heard_;
  std::map<Slot, std::vector<std::size_t>> starts_;
  std::map<Slot, std::vector<Visit>> arrivals_;
  std::map<Slot, std::vector<Visit>> deadlines_;
  std::map<Key, std::vector<Visit>> visits_;
  std::map<Key, std::optional<Bytes>> remaining_;
  std::map<JunctionId, std::map<JunctionId, int>> hops_;
  std::vector<Pending> pending_;
  Slot first_slot_ = std::numeric_limits<Slot>::max();
  Slot last_slot_ = std::numeric_limits<Slot>::min();
  ScheduleResult result_;
};

}  // namespace

ScheduleResult run_schedule(const RoadNetwork& network, const MapDataCatalog& catalog,
                            std::span<const TripPlan> plans, const SchedulerConfig& config,
                            BroadcastPolicy policy) {
  Engine engine(network, catalog, plans, config, policy);
  return engine.run();
}

Bytes peak_demand(const RoadNetwork& network, const MapDataCatalog& catalog,
                  std::span<const TripPlan> plans, const SchedulerConfig& config) {
  const MapDataCatalog full = with_generated_items(catalog, plans);
  std::map<Key, std::set<MapId>> wanted;
  for (const auto& plan : plans) {
    for (std::size_t i = 1; i + 1 < plan.path.size(); ++i) {
      if (!network.is_rsu(plan.path[i])) continue;
      const Key key{plan.junction_times[i], plan.path[i]};
      const auto& seg = plan.segments[i];
      if (!config.prior_segments.contains(seg)) wanted[key].insert(static_id(seg));
      if (full.dynamic_enabled(seg)) {
        const Slot t = plan.junction_times[i];
        if (auto s = full.latest_dynamic(seg, t - config.tau, t)) {
          wanted[key].insert(dynamic_id(seg, *s));
        }
      }
    }
  }
  Bytes peak = 0;
  for (const auto& [key, items] : wanted) {
    Bytes sum = 0;
    for (const auto& id : items) sum += full.item_size(id);
    peak = std::max(peak, sum);
  }
  return peak;
}

DeliveryReport verify_delivery(const RoadNetwork& network, const MapDataCatalog& catalog,
                               std::span<const TripPlan> plans, const SchedulerConfig& config,
                               const ScheduleResult& result) {
  DeliveryReport report;
  const MapDataCatalog full = with_generated_items(catalog, plans);

  std::map<Key, Bytes> used;
  for (const auto& b : result.broadcasts) used[{b.slot, b.rsu}] += b.packet.size();
  for (const auto& [key, bytes] : used) {
    const auto cap = config.capacity_of(key.second);
    if (!network.is_rsu(key.second)) {
      report.capacity_violations.push_back("broadcast at non-RSU " + key.second);
    } else if (cap && bytes > *cap) {
      report.capacity_violations.push_back(key.second + "@" + std::to_string(key.first) +
                                           ": " + std::to_string(bytes) + " > " +
                                           std::to_string(*cap));
    }
  }

  std::map<Slot, std::vector<const BroadcastRecord*>> broadcasts;
  for (const auto& b : result.broadcasts) broadcasts[b.slot].push_back(&b);
  std::map<Slot, std::vector<const CellularRecord*>> cellular;
  for (const auto& c : result.cellular) cellular[c.slot].push_back(&c);

  Slot first = std::numeric_limits<Slot>::max();
  Slot last = std::numeric_limits<Slot>::min();
  std::map<VehicleId, std::size_t> index;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    first = std::min(first, plans[p].start_time());
    last = std::max(last, plans[p].end_time());
    index[plans[p].vehicle] = p;
  }
  std::map<Key, std::vector<std::size_t>> present;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    for (std::size_t i = 0; i < plans[p].path.size(); ++i) {
      present[{plans[p].junction_times[i], plans[p].path[i]}].push_back(p);
    }
  }
  std::vector<KnowledgeSet> know(plans.size());
  for (Slot t = first; t <= last; ++t) {
    for (std::size_t p = 0; p < plans.size(); ++p) {
      const auto& plan = plans[p];
      if (plan.start_time() == t) {
        know[p] = KnowledgeSet(plan.vehicle);
        if (!plan.segments.empty()) know[p].add_prior(static_id(plan.segments.front()));
        for (const auto& s : config.prior_segments) know[p].add_prior(static_id(s));
      }
      for (std::size_t i = 1; i < plan.path.size(); ++i) {
        const auto& seg = plan.segments[i - 1];
        if (plan.junction_times[i] == t && full.dynamic_enabled(seg)) {
          know[p].add_prior(dynamic_id(seg, t));
        }
      }
    }
    for (const auto* b : broadcasts[t]) {
      auto it = present.find({t, b->rsu});
      if (it == present.end()) continue;
      for (std::size_t p : it->second) know[p].receive_broadcast(b->packet);
    }
    for (const auto* c : cellular[t]) {
      auto it = index.find(c->vehicle);
      if (it == index.end()) continue;
      know[it->second].receive_cellular(Packet::source(c->item, c->bytes));
    }
    for (std::size_t p = 0; p < plans.size(); ++p) {
      const auto& plan = plans[p];
      for (std::size_t i = 1; i + 1 < plan.path.size(); ++i) {
        if (plan.segment_times[i] != t) continue;
        const auto& seg = plan.segments[i];
        const std::string who = plan.vehicle + " " + seg + "@" + std::to_string(t);
        if (!know[p].knows(static_id(seg))) report.missing_static.push_back(who);
        if (!full.dynamic_enabled(seg)) continue;
        const auto it = full.dynamic_items().find(seg);
        if (it == full.dynamic_items().end()) continue;
        bool needed = false;
        bool fresh = false;
        for (auto s = it->second.lower_bound(t - config.tau);
             s != it->second.end() && *s <= t; ++s) {
          needed = true;
          fresh = fresh || know[p].knows(dynamic_id(seg, *s));
        }
        if (needed && !fresh) report.missing_dynamic.push_back(who);
      }
    }
  }
  return report;
}

}  // namespace fogcast
