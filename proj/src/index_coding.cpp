#include "fogcast/index_coding.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>
#include <numeric>

namespace fogcast {

namespace {

std::pair<int, int> key_of(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

std::string demand_label(const Demand& d) {
  return "(" + std::to_string(d.from) + "," + std::to_string(d.to) + ")";
}

// Decodable nodes as a bitmask; bit k stands for node k.
std::uint64_t closure_mask(std::uint64_t known, const std::vector<std::pair<int, int>>& pool,
                           std::uint64_t chosen) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!(chosen >> i & 1U)) continue;
      auto [a, b] = pool[i];
      const std::uint64_t ba = std::uint64_t{1} << a;
      const std::uint64_t bb = std::uint64_t{1} << b;
      if (a == b) {
        if (!(known & ba)) {
          known |= ba;
          changed = true;
        }
      } else if (((known & ba) != 0) != ((known & bb) != 0)) {
        known |= ba | bb;
        changed = true;
      }
    }
  }
  return known;
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n) + 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<int> parent_;
};

// Edges of one cycle among the coded packets, or empty when acyclic. DFS from
// the smallest node with neighbours in ascending order.
std::vector<NodePacket> find_cycle(const std::set<NodePacket>& packets) {
  std::map<int, std::set<int>> adj;
  for (const auto& p : packets) {
    if (p.is_source()) continue;
    adj[p.lo()].insert(p.hi());
    adj[p.hi()].insert(p.lo());
  }
  std::map<int, int> parent;
  std::set<int> on_stack;
  std::vector<int> stack;
  std::vector<NodePacket> cycle;

  std::function<bool(int, int)> dfs = [&](int u, int from) -> bool {
    on_stack.insert(u);
    stack.push_back(u);
    for (int v : adj[u]) {
      if (v == from) continue;
      if (on_stack.contains(v)) {
        auto it = std::find(stack.begin(), stack.end(), v);
        for (auto j = it; j + 1 != stack.end(); ++j) {
          cycle.push_back(NodePacket::coded(*j, *(j + 1)));
        }
        cycle.push_back(NodePacket::coded(u, v));
        return true;
      }
      if (parent.contains(v)) continue;
      parent[v] = u;
      if (dfs(v, u)) return true;
    }
    on_stack.erase(u);
    stack.pop_back();
    return false;
  };

  for (const auto& [u, _] : adj) {
    if (parent.contains(u)) continue;
    parent[u] = 0;
    if (dfs(u, 0)) return cycle;
  }
  return {};
}

bool demand_served(const Demand& d, const std::set<int>& prior,
                   const std::set<NodePacket>& packets) {
  std::set<int> known = prior;
  known.insert(d.from);
  return decodable_nodes(known, packets).contains(d.to);
}

bool all_served(const DemandGraph& g, const std::set<NodePacket>& packets) {
  return std::all_of(g.demands.begin(), g.demands.end(), [&](const Demand& d) {
    return demand_served(d, g.prior_extra, packets);
  });
}

}  // namespace

// ---------------------------------------------------------------------------

DemandGraph DemandGraph::make(JunctionId junction, int n, std::set<Demand> demands,
                              std::set<int> prior_extra) {
  DemandGraph g;
  g.junction = std::move(junction);
  g.n = n;
  g.demands = std::move(demands);
  g.prior_extra = std::move(prior_extra);
  g.validate();
  return g;
}

void DemandGraph::validate() const {
  if (n < 0) throw Error(ErrorCode::InvalidDemand, "negative node count");
  for (const auto& d : demands) {
    if (d.from < 1 || d.from > n || d.to < 1 || d.to > n) {
      throw Error(ErrorCode::InvalidDemand,
                  "demand " + demand_label(d) + " outside 1.." + std::to_string(n));
    }
    if (d.from == d.to) {
      throw Error(ErrorCode::InvalidDemand, "U-turn demand " + demand_label(d));
    }
  }
  for (int k : prior_extra) {
    if (k < 1 || k > n) {
      throw Error(ErrorCode::InvalidDemand,
                  "prior node " + std::to_string(k) + " outside 1.." + std::to_string(n));
    }
  }
}

std::set<int> DemandGraph::nodes() const {
  std::set<int> out;
  for (const auto& d : demands) {
    out.insert(d.from);
    out.insert(d.to);
  }
  return out;
}

DemandGraph DemandGraph::induced(const std::set<int>& keep) const {
  DemandGraph g;
  g.junction = junction;
  g.n = n;
  g.prior_extra = prior_extra;
  g.segments = segments;
  g.items = items;
  for (const auto& d : demands) {
    if (keep.contains(d.from) && keep.contains(d.to)) {
      g.demands.insert(d);
      if (auto it = listeners.find(d); it != listeners.end()) g.listeners[d] = it->second;
    }
  }
  return g;
}

MapId DemandGraph::item(int k) const {
  if (k >= 1 && static_cast<std::size_t>(k) <= items.size() && !items[k - 1].empty()) {
    return items[k - 1];
  }
  return "m" + std::to_string(k);
}

int DemandGraph::node_of(const SegmentId& segment) const {
  auto it = std::find(segments.begin(), segments.end(), segment);
  return it == segments.end() ? 0 : static_cast<int>(it - segments.begin()) + 1;
}

DemandGraph build_demand_graph(const RoadNetwork& network, const JunctionId& junction,
                               std::span<const Movement> movements,
                               const std::map<VehicleId, std::set<MapId>>& knowledge,
                               const ItemResolver& item_of,
                               const std::set<SegmentId>& prior_segments) {
  if (!network.has_junction(junction)) {
    throw Error(ErrorCode::UnknownSegment, "unknown junction " + junction);
  }
  DemandGraph g;
  g.junction = junction;
  g.segments = network.incident(junction);
  g.n = static_cast<int>(g.segments.size());
  g.items.reserve(g.segments.size());
  for (const auto& s : g.segments) {
    std::optional<MapId> item = item_of ? item_of(s) : std::optional<MapId>(static_id(s));
    g.items.push_back(item.value_or(""));
  }
  for (const auto& s : prior_segments) {
    if (int k = g.node_of(s)) g.prior_extra.insert(k);
  }

  static const std::set<MapId> kNothing;
  for (const auto& m : movements) {
    const int from = g.node_of(m.from);
    const int to = g.node_of(m.to);
    if (from == 0) {
      throw Error(ErrorCode::UnknownSegment,
                  "segment " + m.from + " is not incident to " + junction);
    }
    if (to == 0) {
      throw Error(ErrorCode::UnknownSegment,
                  "segment " + m.to + " is not incident to " + junction);
    }
    if (from == to) continue;
    if (g.prior_extra.contains(to)) continue;
    const MapId& target = g.items[to - 1];
    if (target.empty()) continue;
    auto kit = knowledge.find(m.vehicle);
    const auto& known = kit == knowledge.end() ? kNothing : kit->second;
    if (known.contains(target)) continue;
    Demand d{from, to};
    g.demands.insert(d);
    g.listeners[d].insert(m.vehicle);
  }
  return g;
}

// ---------------------------------------------------------------------------

NodePacket NodePacket::coded(int a, int b) {
  if (a == b) {
    throw Error(ErrorCode::InvalidDemand,
                "coded packet needs two distinct nodes, got " + std::to_string(a));
  }
  return NodePacket(std::min(a, b), std::max(a, b));
}

std::string NodePacket::label() const {
  if (is_source()) return "m" + std::to_string(lo_);
  return "m" + std::to_string(lo_) + "^m" + std::to_string(hi_);
}

std::size_t IndexCodingScheme::coded_count() const {
  return static_cast<std::size_t>(std::count_if(
      packets.begin(), packets.end(), [](const NodePacket& p) { return !p.is_source(); }));
}

std::set<int> decodable_nodes(const std::set<int>& known,
                              const std::set<NodePacket>& packets) {
  std::set<int> out = known;
  for (const auto& p : packets) {
    if (p.is_source()) out.insert(p.lo());
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& p : packets) {
      if (p.is_source()) continue;
      const bool a = out.contains(p.lo());
      const bool b = out.contains(p.hi());
      if (a != b) {
        out.insert(a ? p.hi() : p.lo());
        changed = true;
      }
    }
  }
  return out;
}

IndexCodingScheme eliminate_cycles(const DemandGraph& graph) {
  graph.validate();
  IndexCodingScheme scheme;
  for (const auto& d : graph.demands) {
    scheme.packets.insert(NodePacket::coded(d.from, d.to));
    scheme.locks[key_of(d.from, d.to)] = false;
  }

  for (;;) {
    std::vector<NodePacket> cycle = find_cycle(scheme.packets);
    if (cycle.empty()) break;
    std::sort(cycle.begin(), cycle.end(), std::greater<>());
    bool removed = false;
    for (const auto& edge : cycle) {
      auto& lock = scheme.locks[key_of(edge.lo(), edge.hi())];
      if (lock) continue;
      scheme.packets.erase(edge);
      if (!all_served(graph, scheme.packets)) {
        scheme.packets.insert(edge);
        lock = true;
        continue;
      }
      for (const auto& d : graph.demands) {
        const NodePacket own = NodePacket::coded(d.from, d.to);
        if (!scheme.packets.contains(own)) continue;
        std::set<NodePacket> without = scheme.packets;
        without.erase(own);
        if (!demand_served(d, graph.prior_extra, without)) {
          scheme.locks[key_of(d.from, d.to)] = true;
        }
      }
      removed = true;
      break;
    }
    // Every edge of the cycle is needed; nothing more can be removed.
    if (!removed) break;
  }
  return scheme;
}

IndexCodingScheme one_j_idxcd(const DemandGraph& graph) {
  graph.validate();
  const auto& prior = graph.prior_extra;

  std::vector<Demand> active;
  for (const auto& d : graph.demands) {
    if (!prior.contains(d.to)) active.push_back(d);
  }
  if (active.empty()) return {};

  std::set<int> touched_set;
  for (const auto& d : active) {
    if (!prior.contains(d.from)) touched_set.insert(d.from);
    touched_set.insert(d.to);
  }
  const std::vector<int> touched(touched_set.begin(), touched_set.end());
  const int t = static_cast<int>(touched.size());
  std::map<int, int> pos;
  for (int i = 0; i < t; ++i) pos[touched[i]] = i;

  // Bit i of a mask is touched[i]. A demand a -> b with a held by everyone
  // (prior, or sent as a source) forces b to be a source as well.
  std::uint64_t forced = 0;
  std::vector<std::pair<int, int>> inner;  // (pos a, pos b) for a not in prior
  for (const auto& d : active) {
    if (prior.contains(d.from)) {
      forced |= std::uint64_t{1} << pos[d.to];
    } else {
      inner.emplace_back(pos[d.from], pos[d.to]);
    }
  }
  auto close = [&](std::uint64_t s) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto [a, b] : inner) {
        if ((s >> a & 1U) && !(s >> b & 1U)) {
          s |= std::uint64_t{1} << b;
          changed = true;
        }
      }
    }
    return s;
  };
  auto cost = [&](std::uint64_t s) {
    UnionFind uf(t);
    int merges = 0;
    for (auto [a, b] : inner) {
      if ((s >> a & 1U) || (s >> b & 1U)) continue;
      if (uf.unite(a, b)) ++merges;
    }
    return std::popcount(s) + merges;
  };
  auto lex_less = [&](std::uint64_t a, std::uint64_t b) {
    for (int i = 0; i < t; ++i) {
      const bool ia = a >> i & 1U;
      const bool ib = b >> i & 1U;
      if (ia != ib) return ia;
    }
    return false;
  };

  std::uint64_t best = close(forced);
  int best_cost = cost(best);
  constexpr int kExhaustiveLimit = 16;
  if (t <= kExhaustiveLimit) {
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << t); ++s) {
      if ((s & forced) != forced || close(s) != s) continue;
      const int c = cost(s);
      const int pb = std::popcount(best);
      const int ps = std::popcount(s);
      if (c < best_cost || (c == best_cost && (ps < pb || (ps == pb && lex_less(s, best))))) {
        best = s;
        best_cost = c;
      }
    }
  }

  std::set<int> sources;
  std::set<int> rest;
  for (int i = 0; i < t; ++i) {
    (best >> i & 1U ? sources : rest).insert(touched[i]);
  }
  DemandGraph residual = graph.induced(rest);
  IndexCodingScheme scheme = eliminate_cycles(residual);
  for (int s : sources) scheme.packets.insert(NodePacket::source(s));
  return scheme;
}

DecodeReport is_decodable(const IndexCodingScheme& scheme, const DemandGraph& graph) {
  DecodeReport report;
  std::map<int, std::vector<NodePacket>> incident;
  std::vector<int> source_nodes;
  for (const auto& p : scheme.packets) {
    if (p.is_source()) {
      source_nodes.push_back(p.lo());
    } else {
      incident[p.lo()].push_back(p);
      incident[p.hi()].push_back(p);
    }
  }

  for (const auto& d : graph.demands) {
    if (graph.prior_extra.contains(d.to)) {
      report.witness[d] = {};
      continue;
    }
    // Breadth-first over nodes; roots are the vehicle's own segment and the
    // priors, source packets hang one step below the roots.
    std::map<int, std::optional<NodePacket>> via;
    std::map<int, int> parent;
    std::deque<int> queue;
    auto reach = [&](int node, int from, std::optional<NodePacket> packet) {
      if (via.contains(node)) return;
      via[node] = packet;
      parent[node] = from;
      queue.push_back(node);
    };
    reach(d.from, 0, std::nullopt);
    for (int p : graph.prior_extra) reach(p, 0, std::nullopt);
    for (int s : source_nodes) reach(s, 0, NodePacket::source(s));
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto& p : incident[u]) reach(p.other(u), u, p);
    }
    if (!via.contains(d.to)) {
      report.decodable = false;
      report.undecodable.push_back(d);
      continue;
    }
    std::vector<NodePacket> chain;
    for (int node = d.to; node != 0; node = parent[node]) {
      if (via[node]) chain.push_back(*via[node]);
    }
    std::reverse(chain.begin(), chain.end());
    report.witness[d] = std::move(chain);
  }
  return report;
}

IndexCodingScheme substitute_sources(const IndexCodingScheme& scheme,
                                     const DemandGraph& graph) {
  const DecodeReport report = is_decodable(scheme, graph);
  if (!report.decodable) {
    throw Error(ErrorCode::InvalidDemand,
                "scheme does not satisfy demand " + demand_label(report.undecodable.front()));
  }
  std::map<NodePacket, std::vector<Demand>> users;
  for (const auto& [d, chain] : report.witness) {
    for (const auto& p : chain) {
      if (!p.is_source()) users[p].push_back(d);
    }
  }
  IndexCodingScheme out;
  out.locks = scheme.locks;
  for (const auto& p : scheme.packets) {
    auto it = users.find(p);
    if (!p.is_source() && it != users.end() && it->second.size() == 1) {
      out.packets.insert(NodePacket::source(it->second.front().to));
    } else {
      out.packets.insert(p);
    }
  }
  return out;
}

IndexCodingScheme brute_force_min_scheme(const DemandGraph& graph, int max_n) {
  graph.validate();
  if (graph.n > max_n) {
    throw Error(ErrorCode::TooLarge, "brute force limited to n <= " +
                                         std::to_string(max_n) + ", got " +
                                         std::to_string(graph.n));
  }
  if (graph.n > 10) {
    throw Error(ErrorCode::TooLarge, "brute force pool too large for n = " +
                                         std::to_string(graph.n));
  }
  std::vector<std::pair<int, int>> pool;
  for (int k = 1; k <= graph.n; ++k) pool.emplace_back(k, k);
  for (int a = 1; a <= graph.n; ++a) {
    for (int b = a + 1; b <= graph.n; ++b) pool.emplace_back(a, b);
  }
  std::uint64_t prior_mask = 0;
  for (int p : graph.prior_extra) prior_mask |= std::uint64_t{1} << p;

  auto satisfies = [&](std::uint64_t chosen) {
    for (const auto& d : graph.demands) {
      const std::uint64_t known =
          closure_mask(prior_mask | std::uint64_t{1} << d.from, pool, chosen);
      if (!(known >> d.to & 1U)) return false;
    }
    return true;
  };

  const int m = static_cast<int>(pool.size());
  for (int k = 0; k <= m; ++k) {
    // Combinations of size k in lexicographic order of pool positions.
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      std::uint64_t chosen = 0;
      for (int i : idx) chosen |= std::uint64_t{1} << i;
      if (satisfies(chosen)) {
        IndexCodingScheme scheme;
        for (int i : idx) {
          auto [a, b] = pool[static_cast<std::size_t>(i)];
          scheme.packets.insert(a == b ? NodePacket::source(a) : NodePacket::coded(a, b));
        }
        return scheme;
      }
      int i = k - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j) {
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
  }
  // The full pool always works; unreachable.
  throw Error(ErrorCode::TooLarge, "no scheme found");
}

std::vector<Packet> to_packets(const IndexCodingScheme& scheme, const DemandGraph& graph,
                               const MapDataCatalog* catalog) {
  std::vector<Packet> out;
  out.reserve(scheme.packets.size());
  for (const auto& p : scheme.packets) {
    std::set<MapId> comps{graph.item(p.lo()), graph.item(p.hi())};
    out.push_back(catalog ? catalog->make_packet(std::move(comps))
                          : Packet::of(std::move(comps), 1));
  }
  return out;
}

}  // namespace fogcast
