#include "support.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace testing {

namespace {

MapId m(int k) { return "m" + std::to_string(k); }

std::vector<fogcast::Packet> as_packets(const std::vector<std::set<MapId>>& sets) {
  std::vector<fogcast::Packet> out;
  for (const auto& s : sets) out.push_back(fogcast::Packet::of(s, 1));
  return out;
}

bool satisfied(const std::vector<std::set<MapId>>& chosen, const DemandGraph& g) {
  const auto packets = as_packets(chosen);
  for (const auto& d : g.demands) {
    std::set<MapId> prior{m(d.from)};
    for (int p : g.prior_extra) prior.insert(m(p));
    if (!fogcast::decode_closure(prior, packets).contains(m(d.to))) return false;
  }
  return true;
}

bool search(const std::vector<std::set<MapId>>& pool, std::size_t start, std::size_t left,
            std::vector<std::set<MapId>>& chosen, const DemandGraph& g) {
  if (left == 0) return satisfied(chosen, g);
  for (std::size_t i = start; i + left <= pool.size(); ++i) {
    chosen.push_back(pool[i]);
    if (search(pool, i + 1, left - 1, chosen, g)) return true;
    chosen.pop_back();
  }
  return false;
}

}  // namespace

DemandGraph graph(int n, std::initializer_list<std::pair<int, int>> demands,
                  std::set<int> prior) {
  std::set<fogcast::Demand> ds;
  for (auto [a, b] : demands) ds.insert({a, b});
  return DemandGraph::make("r", n, std::move(ds), std::move(prior));
}

std::set<std::set<MapId>> components(const IndexCodingScheme& scheme) {
  std::set<std::set<MapId>> out;
  for (const auto& p : scheme.packets) out.insert({m(p.lo()), m(p.hi())});
  return out;
}

std::set<std::set<MapId>> components(
    std::initializer_list<std::initializer_list<int>> packets) {
  std::set<std::set<MapId>> out;
  for (const auto& p : packets) {
    std::set<MapId> s;
    for (int k : p) s.insert(m(k));
    out.insert(s);
  }
  return out;
}

bool closure_decodable(const IndexCodingScheme& scheme, const DemandGraph& g) {
  const auto sets = components(scheme);
  return satisfied(std::vector<std::set<MapId>>(sets.begin(), sets.end()), g);
}

std::size_t closure_min_size(const DemandGraph& g) {
  std::vector<std::set<MapId>> pool;
  for (int a = 1; a <= g.n; ++a) {
    pool.push_back({m(a)});
    for (int b = a + 1; b <= g.n; ++b) pool.push_back({m(a), m(b)});
  }
  for (std::size_t size = 0; size <= pool.size(); ++size) {
    std::vector<std::set<MapId>> chosen;
    if (search(pool, 0, size, chosen, g)) return size;
  }
  return pool.size();
}

DemandGraph random_graph(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution pick(density);
  std::set<fogcast::Demand> ds;
  for (int a = 1; a <= n; ++a) {
    for (int b = 1; b <= n; ++b) {
      if (a != b && pick(rng)) ds.insert({a, b});
    }
  }
  return DemandGraph::make("r", n, std::move(ds));
}

}  // namespace testing

namespace testing {

std::size_t junction_minimum_total(const fogcast::RoadNetwork& network,
                                   std::span<const fogcast::TripPlan> plans) {
  std::map<std::pair<fogcast::Slot, fogcast::JunctionId>, std::set<fogcast::Demand>> groups;
  for (const auto& p : plans) {
    for (std::size_t i = 1; i + 1 < p.path.size(); ++i) {
      const auto& j = p.path[i];
      if (!network.is_rsu(j)) continue;
      const auto& inc = network.incident(j);
      const auto index = [&](const fogcast::SegmentId& s) {
        return static_cast<int>(std::find(inc.begin(), inc.end(), s) - inc.begin()) + 1;
      };
      groups[{p.junction_times[i], j}].insert({index(p.segments[i - 1]), index(p.segments[i])});
    }
  }
  std::size_t total = 0;
  for (const auto& [key, demands] : groups) {
    DemandGraph g;
    g.n = static_cast<int>(network.incident(key.second).size());
    g.demands = demands;
    total += closure_min_size(g);
  }
  return total;
}

}  // namespace testing
