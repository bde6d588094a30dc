#include "fogcast/baselines.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace fogcast {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool served(const Demand& d, const DemandGraph& g, const std::set<NodePacket>& packets) {
  std::set<int> known = g.prior_extra;
  known.insert(d.from);
  return decodable_nodes(known, packets).contains(d.to);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, const std::string& rsu, std::int64_t slot) {
  std::uint64_t h = splitmix64(seed);
  for (unsigned char c : rsu) h = splitmix64(h ^ c);
  return splitmix64(h ^ static_cast<std::uint64_t>(slot));
}

std::vector<NodePacket> baseline_rand(const DemandGraph& d, std::uint64_t seed) {
  std::set<int> targets;
  for (const auto& dem : d.demands) {
    if (!d.prior_extra.contains(dem.to)) targets.insert(dem.to);
  }
  std::vector<NodePacket> out;
  for (int k : targets) out.push_back(NodePacket::source(k));
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<NodePacket> baseline_on_demand(const DemandGraph& d) {
  std::vector<Demand> open;
  for (const auto& dem : d.demands) {
    if (!d.prior_extra.contains(dem.to)) open.push_back(dem);
  }
  std::vector<NodePacket> out;
  if (open.empty()) return out;

  std::map<int, int> indegree;
  for (const auto& dem : open) ++indegree[dem.to];
  auto most_demanded = [&](const std::vector<Demand>& pending) {
    int best = 0;
    int best_count = -1;
    for (const auto& dem : pending) {
      const int c = indegree[dem.to];
      if (c > best_count || (c == best_count && dem.to < best)) {
        best = dem.to;
        best_count = c;
      }
    }
    return best;
  };

  std::set<NodePacket> sent;
  auto emit = [&](NodePacket p) {
    out.push_back(p);
    sent.insert(p);
  };
  emit(NodePacket::source(most_demanded(open)));

  for (;;) {
    std::vector<Demand> pending;
    for (const auto& dem : open) {
      if (!served(dem, d, sent)) pending.push_back(dem);
    }
    if (pending.empty()) break;
    const int x = most_demanded(pending);
    std::vector<Demand> into_x;
    for (const auto& dem : pending) {
      if (dem.to == x) into_x.push_back(dem);
    }
    std::optional<NodePacket> pick;
    for (int y = 1; y <= d.n && !pick; ++y) {
      if (y == x) continue;
      auto trial = sent;
      trial.insert(NodePacket::coded(x, y));
      if (std::all_of(into_x.begin(), into_x.end(),
                      [&](const Demand& dem) { return served(dem, d, trial); })) {
        pick = NodePacket::coded(x, y);
      }
    }
    emit(pick.value_or(NodePacket::source(x)));
  }
  return out;
}

}  // namespace fogcast
