#include "fogcast/meeting.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace fogcast {

namespace {

// (junction, slot) -> vehicle -> index of that junction in the vehicle's path
using Presence = std::map<std::pair<Slot, JunctionId>, std::map<VehicleId, std::size_t>>;

Presence presence(std::span<const TripPlan> plans) {
  Presence out;
  for (const auto& p : plans) {
    for (std::size_t i = 0; i < p.path.size(); ++i) {
      out[{p.junction_times[i], p.path[i]}][p.vehicle] = i;
    }
  }
  return out;
}

}  // namespace

std::optional<std::vector<std::size_t>> MeetingRelationGraph::topological_order() const {
  std::vector<std::size_t> indegree(nodes.size(), 0);
  std::vector<std::vector<std::size_t>> out(nodes.size());
  for (auto [a, b] : edges) {
    out[a].push_back(b);
    ++indegree[b];
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t u = ready.front();
    ready.pop_front();
    order.push_back(u);
    for (std::size_t v : out[u]) {
      if (--indegree[v] == 0) ready.push_back(v);
    }
  }
  if (order.size() != nodes.size()) return std::nullopt;
  return order;
}

MeetingRelationGraph build_meeting_graph(std::span<const TripPlan> plans) {
  MeetingRelationGraph g;
  for (const auto& [key, members] : presence(plans)) {
    if (members.size() < 2) continue;
    MeetingEvent ev;
    ev.slot = key.first;
    ev.junction = key.second;
    for (const auto& [v, _] : members) ev.vehicles.insert(v);
    g.nodes.push_back(std::move(ev));
  }
  std::map<VehicleId, std::vector<std::size_t>> by_vehicle;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    for (const auto& v : g.nodes[i].vehicles) by_vehicle[v].push_back(i);
  }
  for (const auto& [v, events] : by_vehicle) {
    for (std::size_t i = 0; i < events.size(); ++i) {
      for (std::size_t j = i + 1; j < events.size(); ++j) {
        const auto& a = g.nodes[events[i]];
        const auto& b = g.nodes[events[j]];
        if (a.slot < b.slot) g.edges.insert({events[i], events[j]});
        if (b.slot < a.slot) g.edges.insert({events[j], events[i]});
      }
    }
  }
  return g;
}

std::vector<MeetingViolation> check_single_meeting(std::span<const TripPlan> plans) {
  struct Touch {
    Slot slot;
    std::size_t ia;
    std::size_t ib;
  };
  std::map<std::pair<VehicleId, VehicleId>, std::vector<Touch>> touches;
  for (const auto& [key, members] : presence(plans)) {
    for (auto a = members.begin(); a != members.end(); ++a) {
      for (auto b = std::next(a); b != members.end(); ++b) {
        touches[{a->first, b->first}].push_back({key.first, a->second, b->second});
      }
    }
  }
  std::vector<MeetingViolation> out;
  for (auto& [pair, list] : touches) {
    std::sort(list.begin(), list.end(),
              [](const Touch& x, const Touch& y) { return x.slot < y.slot; });
    MeetingViolation v{pair.first, pair.second, {}, 0};
    for (std::size_t i = 0; i < list.size(); ++i) {
      v.slots.push_back(list[i].slot);
      const bool continues = i > 0 && list[i].ia == list[i - 1].ia + 1 &&
                             list[i].ib == list[i - 1].ib + 1;
      if (!continues) ++v.episodes;
    }
    if (v.episodes > 1) out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::size_t> MeetingMatrix::histogram() const {
  std::vector<std::size_t> h(1, 0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    for (std::size_t j = i + 1; j < counts.size(); ++j) {
      const auto k = static_cast<std::size_t>(counts[i][j]);
      if (h.size() <= k) h.resize(k + 1, 0);
      ++h[k];
    }
  }
  return h;
}

MeetingMatrix meeting_matrix(std::span<const TraceSample> samples, double radius,
                             std::optional<SlotWindow> window) {
  std::map<VehicleId, std::map<Slot, std::pair<double, double>>> tracks;
  for (const auto& s : samples) {
    if (window && (s.slot < window->first || s.slot > window->last)) continue;
    tracks[s.vehicle][s.slot] = {s.x, s.y};
  }
  for (const auto& s : samples) tracks.try_emplace(s.vehicle);

  MeetingMatrix m;
  for (const auto& [v, _] : tracks) m.vehicles.push_back(v);
  const std::size_t n = m.vehicles.size();
  m.counts.assign(n, std::vector<int>(n, 0));

  std::vector<const std::map<Slot, std::pair<double, double>>*> rows;
  for (const auto& v : m.vehicles) rows.push_back(&tracks.at(v));

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = *rows[i];
      const auto& b = *rows[j];
      int episodes = 0;
      bool close = false;
      std::optional<Slot> prev;
      for (const auto& [slot, pa] : a) {
        auto it = b.find(slot);
        if (it == b.end()) {
          close = false;
          prev = slot;
          continue;
        }
        const bool gap = prev && slot != *prev + 1;
        const double d = std::hypot(pa.first - it->second.first, pa.second - it->second.second);
        if (d <= radius) {
          if (!close || gap) ++episodes;
          close = true;
        } else {
          close = false;
        }
        prev = slot;
      }
      m.counts[i][j] = m.counts[j][i] = episodes;
    }
  }
  return m;
}

}  // namespace fogcast
