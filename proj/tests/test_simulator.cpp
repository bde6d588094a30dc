#include <cmath>
#include <random>

#include "doctest.h"
#include "fogcast/simulator.hpp"
#include "support.hpp"

using namespace fogcast;

namespace {

constexpr double kFrame = 1024.0 * 8.0 / 6e6;

// Junction J with arms A, B and C; the RSU sits at J.
RoadNetwork star() {
  return RoadNetwork({{"A", -1, 0}, {"B", 0, 1}, {"C", 1, 0}, {"J", 0, 0}},
                     {{"AJ", "A", "J"}, {"BJ", "B", "J"}, {"CJ", "C", "J"}}, {"J"});
}

Scenario scenario_of(RoadNetwork net, std::vector<TripPlan> plans, Scheme scheme) {
  Scenario s;
  s.network = std::move(net);
  s.catalog.set_default_static_size(1000);
  s.plans = std::move(plans);
  s.config.scheme = scheme;
  return s;
}

Scenario random_scenario(std::uint64_t seed, int vehicles, Scheme scheme,
                         Mobility mobility = Mobility::ShortestPath) {
  Scenario s;
  s.network = grid_network(4, 4);
  TraceConfig tc;
  tc.vehicles = vehicles;
  tc.horizon = 12;
  tc.seed = seed;
  tc.mobility = mobility;
  s.plans = synthesize_traces(s.network, tc).plans;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Bytes> size(500, 3000);
  for (const auto& [id, seg] : s.network.segments()) s.catalog.set_static_size(id, size(rng));
  s.config.scheme = scheme;
  s.config.scheduler.seed = seed;
  return s;
}

std::map<std::pair<Slot, JunctionId>, std::uint64_t> per_slot(const Metrics& m) {
  std::map<std::pair<Slot, JunctionId>, std::uint64_t> out;
  for (const auto& r : m.records) out[{r.slot, r.rsu}] = r.broadcast_transmissions;
  return out;
}

std::uint64_t at(const std::map<std::pair<Slot, JunctionId>, std::uint64_t>& m,
                 const std::pair<Slot, JunctionId>& key) {
  auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

}  // namespace

TEST_CASE("overall_delay examples") {
  const std::vector<Packet> frame{Packet::source("s:a", 1024)};
  CHECK(overall_delay(frame) == doctest::Approx(1.3653e-3).epsilon(1e-4));
  CHECK(overall_delay(std::vector<Packet>{}) == 0.0);

  const std::vector<Packet> coded{Packet::coded({"s:a", "s:b"}, 512),
                                   Packet::coded({"s:c", "s:d"}, 512)};
  CHECK(std::abs(overall_delay(coded, 1e-3, 1024, 6e6) - (kFrame + 2e-3)) < 1e-12);

  // 3000 bytes span three frames.
  const std::vector<Packet> three{Packet::source("s:a", 1000), Packet::source("s:b", 2000)};
  CHECK(std::abs(overall_delay(three) - 3 * kFrame) < 1e-12);
  CHECK_THROWS_AS(overall_delay(three, 1e-3, 0, 6e6), Error);
}

TEST_CASE("two opposite vehicles share one coded packet") {
  RoadNetwork net({{"A", 0, 0}, {"J", 1, 0}, {"B", 2, 0}},
                  {{"AJ", "A", "J"}, {"BJ", "B", "J"}}, {"J"});
  std::vector<TripPlan> plans{make_plan(net, "c1", {"A", "J", "B"}, {0, 1, 2}),
                              make_plan(net, "c2", {"B", "J", "A"}, {0, 1, 2})};
  auto m = run(scenario_of(net, plans, Scheme::OneJIdxCd));
  CHECK(m.totals.broadcast_transmissions == 1);
  CHECK(m.totals.coded_transmissions == 1);
  CHECK(m.totals.cellular_transmissions == 0);
  CHECK(m.totals.satisfied_vehicles == 2);

  auto rand = run(scenario_of(net, plans, Scheme::Rand));
  CHECK(rand.totals.broadcast_transmissions == 2);
}

TEST_CASE("three vehicles in a turning cycle need two packets") {
  auto net = star();
  // AJ -> CJ, BJ -> AJ, CJ -> BJ: node 1 -> 3, 2 -> 1, 3 -> 2.
  std::vector<TripPlan> plans{make_plan(net, "c1", {"A", "J", "C"}, {0, 1, 2}),
                              make_plan(net, "c2", {"B", "J", "A"}, {0, 1, 2}),
                              make_plan(net, "c3", {"C", "J", "B"}, {0, 1, 2})};
  auto coded = run(scenario_of(net, plans, Scheme::OneJIdxCd));
  CHECK(coded.totals.broadcast_transmissions == 2);
  CHECK(coded.totals.cellular_transmissions == 0);
  auto rand = run(scenario_of(net, plans, Scheme::Rand));
  CHECK(rand.totals.broadcast_transmissions == 3);
  auto ondemand = run(scenario_of(net, plans, Scheme::OnDemand));
  CHECK(ondemand.totals.broadcast_transmissions >= 2);
  CHECK(ondemand.totals.broadcast_transmissions <= 3);
}

TEST_CASE("empty plans give all-zero metrics") {
  for (auto scheme : {Scheme::Rand, Scheme::OneJIdxCd, Scheme::OflSchd}) {
    auto m = run(scenario_of(star(), {}, scheme));
    Metrics zero;
    zero.scheme = std::string(to_string(scheme));
    CHECK(m == zero);
  }
}

TEST_CASE("invalid scenarios list every problem") {
  auto s = scenario_of(star(), {}, Scheme::OneJIdxCdPI);
  s.config.scheduler.prior_segments = {"nowhere"};
  s.config.slot_seconds = 0;
  s.config.delay.mtu = 0;
  auto plan = make_plan(s.network, "c1", {"A", "J", "C"}, {0, 1, 2});
  s.plans = {plan, plan};
  s.plans[1].junction_times = {0, 0, 1};
  try {
    run(s);
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.code() == ErrorCode::ScenarioInvalid);
    CHECK(e.diagnostics().size() == 5);
  }
}

TEST_CASE("scheme names round-trip") {
  for (auto s : {Scheme::Rand, Scheme::OneJIdxCd, Scheme::OneJIdxCdPI, Scheme::OnDemand,
                 Scheme::OnlSchd, Scheme::OflSchd}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK_FALSE(parse_scheme("bogus"));
  CHECK(parse_rand_mode("trip") == RandMode::Trip);
}

TEST_CASE("run is deterministic") {
  for (auto scheme : {Scheme::Rand, Scheme::OnlSchd, Scheme::OflSchd}) {
    auto s = random_scenario(5, 30, scheme);
    s.config.scheduler.capacity = 2000;
    s.config.rand_mode = RandMode::Trip;
    CHECK(run(s) == run(s));
    s.config.scheduler.threads = 4;
    auto threaded = run(s);
    s.config.scheduler.threads = 1;
    CHECK(threaded == run(s));
  }
}

TEST_CASE("metric totals and requirement conservation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (auto scheme : {Scheme::Rand, Scheme::OneJIdxCd, Scheme::OnlSchd, Scheme::OflSchd}) {
      auto s = random_scenario(seed, 25, scheme, Mobility::RandomTurn);
      s.catalog.set_default_dynamic_size(200);
      s.config.scheduler.capacity = 2500;
      auto m = run(s);
      MetricTotals sum;
      for (const auto& r : m.records) {
        sum.broadcast_transmissions += r.broadcast_transmissions;
        sum.coded_transmissions += r.coded_transmissions;
        sum.broadcast_bytes += r.broadcast_bytes;
        sum.cellular_transmissions += r.cellular_transmissions;
        sum.cellular_bytes += r.cellular_bytes;
        sum.satisfied_vehicles += r.satisfied_vehicles;
        sum.overall_delay_seconds += r.overall_delay_seconds;
      }
      CHECK(sum == m.totals);
      CHECK(m.static_requirements + m.dynamic_requirements ==
            m.met_by_broadcast + m.met_by_cellular + m.met_by_prior);
      CHECK(m.active_slots <= m.slots);
    }
  }
}

TEST_CASE("per-slot ordering of single junction schemes") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto coded = per_slot(run(random_scenario(seed, 40, Scheme::OneJIdxCd)));
    const auto ondemand = per_slot(run(random_scenario(seed, 40, Scheme::OnDemand)));
    const auto rand = per_slot(run(random_scenario(seed, 40, Scheme::Rand)));
    auto pi_scenario = random_scenario(seed, 40, Scheme::OneJIdxCdPI);
    pi_scenario.config.scheduler.prior_segments = {"J1_1-J1_2", "J2_1-J2_2"};
    const auto pi = per_slot(run(pi_scenario));
    std::set<std::pair<Slot, JunctionId>> keys;
    for (const auto* m : {&coded, &ondemand, &rand, &pi}) {
      for (const auto& [k, v] : *m) keys.insert(k);
    }
    for (const auto& k : keys) {
      CHECK(at(coded, k) <= at(ondemand, k));
      CHECK(at(ondemand, k) <= at(rand, k));
      CHECK(at(pi, k) <= at(coded, k));
    }
  }
}

TEST_CASE("per-junction coding meets the sum of junction minima") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    auto s = random_scenario(seed, 30, Scheme::OneJIdxCd);
    REQUIRE(check_single_meeting(s.plans).empty());
    auto m = run(s);
    CHECK(m.totals.broadcast_transmissions == testing::junction_minimum_total(s.network, s.plans));
  }
}

TEST_CASE("more meetings never mean fewer transmissions") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (auto scheme : {Scheme::Rand, Scheme::OneJIdxCd, Scheme::OnDemand, Scheme::OnlSchd,
                        Scheme::OflSchd}) {
      auto base = random_scenario(seed, 20, scheme);
      auto crowded = base;
      // A companion driving the same trip makes every meeting of the original
      // a meeting of the pair as well.
      for (const auto& p : base.plans) {
        auto twin = p;
        twin.vehicle = p.vehicle + "b";
        crowded.plans.push_back(twin);
      }
      CHECK(run(crowded).totals.broadcast_transmissions >=
            run(base).totals.broadcast_transmissions);
    }
  }
}

TEST_CASE("synthetic traces") {
  auto grid = grid_network(5, 5);
  CHECK(grid.junctions().size() == 25);
  CHECK(grid.segments().size() == 40);
  CHECK(grid.rsus().size() == 25);
  CHECK(grid_network(5, 5, 200, 0.4, 3).rsus().size() == 10);

  TraceConfig tc;
  tc.vehicles = 100;
  tc.horizon = 60;
  tc.seed = 42;
  auto traces = synthesize_traces(grid, tc);
  CHECK(traces.plans.size() == 100);
  CHECK(check_single_meeting(traces.plans).empty());
  for (const auto& p : traces.plans) CHECK_NOTHROW(validate_plan(p, grid));

  auto again = synthesize_traces(grid, tc);
  REQUIRE(again.samples.size() == traces.samples.size());
  for (std::size_t i = 0; i < again.samples.size(); ++i) {
    CHECK(again.samples[i].vehicle == traces.samples[i].vehicle);
    CHECK(again.samples[i].slot == traces.samples[i].slot);
    CHECK(again.samples[i].junction == traces.samples[i].junction);
  }

  tc.vehicles = 0;
  auto none = synthesize_traces(grid, tc);
  CHECK(none.plans.empty());
  CHECK(none.samples.empty());

  tc.vehicles = 40;
  tc.mobility = Mobility::RandomTurn;
  for (const auto& p : synthesize_traces(grid, tc).plans) {
    CHECK_NOTHROW(validate_plan(p, grid));
    CHECK(std::set<JunctionId>(p.path.begin(), p.path.end()).size() == p.path.size());
  }

  RoadNetwork split({{"A", 0, 0}, {"B", 1, 0}, {"C", 5, 5}, {"D", 6, 5}},
                    {{"AB", "A", "B"}, {"CD", "C", "D"}}, {});
  tc.vehicles = 1;
  CHECK_THROWS_AS(synthesize_traces(split, tc), Error);
}

TEST_CASE("plans rebuilt from samples match the generated plans") {
  auto grid = grid_network(4, 4);
  TraceConfig tc;
  tc.vehicles = 30;
  tc.seed = 9;
  auto traces = synthesize_traces(grid, tc);
  auto rebuilt = plans_from_traces(grid, traces.samples);
  REQUIRE(rebuilt.size() == traces.plans.size());
  std::map<VehicleId, TripPlan> by_id;
  for (const auto& p : traces.plans) by_id[p.vehicle] = p;
  for (const auto& p : rebuilt) {
    const auto& want = by_id.at(p.vehicle);
    CHECK(p.path == want.path);
    CHECK(p.junction_times == want.junction_times);
    CHECK(p.segment_times == want.segment_times);
  }

  // Dwell and coordinate-only samples.
  std::vector<TraceSample> samples{{"c", 0, 0, 0, "J0_0", ""},
                                   {"c", 1, 3, 2, "", ""},
                                   {"c", 2, 100, 0, "", ""},
                                   {"c", 3, 199, 1, "", ""}};
  auto plans = plans_from_traces(grid, samples);
  REQUIRE(plans.size() == 1);
  CHECK(plans[0].path == std::vector<JunctionId>{"J0_0", "J1_0"});
  CHECK(plans[0].junction_times == std::vector<Slot>{0, 3});
  CHECK(plans[0].segment_times == std::vector<Slot>{1});

  std::vector<TraceSample> jump{{"c", 0, 0, 0, "J0_0", ""}, {"c", 1, 0, 0, "J2_2", ""}};
  CHECK_THROWS_AS(plans_from_traces(grid, jump), Error);
}

TEST_CASE("predownload distance histogram") {
  RoadNetwork net({{"A", 0, 1}, {"B", 1, 1}, {"C", 2, 1}, {"D", 1, 0}, {"E", 1, 2}},
                  {{"AB", "A", "B"}, {"BC", "B", "C"}, {"BD", "B", "D"}, {"BE", "B", "E"}},
                  {"E", "B"});
  CHECK(predownload_distance_histogram({}, net).empty());

  std::vector<AdvanceRecord> adjacent{{"B", 0, "BC", {"c1"}, 0}};
  CHECK(predownload_distance_histogram(adjacent, net) == std::map<int, std::uint64_t>{{0, 1}});

  Scenario s;
  s.network = net;
  s.catalog.set_default_static_size(1);
  s.plans = {make_plan(net, "c1", {"E", "B", "C"}, {0, 1, 2}),
             make_plan(net, "c2", {"A", "B", "D"}, {0, 1, 2})};
  s.config.scheme = Scheme::OflSchd;
  s.config.scheduler.capacity = 1;
  auto m = run(s);
  CHECK(m.predownload_histogram == std::map<int, std::uint64_t>{{1, 1}});
  CHECK(m.totals.cellular_transmissions == 0);
}
