#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "fogcast/io.hpp"
#include "support.hpp"

using namespace fogcast;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "fogcast_io_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Scenario sample_scenario() {
  Scenario s;
  s.network = grid_network(3, 3, 200, 0.5, 1);
  TraceConfig tc;
  tc.vehicles = 12;
  tc.horizon = 8;
  tc.seed = 4;
  s.plans = synthesize_traces(s.network, tc).plans;
  s.catalog.set_default_static_size(900);
  s.catalog.set_static_size("J0_0-J0_1", 1234);
  s.catalog.set_default_dynamic_size(50);
  s.catalog.set_coded_size({"s:J0_0-J0_1", "s:J0_0-J1_0"}, 777);
  s.config.scheme = Scheme::OflSchd;
  s.config.scheduler.capacity = 1500;
  s.config.scheduler.tau = 2;
  s.config.scheduler.seed = 11;
  s.config.slot_seconds = 0.5;
  return s;
}

}  // namespace

TEST_CASE("network and catalog round-trip") {
  auto s = sample_scenario();
  auto net = network_from_json(to_json(s.network));
  CHECK(to_json(net) == to_json(s.network));
  CHECK(net.rsus() == s.network.rsus());

  auto cat = catalog_from_json(to_json(s.catalog));
  CHECK(to_json(cat) == to_json(s.catalog));
  CHECK(cat.packet_size({"s:J0_0-J0_1", "s:J0_0-J1_0"}) == 777);
  CHECK(cat.static_size("J0_0-J0_1") == 1234);

  CHECK_THROWS_AS(network_from_json(Json::array()), Error);
  CHECK_THROWS_AS(network_from_json(Json{{"junctions", 3}}), Error);
  CHECK_THROWS_AS(catalog_from_json(Json{{"coded_sizes", {{{"components", {"x"}}, {"size", 3}}}}}),
                  Error);
}

TEST_CASE("plans and config round-trip") {
  auto s = sample_scenario();
  auto plans = plans_from_json(to_json(s.plans), s.network);
  CHECK(to_json(plans) == to_json(s.plans));

  auto cfg = config_from_json(to_json(s.config));
  CHECK(to_json(cfg) == to_json(s.config));
  CHECK(cfg.scheme == Scheme::OflSchd);
  CHECK(cfg.scheduler.capacity == Bytes{1500});

  auto defaults = config_from_json(Json::object());
  CHECK_FALSE(defaults.scheduler.capacity);
  CHECK(defaults.scheduler.tau == 1);
  CHECK_THROWS_AS(config_from_json(Json{{"scheme", "Fastest"}}), Error);
  CHECK_THROWS_AS(config_from_json(Json{{"tau", "soon"}}), Error);
}

TEST_CASE("scenario files with references and traces") {
  auto dir = scratch("scenario");
  auto s = sample_scenario();
  save_json(dir / "net.json", to_json(s.network));
  save_json(dir / "catalog.json", to_json(s.catalog));
  std::vector<TraceSample> samples;
  for (const auto& p : s.plans) {
    for (std::size_t i = 0; i < p.path.size(); ++i) {
      const auto& j = s.network.junction(p.path[i]);
      samples.push_back({p.vehicle, p.junction_times[i], j.x, j.y, j.id, ""});
    }
  }
  std::ostringstream csv;
  write_trace_csv(csv, samples);
  write_text(dir / "traces.csv", csv.str());
  save_json(dir / "scenario.json", Json{{"network", "net.json"},
                                        {"catalog", "catalog.json"},
                                        {"traces", "traces.csv"},
                                        {"config", to_json(s.config)}});

  auto loaded = load_scenario(dir / "scenario.json");
  CHECK(to_json(loaded.plans) == to_json(s.plans));
  CHECK(run(loaded) == run(s));

  save_json(dir / "inline.json", Json{{"network", to_json(s.network)},
                                      {"catalog", to_json(s.catalog)},
                                      {"plans", to_json(s.plans)},
                                      {"config", to_json(s.config)}});
  CHECK(run(load_scenario(dir / "inline.json")) == run(s));

  CHECK_THROWS_AS(load_scenario(dir / "missing.json"), Error);
  write_text(dir / "broken.json", "{\"network\": ");
  try {
    load_scenario(dir / "broken.json");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
}

TEST_CASE("demand graphs and schemes round-trip") {
  auto g = DemandGraph::make("J", 4, {{1, 3}, {3, 2}, {2, 1}, {2, 4}}, {});
  auto back = demand_graph_from_json(to_json(g));
  CHECK(back.demands == g.demands);
  CHECK(back.n == 4);
  CHECK(back.junction == "J");

  auto scheme = one_j_idxcd(g);
  auto json = scheme_to_json(scheme, g);
  CHECK(json.at("size") == 3);
  CHECK(scheme_from_json(json).packets == scheme.packets);

  CHECK_THROWS_AS(demand_graph_from_json(Json{{"n", 3}, {"demands", {{1, 1}}}}), Error);
  CHECK_THROWS_AS(demand_graph_from_json(Json{{"n", 3}}), Error);
  CHECK_THROWS_AS(scheme_from_json(Json{{"packets", {{{"nodes", {1, 2, 3}}}}}}), Error);
}

TEST_CASE("metrics and decision summaries round-trip") {
  auto s = sample_scenario();
  auto m = run(s);
  CHECK(metrics_from_json(to_json(m)) == m);
  CHECK(metrics_from_json(Json::parse(to_json(m).dump())) == m);

  auto result = run_schedule(s.network, s.catalog, s.plans, scheduler_config_of(s.config),
                             policy_of(s.config));
  auto summary = summarize(result);
  auto again = summary_from_json(Json::parse(to_json(summary).dump()));
  CHECK(to_json(again) == to_json(summary));
  CHECK(again.decision.broadcast_static == summary.decision.broadcast_static);
  CHECK(again.cellular_bytes == result.cellular_bytes());
}

TEST_CASE("trace csv") {
  std::istringstream in(
      "vehicle_id,slot,x,y,junction_id,segment_id\n"
      "a,0,1.5,2,J,e\n"
      "b,3,0,0\n"
      "\n"
      "c,4,7,8,K\n");
  auto samples = read_trace_csv(in);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].x == 1.5);
  CHECK(samples[0].segment == "e");
  CHECK(samples[1].junction.empty());
  CHECK(samples[2].junction == "K");

  std::ostringstream out;
  write_trace_csv(out, samples);
  std::istringstream back(out.str());
  auto again = read_trace_csv(back);
  REQUIRE(again.size() == 3);
  CHECK(again[2].slot == 4);
  CHECK(again[0].y == 2.0);

  std::istringstream bad("a,zero,1,2\n");
  CHECK_THROWS_AS(read_trace_csv(bad), Error);
  std::istringstream short_row("a,0,1\n");
  CHECK_THROWS_AS(read_trace_csv(short_row), Error);
}

TEST_CASE("metrics and matrix csv") {
  auto m = run(sample_scenario());
  std::ostringstream out;
  write_metrics_csv(out, m);
  std::size_t lines = 0;
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "slot,rsu,metric,value");
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 7 * m.records.size());

  MeetingMatrix mm{{"a", "b"}, {{0, 2}, {2, 0}}};
  std::ostringstream mo;
  write_matrix_csv(mo, mm);
  CHECK(mo.str() == "0,2\n2,0\n");
}
