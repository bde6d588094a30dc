#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "fogcast/io.hpp"
#include "fogcast/pointcloud.hpp"

using namespace fogcast;
namespace fs = std::filesystem;

namespace {

// Writes to a file when a name is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw Error(ErrorCode::IoError, "cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  return in;
}

void emit(const Json& j, const std::string& path, bool pretty) {
  Sink sink(path);
  sink.stream() << (pretty ? j.dump(2) : j.dump()) << '\n';
}

Octree load_octree(const std::string& path) {
  auto in = open_input(path);
  return read_octree(in);
}

void store_octree(const Octree& octree, const std::string& path) {
  Sink sink(path);
  write_octree(sink.stream(), octree);
}

BloomDigest load_bloom(const std::string& path) {
  auto in = open_input(path);
  return read_bloom(in);
}

void same_frame(const Octree& a, const Octree& b) {
  const auto same = [](const Point3& p, const Point3& q) {
    return p.x == q.x && p.y == q.y && p.z == q.z;
  };
  if (!same(a.bbox.min, b.bbox.min) || !same(a.bbox.max, b.bbox.max)) {
    throw Error(ErrorCode::ParameterMismatch, "octrees use different bounding boxes");
  }
}

BoundingBox parse_bbox(const std::string& text) {
  std::vector<double> v;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    try {
      v.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad bounding box value " + field);
    }
  }
  if (v.size() != 6) throw Error(ErrorCode::ParseError, "bounding box needs six values");
  BoundingBox box{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
  box.validate();
  return box;
}

// Smallest box around the points, widened a little so the far faces fall
// inside the cells.
BoundingBox fit_bbox(const std::vector<Point3>& points) {
  if (points.empty()) return {{0, 0, 0}, {1, 1, 1}};
  Point3 lo = points.front();
  Point3 hi = points.front();
  for (const auto& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const auto widen = [](double a, double b) {
    const double span = b - a;
    return span > 0 ? b + span * 1e-9 : a + 1.0;
  };
  return {lo, {widen(lo.x, hi.x), widen(lo.y, hi.y), widen(lo.z, hi.z)}};
}

std::pair<int, int> parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    const int w = std::stoi(text.substr(0, x));
    const int h = std::stoi(text.substr(x + 1));
    if (w < 1 || h < 1) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "grid must look like WxH, got " + text);
  }
}

void print_metrics_table(std::ostream& out, const Metrics& m) {
  const auto& t = m.totals;
  out << "scheme                    " << m.scheme << '\n'
      << "broadcast transmissions   " << t.broadcast_transmissions << '\n'
      << "coded transmissions       " << t.coded_transmissions << '\n'
      << "broadcast bytes           " << t.broadcast_bytes << '\n'
      << "cellular transmissions    " << t.cellular_transmissions << '\n'
      << "cellular bytes            " << t.cellular_bytes << '\n'
      << "satisfied vehicles        " << t.satisfied_vehicles << '\n'
      << "overall delay (s)         " << t.overall_delay_seconds << '\n'
      << "slots / active slots      " << m.slots << " / " << m.active_slots << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Index-coded map data dissemination toolkit"};
  app.require_subcommand(1);
  bool pretty = false;
  app.add_flag("--pretty", pretty, "Indented JSON and human-readable tables");

  std::string input;
  std::string output;

  auto* idxcode = app.add_subcommand("idxcode", "Minimum index coding scheme of a demand graph");
  bool raw = false;
  idxcode->add_option("demand", input, "Demand graph JSON")->required();
  idxcode->add_flag("--raw", raw, "Skip source substitution");
  idxcode->add_option("-o,--out", output, "Output file");

  auto* oracle = app.add_subcommand("oracle", "Compare the coder against exhaustive search");
  int max_n = 5;
  oracle->add_option("demand", input, "Demand graph JSON")->required();
  oracle->add_option("--max-n", max_n, "Largest graph the search accepts");

  auto* schedule = app.add_subcommand("schedule", "Run a scheduler and summarise its decisions");
  std::string mode = "online";
  schedule->add_option("scenario", input, "Scenario JSON")->required();
  schedule->add_option("--mode", mode, "online or offline")
      ->check(CLI::IsMember({"online", "offline"}));
  schedule->add_option("-o,--out", output, "Output file");

  auto* simulate = app.add_subcommand("simulate", "Replay a scenario and collect metrics");
  std::string csv;
  std::string scheme_name;
  int threads = 0;
  simulate->add_option("scenario", input, "Scenario JSON")->required();
  simulate->add_option("-o,--out", output, "Metrics JSON file");
  simulate->add_option("--csv", csv, "Long-format metrics CSV file");
  simulate->add_option("--threads", threads, "Worker threads per slot")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--scheme", scheme_name, "Override the scenario's scheme");

  auto* meetings = app.add_subcommand("meetings", "Vehicle meeting matrix from a trace CSV");
  double radius = 200.0;
  std::optional<Slot> from;
  std::optional<Slot> to;
  meetings->add_option("traces", input, "Trace CSV")->required();
  meetings->add_option("--radius", radius, "Meeting distance in meters")
      ->check(CLI::NonNegativeNumber);
  meetings->add_option("--from", from, "First slot of the window");
  meetings->add_option("--to", to, "Last slot of the window");
  meetings->add_option("-o,--out", output, "Output file");

  auto* octree = app.add_subcommand("octree", "Octree bitstream operations");
  octree->require_subcommand(1);
  std::string second;
  int depth = kDefaultOctreeDepth;
  std::string bbox_text;
  auto* oct_encode = octree->add_subcommand("encode", "Points file to octree");
  oct_encode->add_option("points", input, "Whitespace separated x y z rows")->required();
  oct_encode->add_option("-o,--out", output, "Octree file");
  oct_encode->add_option("--depth", depth, "Octree depth")->check(CLI::Range(1, 20));
  oct_encode->add_option("--bbox", bbox_text, "minx,miny,minz,maxx,maxy,maxz");
  auto* oct_decode = octree->add_subcommand("decode", "Octree to voxel centres");
  oct_decode->add_option("octree", input, "Octree file")->required();
  oct_decode->add_option("-o,--out", output, "Points file");
  auto* oct_diff = octree->add_subcommand("diff", "Difference of an observation and a reference");
  oct_diff->add_option("observed", input, "Observed octree")->required();
  oct_diff->add_option("reference", second, "Reference octree")->required();
  oct_diff->add_option("-o,--out", output, "Difference octree");
  auto* oct_apply = octree->add_subcommand("apply", "Apply a difference to a reference");
  oct_apply->add_option("reference", input, "Reference octree")->required();
  oct_apply->add_option("diff", second, "Difference octree")->required();
  oct_apply->add_option("-o,--out", output, "Result octree");
  auto* oct_xor = octree->add_subcommand("xor", "Voxel-wise XOR of two octrees");
  oct_xor->add_option("a", input, "First octree")->required();
  oct_xor->add_option("b", second, "Second octree")->required();
  oct_xor->add_option("-o,--out", output, "Result octree");

  auto* bloom = app.add_subcommand("bloom", "Bloom digests of octree voxels");
  bloom->require_subcommand(1);
  std::uint32_t bits = kDefaultBloomBits;
  std::uint32_t hashes = kDefaultBloomHashes;
  std::uint64_t bloom_seed = 0;
  std::vector<std::string> paths;
  std::string query_octree;
  auto* bl_build = bloom->add_subcommand("build", "Digest of an octree's voxels");
  bl_build->add_option("octree", input, "Octree file")->required();
  bl_build->add_option("-o,--out", output, "Digest file");
  bl_build->add_option("--bits", bits, "Bit array length")->check(CLI::PositiveNumber);
  bl_build->add_option("--hashes", hashes, "Hash functions")->check(CLI::PositiveNumber);
  bl_build->add_option("--seed", bloom_seed, "Hash seed");
  auto* bl_query = bloom->add_subcommand("query", "Membership of voxel paths");
  bl_query->add_option("digest", input, "Digest file")->required();
  bl_query->add_option("paths", paths, "Octary voxel paths");
  bl_query->add_option("--octree", query_octree, "Query every voxel of an octree");
  auto* bl_compare = bloom->add_subcommand("compare", "Bit coverage between two digests");
  bl_compare->add_option("a", input, "First digest")->required();
  bl_compare->add_option("b", second, "Second digest")->required();

  auto* gen = app.add_subcommand("gen-traces", "Synthetic grid network and traces");
  std::string grid;
  TraceConfig tc;
  tc.vehicles = 100;
  std::string mobility = "shortest";
  double rsu_fraction = 1.0;
  double block = 200.0;
  Bytes static_size = 1000;
  Bytes dynamic_size = 0;
  std::string out_dir;
  gen->add_option("--grid", grid, "Grid size WxH")->required();
  gen->add_option("--vehicles", tc.vehicles, "Vehicle count")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", tc.seed, "Random seed");
  gen->add_option("--horizon", tc.horizon, "Last departure slot bound")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--mobility", mobility, "shortest or turn")
      ->check(CLI::IsMember({"shortest", "turn"}));
  gen->add_option("--rsu-fraction", rsu_fraction, "Share of junctions with an RSU")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--block", block, "Block length in meters")->check(CLI::PositiveNumber);
  gen->add_option("--static-size", static_size, "Static item size for the scenario catalog");
  gen->add_option("--dynamic-size", dynamic_size, "Dynamic item size for the scenario catalog");
  gen->add_option("--out-dir", out_dir,
                  "Write network, traces, plans and scenario files here instead of "
                  "printing the trace CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*idxcode) {
      const auto g = demand_graph_from_json(load_json(input));
      auto scheme = one_j_idxcd(g);
      if (!raw) scheme = substitute_sources(scheme, g);
      emit(scheme_to_json(scheme, g), output, pretty);
    } else if (*oracle) {
      const auto g = demand_graph_from_json(load_json(input));
      const auto best = brute_force_min_scheme(g, max_n).size();
      const auto algo = one_j_idxcd(g).size();
      std::cout << "min=" << best << " algo=" << algo << (best == algo ? " MATCH" : " MISMATCH")
                << '\n';
      return best == algo ? 0 : 1;
    } else if (*schedule) {
      const auto s = load_scenario(input);
      s.validate();
      const auto policy = mode == "offline" ? BroadcastPolicy::Offline : BroadcastPolicy::Online;
      const auto result = run_schedule(s.network, s.catalog, s.plans,
                                       scheduler_config_of(s.config), policy);
      emit(to_json(summarize(result)), output, pretty);
    } else if (*simulate) {
      auto s = load_scenario(input);
      if (threads > 0) s.config.scheduler.threads = threads;
      if (!scheme_name.empty()) {
        auto scheme = parse_scheme(scheme_name);
        if (!scheme) throw Error(ErrorCode::ParseError, "unknown scheme " + scheme_name);
        s.config.scheme = *scheme;
      }
      const auto metrics = run(s);
      if (pretty && output.empty()) {
        print_metrics_table(std::cout, metrics);
      } else {
        emit(to_json(metrics), output, pretty);
      }
      if (!csv.empty()) {
        Sink sink(csv);
        write_metrics_csv(sink.stream(), metrics);
      }
    } else if (*meetings) {
      auto in = open_input(input);
      const auto samples = read_trace_csv(in);
      std::optional<SlotWindow> window;
      if (from || to) {
        window = SlotWindow{from.value_or(std::numeric_limits<Slot>::min()),
                            to.value_or(std::numeric_limits<Slot>::max())};
      }
      const auto matrix = meeting_matrix(samples, radius, window);
      Sink sink(output);
      if (pretty) {
        sink.stream() << "vehicle";
        for (const auto& v : matrix.vehicles) sink.stream() << ',' << v;
        sink.stream() << '\n';
        for (std::size_t i = 0; i < matrix.dimension(); ++i) {
          sink.stream() << matrix.vehicles[i];
          for (std::size_t k = 0; k < matrix.dimension(); ++k) {
            sink.stream() << ',' << matrix.at(i, k);
          }
          sink.stream() << '\n';
        }
      } else {
        write_matrix_csv(sink.stream(), matrix);
      }
    } else if (*oct_encode) {
      auto in = open_input(input);
      const auto points = read_points(in);
      const auto box = bbox_text.empty() ? fit_bbox(points) : parse_bbox(bbox_text);
      store_octree(octree_encode(points, box, depth), output);
    } else if (*oct_decode) {
      const auto centers = voxel_centers(load_octree(input));
      Sink sink(output);
      write_points(sink.stream(), centers);
    } else if (*oct_diff || *oct_apply || *oct_xor) {
      const auto a = load_octree(input);
      const auto b = load_octree(second);
      same_frame(a, b);
      const auto va = octree_to_voxels(a);
      const auto vb = octree_to_voxels(b);
      VoxelSet result;
      if (*oct_diff) {
        result = diff_encode(va, vb);
      } else if (*oct_apply) {
        result = diff_apply(va, vb);
      } else {
        result = voxel_xor(va, vb);
      }
      store_octree(voxels_to_octree(result, a.bbox), output);
    } else if (*bl_build) {
      const auto digest = bloom_build(octree_to_voxels(load_octree(input)), bits, hashes,
                                      bloom_seed);
      Sink sink(output);
      write_bloom(sink.stream(), digest);
    } else if (*bl_query) {
      const auto digest = load_bloom(input);
      if (!query_octree.empty()) {
        for (const auto& v : octree_to_voxels(load_octree(query_octree)).voxels) {
          paths.push_back(v);
        }
      }
      Json rows = Json::array();
      std::size_t hits = 0;
      for (const auto& p : paths) {
        const bool hit = bloom_query(digest, p);
        hits += hit;
        rows.push_back({{"path", p}, {"maybe_present", hit}});
      }
      emit({{"queries", paths.size()}, {"hits", hits}, {"results", rows}}, "", pretty);
    } else if (*bl_compare) {
      const auto c = bloom_compare(load_bloom(input), load_bloom(second));
      emit({{"popcount_a", c.popcount_a},
            {"popcount_b", c.popcount_b},
            {"a_covers_b", c.a_covers_b},
            {"b_covers_a", c.b_covers_a}},
           "", pretty);
    } else if (*gen) {
      const auto [w, h] = parse_grid(grid);
      tc.mobility = mobility == "turn" ? Mobility::RandomTurn : Mobility::ShortestPath;
      const auto network = grid_network(w, h, block, rsu_fraction, tc.seed);
      const auto traces = synthesize_traces(network, tc);
      if (out_dir.empty()) {
        write_trace_csv(std::cout, traces.samples);
      } else {
        const fs::path dir(out_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir);
        save_json(dir / "network.json", to_json(network));
        save_json(dir / "plans.json", to_json(traces.plans));
        std::ostringstream csv_text;
        write_trace_csv(csv_text, traces.samples);
        write_text(dir / "traces.csv", csv_text.str());
        MapDataCatalog catalog;
        catalog.set_default_static_size(static_size);
        catalog.set_default_dynamic_size(dynamic_size);
        ScenarioConfig config;
        config.scheduler.seed = tc.seed;
        save_json(dir / "scenario.json", Json{{"network", "network.json"},
                                              {"catalog", to_json(catalog)},
                                              {"plans", "plans.json"},
                                              {"config", to_json(config)}});
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
