#pragma once

// JSON and CSV formats for networks, catalogs, plans, scenarios, demand
// graphs, schemes, metrics and schedule summaries. Malformed input raises
// ParseError; unreadable or unwritable files raise IoError.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fogcast/core.hpp"
#include "fogcast/index_coding.hpp"
#include "fogcast/meeting.hpp"
#include "fogcast/scheduler.hpp"
#include "fogcast/simulator.hpp"
#include "json.hpp"

namespace fogcast {

using Json = nlohmann::json;

Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& value);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// {"junctions": [{"id", "x", "y"}], "segments": [{"id", "a", "b", "length_m"}],
//  "rsus": [...]}
RoadNetwork network_from_json(const Json& j);
Json to_json(const RoadNetwork& network);

// {"default_static_size", "default_dynamic_size", "static_sizes": {seg: n},
//  "dynamic_sizes": {seg: n}, "coded_sizes": [{"components": [...], "size"}]}
MapDataCatalog catalog_from_json(const Json& j);
Json to_json(const MapDataCatalog& catalog);

// [{"vehicle", "path", "junction_times", "segment_times"}]; segment_times may
// be omitted.
std::vector<TripPlan> plans_from_json(const Json& j, const RoadNetwork& network);
Json to_json(std::span<const TripPlan> plans);

// {"scheme", "rand_mode", "capacity", "rsu_capacity", "tau", "prior_segments",
//  "seed", "threads", "slot_seconds", "delay": {"mtu", "data_rate",
//  "processing_delay"}}; every key is optional.
ScenarioConfig config_from_json(const Json& j);
Json to_json(const ScenarioConfig& config);

// {"network", "catalog", "config", and "plans" or "traces"}. Network, catalog
// and plans are inline objects or file names; "traces" names a trace CSV.
// Relative file names resolve against base_dir.
Scenario scenario_from_json(const Json& j, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

// {"junction", "n", "demands": [[from, to], ...], "prior": [...]}
DemandGraph demand_graph_from_json(const Json& j);
Json to_json(const DemandGraph& graph);

// {"junction", "n", "size", "coded", "packets": [{"nodes": [..], "label", "items"}]}
IndexCodingScheme scheme_from_json(const Json& j);
Json scheme_to_json(const IndexCodingScheme& scheme, const DemandGraph& graph);

Metrics metrics_from_json(const Json& j);
Json to_json(const Metrics& metrics);

// Schedule output reduced to its decision sets, traffic totals and advance
// downloads.
struct DecisionSummary {
  std::string policy;
  ScheduleDecision decision;
  std::uint64_t broadcast_packets = 0;
  Bytes broadcast_bytes = 0;
  std::uint64_t cellular_packets = 0;
  Bytes cellular_bytes = 0;
  std::vector<AdvanceRecord> advance;
};

DecisionSummary summarize(const ScheduleResult& result);
DecisionSummary summary_from_json(const Json& j);
Json to_json(const DecisionSummary& summary);

// vehicle_id,slot,x,y[,junction_id[,segment_id]] with an optional header row.
std::vector<TraceSample> read_trace_csv(std::istream& in);
void write_trace_csv(std::ostream& out, std::span<const TraceSample> samples);

// slot,rsu,metric,value for every per-slot counter.
void write_metrics_csv(std::ostream& out, const Metrics& metrics);

// One row of integers per vehicle in id order.
void write_matrix_csv(std::ostream& out, const MeetingMatrix& matrix);

}  // namespace fogcast
