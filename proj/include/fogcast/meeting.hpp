#pragma once

// Meeting relation graph over trip plans, the single-meeting check and the
// proximity-based meeting-frequency matrix.

#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "fogcast/core.hpp"

namespace fogcast {

// One row of a mobility trace. junction is empty while the vehicle is on a
// segment; segment is the segment being driven or about to be entered.
struct TraceSample {
  VehicleId vehicle;
  Slot slot = 0;
  double x = 0.0;
  double y = 0.0;
  JunctionId junction;
  SegmentId segment;
};

struct MeetingEvent {
  std::set<VehicleId> vehicles;
  JunctionId junction;
  Slot slot = 0;
};

struct MeetingRelationGraph {
  // Sorted by (slot, junction).
  std::vector<MeetingEvent> nodes;
  // Index pairs (from, to) into nodes.
  std::set<std::pair<std::size_t, std::size_t>> edges;

  std::optional<std::vector<std::size_t>> topological_order() const;
  bool acyclic() const { return topological_order().has_value(); }
};

// Nodes are the groups of two or more vehicles entering the same junction in
// the same slot; an edge joins two events sharing a vehicle, earlier to later.
MeetingRelationGraph build_meeting_graph(std::span<const TripPlan> plans);

struct MeetingViolation {
  VehicleId a;
  VehicleId b;
  // Every slot the pair shared a junction, ascending.
  std::vector<Slot> slots;
  int episodes = 0;
};

// Pairs that meet in more than one episode. Driving the same stretch of
// junctions together in consecutive steps counts as a single episode.
std::vector<MeetingViolation> check_single_meeting(std::span<const TripPlan> plans);

struct MeetingMatrix {
  std::vector<VehicleId> vehicles;  // sorted
  std::vector<std::vector<int>> counts;

  std::size_t dimension() const { return vehicles.size(); }
  int at(std::size_t i, std::size_t j) const { return counts[i][j]; }
  // Number of vehicle pairs by meeting count: histogram()[k] = pairs met k times.
  std::vector<std::size_t> histogram() const;
};

struct SlotWindow {
  Slot first = 0;
  Slot last = 0;
};

// x_ij counts contiguous runs of slots where both vehicles have a sample within
// `radius` of each other. A slot missing either sample ends a run.
MeetingMatrix meeting_matrix(std::span<const TraceSample> samples, double radius,
                             std::optional<SlotWindow> window = std::nullopt);

}  // namespace fogcast
