#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace mergesim {

/// Lane identifiers of the merging layout: one through lane plus the
/// on-ramp acceleration lane on its right.
enum class Lane : int { highway = 0, ramp = 1 };

const char* lane_name(Lane lane);

/// Piecewise-linear centerline, x strictly increasing.
struct Polyline {
    std::vector<std::pair<double, double>> points;

    /// Lateral offset at longitudinal position x (clamped at the ends).
    double y_at(double x) const;
};

struct RoadNetwork {
    int highway_lanes = 1;
    double lane_width = 4.0;
    double road_length = 550.0;   // end of the simulated highway
    double merge_start = 230.0;   // acceleration lane runs parallel from here
    double merge_length = 100.0;  // L
    Polyline ramp_centerline{{{0.0, -4.0}, {330.0, -4.0}}};

    double merge_end() const { return merge_start + merge_length; }

    /// Lateral position of a lane centerline at longitudinal position x.
    double centerline_y(Lane lane, double x) const;

    /// Lane whose centerline is nearest to (x, y).
    Lane dominant_lane(double x, double y) const;

    /// Lane reachable by a lane change at x, if any. Only the ramp has an
    /// adjacent lane (the highway, to its left) and only inside the merge
    /// section.
    std::optional<Lane> lane_change_target(Lane from, double x, bool to_left) const;

    /// The lane neighbouring `lane` for perception queries.
    static Lane other_lane(Lane lane) { return lane == Lane::highway ? Lane::ramp : Lane::highway; }

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;

    /// Road with a straight acceleration lane matching the given merge section.
    static RoadNetwork merging(double lane_width, double merge_start, double merge_length, double road_length);
};

}  // namespace mergesim
