#include "mergesim/road.hpp"

#include <cmath>

#include "mergesim/errors.hpp"

namespace mergesim {

const char* lane_name(Lane lane) { return lane == Lane::highway ? "highway" : "ramp"; }

double Polyline::y_at(double x) const {
    if (points.empty()) return 0.0;
    if (x <= points.front().first) return points.front().second;
    if (x >= points.back().first) return points.back().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& [x1, y1] = points[i];
        if (x <= x1) {
            const auto& [x0, y0] = points[i - 1];
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    return points.back().second;
}

double RoadNetwork::centerline_y(Lane lane, double x) const {
    return lane == Lane::highway ? 0.0 : ramp_centerline.y_at(x);
}

Lane RoadNetwork::dominant_lane(double x, double y) const {
    const double d_highway = std::abs(y - centerline_y(Lane::highway, x));
    const double d_ramp = std::abs(y - centerline_y(Lane::ramp, x));
    return d_ramp < d_highway ? Lane::ramp : Lane::highway;
}

std::optional<Lane> RoadNetwork::lane_change_target(Lane from, double x, bool to_left) const {
    if (from == Lane::ramp && to_left && x >= merge_start && x < merge_end()) return Lane::highway;
    return std::nullopt;
}

void RoadNetwork::validate() const {
    if (highway_lanes != 1) throw ConfigError("road.highway_lanes: only the single through-lane layout is supported");
    if (!(lane_width > 0.0)) throw ConfigError("road.lane_width must be > 0");
    if (!(merge_length > 0.0)) throw ConfigError("road.merge_length must be > 0");
    if (!(merge_start >= 0.0)) throw ConfigError("road.merge_start must be >= 0");
    if (!(road_length > merge_end())) throw ConfigError("road.road_length must exceed merge_start + merge_length");
    if (ramp_centerline.points.size() < 2) throw ConfigError("road.ramp_centerline needs at least two points");
    for (std::size_t i = 1; i < ramp_centerline.points.size(); ++i) {
        if (!(ramp_centerline.points[i].first > ramp_centerline.points[i - 1].first))
            throw ConfigError("road.ramp_centerline must be strictly increasing in x");
    }
}

RoadNetwork RoadNetwork::merging(double lane_width, double merge_start, double merge_length, double road_length) {
    RoadNetwork road;
    road.lane_width = lane_width;
    road.merge_start = merge_start;
    road.merge_length = merge_length;
    road.road_length = road_length;
    road.ramp_centerline.points = {{0.0, -lane_width}, {merge_start + merge_length, -lane_width}};
    return road;
}

}  // namespace mergesim
