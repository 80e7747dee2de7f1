#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cdt/geometry.hpp"
#include "cdt/map_ingest.hpp"
#include "cdt/planner.hpp"

namespace cdt {

/// Polygon-with-holes free space with bucketed edges for collision queries.
class FreeSpace {
public:
    explicit FreeSpace(const ComponentGeometry& component);

    bool contains(Point2 p) const;
    /// True when the segment stays inside: no boundary edge crosses it and
    /// its endpoints and midpoint are inside.
    bool segment_free(Point2 a, Point2 b) const;
    Point2 lo() const { return lo_; }
    Point2 hi() const { return hi_; }
    double area() const { return area_; }

private:
    int bucket_col(double x) const;
    void bucket_range(Point2 a, Point2 b, int& c0, int& r0, int& c1, int& r1) const;

    std::vector<Point2> outer_;
    std::vector<std::vector<Point2>> holes_;
    std::vector<Segment> edges_;
    std::vector<std::vector<int>> buckets_;
    Point2 lo_, hi_;
    double cell_ = 1.0;
    int cols_ = 1, rows_ = 1;
    double area_ = 0.0;
};

struct RrtStarParams {
    int iterations = 10000;
    double goal_bias = 0.05;
    double step_fraction = 0.05;  // of the bounding-box diagonal
    double time_budget_us = 0.0;  // 0 = unlimited
    /// Stop as soon as the best length is at most this (0 = never).
    double stop_length = 0.0;
    std::uint64_t seed = 1;
};

struct RrtStarResult {
    bool success = false;
    Polyline best_path;
    double best_length = 0.0;
    std::optional<double> t_init_us;
    std::vector<Improvement> improvements;
    int iterations_used = 0;
    int nodes = 0;
    double elapsed_us = 0.0;
};

/// Plain RRT* with uniform free-space sampling, goal bias, fixed steering
/// step and the usual shrinking rewire radius (capped by the step).
RrtStarResult rrt_star(const FreeSpace& space, Point2 start, Point2 goal, const RrtStarParams& params);

}  // namespace cdt
