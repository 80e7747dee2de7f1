#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cdt/decomposition.hpp"
#include "cdt/geometry.hpp"
#include "cdt/map_ingest.hpp"
#include "cdt/topology.hpp"

namespace cdt {

/// Square-pixel raster with pixel (col,row) centred at
/// origin + ((col+0.5)*pixel, (row+0.5)*pixel). Rows run upward here.
struct Raster {
    int width = 0;
    int height = 0;
    double pixel = 1.0;
    Point2 origin;
    std::vector<int> label;  // -1 blocked, otherwise >= 0 (cell id or 0 for plain free)

    bool in_bounds(int c, int r) const { return c >= 0 && r >= 0 && c < width && r < height; }
    int at(int c, int r) const { return in_bounds(c, r) ? label[static_cast<std::size_t>(r) * width + c] : -1; }
    Point2 center(int c, int r) const { return {origin.x + (c + 0.5) * pixel, origin.y + (r + 0.5) * pixel}; }
    /// Pixel containing p (may be out of bounds).
    std::pair<int, int> pixel_of(Point2 p) const;
};

/// Raster of an occupancy grid at its own resolution; free pixels get label 0.
Raster raster_from_grid(const OccupancyGrid& grid);

/// `cols` x `rows` raster over the bounding box of the dissection (square
/// pixels sized by the larger side); each pixel is labelled with the cell
/// containing its centre.
Raster raster_from_dissection(const DissectionMap& dm, int cols, int rows);

struct OraclePath {
    double length = 0.0;
    Polyline path;
};

/// 8-connected Dijkstra between the pixels containing `start` and `goal`
/// (diagonal steps cost sqrt(2) and may not cut blocked corners). The length
/// includes the straight legs from start to its pixel centre and from the
/// last centre to goal. Throws Unreachable when no path exists and
/// NotInFreeSpace when an endpoint pixel is blocked.
OraclePath oracle_dijkstra(const Raster& raster, Point2 start, Point2 goal);

/// Same search restricted to the cell chain `cells` of a dissection raster:
/// a path may stay in the current chain cell or step into the next one.
/// Endpoints snap to the nearest pixel labelled with the first / last cell.
/// Throws Unreachable when the chain is not connected at this resolution.
OraclePath oracle_class_dijkstra(const Raster& raster, std::span<const int> cells, Point2 start, Point2 goal);

/// An interior point of a simple polygon (any orientation).
Point2 interior_point(std::span<const Point2> polygon);

/// One representative point per hole of a component.
std::vector<Point2> obstacle_representatives(const ComponentGeometry& component);

/// Parallel rays, one per hole, that meet no other hole. A ray starts at
/// `anchors[i]` (inside hole i) and runs along `direction`.
struct SignatureRays {
    Point2 direction{0.0, 1.0};
    std::vector<Point2> anchors;
};

/// Picks a common direction (straight up when possible) and anchors whose
/// rays leave their own hole for good and miss every other hole. Throws
/// GeometryError when no tried direction works.
SignatureRays signature_rays(const ComponentGeometry& component);

/// Reduced word of signed crossings of f with the rays: +(i+1) for a
/// left-to-right crossing of ray i (looking along the ray), -(i+1) for the
/// opposite, with adjacent inverse pairs cancelled. A homotopy invariant
/// only when the rays miss the other holes.
std::vector<int> hsignature(std::span<const Point2> f, const SignatureRays& rays);
/// Upward rays from the given points.
std::vector<int> hsignature(std::span<const Point2> f, std::span<const Point2> representatives);

}  // namespace cdt
