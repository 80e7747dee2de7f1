#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cdt/geometry.hpp"

namespace cdt {

/// Row-major occupancy raster. Row 0 is the top row of the image; world
/// coordinates put the origin at the bottom-left corner with y pointing up.
struct OccupancyGrid {
    int width = 0;
    int height = 0;
    double resolution = 1.0;
    std::vector<std::uint8_t> cells;
    std::uint8_t occ_threshold = 128;

    bool in_bounds(int col, int row) const { return col >= 0 && row >= 0 && col < width && row < height; }
    /// Cells outside the raster count as occupied.
    bool occupied(int col, int row) const {
        return !in_bounds(col, row) || cells[static_cast<std::size_t>(row) * width + col] >= occ_threshold;
    }
    bool free(int col, int row) const { return !occupied(col, row); }
    std::size_t free_count() const;

    Point2 cell_center(int col, int row) const {
        return {(col + 0.5) * resolution, (height - row - 0.5) * resolution};
    }
    /// Cell containing a world point, or {-1,-1} outside the raster.
    std::pair<int, int> cell_of(Point2 p) const;
};

OccupancyGrid make_grid(int width, int height, double resolution = 1.0, std::uint8_t occ_threshold = 128);

/// Parses a P2 or P5 PGM. Sample values are rescaled to 0..255 when
/// maxval differs from 255.
OccupancyGrid load_grid(std::span<const std::uint8_t> bytes, std::uint8_t occ_threshold = 128,
                        double resolution = 1.0);
OccupancyGrid load_grid_file(const std::filesystem::path& path, std::uint8_t occ_threshold = 128,
                             double resolution = 1.0);
/// Binary P5 encoding of the raw cell values.
std::string encode_pgm(const OccupancyGrid& grid);

enum class LoopKind { outer, hole };

/// Closed loop (first point repeated at the end). Free space lies to the
/// left: outer loops run counter-clockwise, holes clockwise.
struct BoundaryLoop {
    Polyline points;
    LoopKind kind = LoopKind::outer;
};

struct FreeComponent {
    int id = 0;
    std::size_t cell_count = 0;
    BoundaryLoop outer;
    std::vector<BoundaryLoop> holes;
};

/// Clears diagonal-only free contacts (2x2 checkerboards) by occupying one of
/// the two free cells, so that every traced loop is simple.
OccupancyGrid normalize_diagonals(const OccupancyGrid& grid);

/// 4-connected free components with their boundaries traced along cell edges.
/// Expects a grid without diagonal-only free contacts (see normalize_diagonals).
std::vector<FreeComponent> extract_components(const OccupancyGrid& grid);

/// Closed-loop Douglas-Peucker. Throws GeometryError when fewer than three
/// vertices survive.
BoundaryLoop simplify_loop(const BoundaryLoop& loop, double epsilon_fit);

/// Simple polygon fitted to one free component. Holes are joined to the
/// outer boundary by zero-width keyhole bridges, so the vertex list may
/// contain coincident vertices. `edge_bridge[i]` names the bridge that the
/// edge from vertex i to vertex i+1 belongs to, or -1 for ordinary edges.
struct SimplePolygon {
    std::vector<Point2> vertices;
    std::vector<int> edge_bridge;
    int component = 0;

    std::size_t size() const { return vertices.size(); }
    int bridge_count() const;
    /// Edge index (start vertex) of the opposite side of a bridge edge.
    int bridge_twin(int edge) const;
    bool is_bridge_vertex(int v) const;
};

SimplePolygon merge_holes(const BoundaryLoop& outer, const std::vector<BoundaryLoop>& holes);

/// Simplicity check that tolerates keyhole bridges: the two sides of a bridge
/// may overlap and coincident bridge vertices may touch.
bool is_weakly_simple(const SimplePolygon& poly, double eps);

struct IngestConfig {
    double epsilon_fit = 8.0;
    std::uint8_t occ_threshold = 128;
};

struct ComponentGeometry {
    int id = 0;
    std::size_t free_cells = 0;
    std::vector<Point2> outer;               // open, counter-clockwise
    std::vector<std::vector<Point2>> holes;  // open, clockwise
    SimplePolygon polygon;
};

struct MapGeometry {
    int width = 0;
    int height = 0;
    double resolution = 1.0;
    double epsilon_fit = 0.0;
    std::vector<ComponentGeometry> components;
};

/// Full map stage: normalize, extract, conservatively simplify every loop of
/// every component, and merge holes. Simplified edges never cut through
/// occupied cells and loops of one component stay pairwise disjoint.
MapGeometry ingest(const OccupancyGrid& grid, const IngestConfig& cfg);

/// True when the open segment a-b (world coordinates) passes through the
/// interior of an occupied cell or runs along a grid line with occupied
/// cells on both sides.
bool segment_clips_occupied(const OccupancyGrid& grid, Point2 a, Point2 b);

}  // namespace cdt
