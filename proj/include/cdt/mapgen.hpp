#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdt/geometry.hpp"
#include "cdt/map_ingest.hpp"

namespace cdt {

/// A generated grid with a suggested start/goal pair (world coordinates).
struct GeneratedMap {
    std::string kind;
    OccupancyGrid grid;
    Point2 start;
    Point2 goal;
    int obstacles = 0;  // placed obstacle count, where meaningful
};

struct ClutteredParams {
    int width = 200;
    int height = 200;
    int obstacles = 12;
    int min_size = 8;
    int max_size = 30;
    int margin = 3;  // free gap kept around every rectangle
    std::uint64_t seed = 1;
};

/// Random disjoint rectangles.
GeneratedMap gen_cluttered(const ClutteredParams& p);

struct TrapParams {
    int pillars_x = 8;
    int pillars_y = 8;
    int pillar = 4;  // pillar side
    int gap = 8;     // free space between pillars
    int lanes = 130;  // switchbacks in the exit corridor
    int lane_width = 3;
    std::uint64_t seed = 1;
};

/// A pillar field (many cutlines, many cycles) whose only exit is a long
/// switchback corridor leading to the goal.
GeneratedMap gen_trap(const TrapParams& p);

struct MazeParams {
    int cols = 10;
    int rows = 10;
    int corridor = 8;
    int wall = 2;
    int loops = 0;  // extra wall blocks removed after generation
    std::uint64_t seed = 1;
};

/// Recursive-division maze; simply connected when loops == 0.
GeneratedMap gen_maze(const MazeParams& p);

struct FloorplanParams {
    int rooms_x = 3;
    int rooms_y = 3;
    int room = 40;
    int wall = 3;
    int door = 10;
    double extra_door_prob = 0.5;  // doors beyond a spanning tree
    std::uint64_t seed = 1;
};

/// Rooms in a grid joined by doors.
GeneratedMap gen_floorplan(const FloorplanParams& p);

/// Builds one of the five archetypes ("cluttered", "trap", "maze",
/// "maze-loops", "floorplan") with default parameters, scaled by `size`
/// where it applies. Throws InvalidInput for unknown kinds.
GeneratedMap gen_archetype(const std::string& kind, int size, int obstacles, std::uint64_t seed);

const std::vector<std::string>& archetype_names();

}  // namespace cdt
