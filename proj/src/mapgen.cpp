#include "cdt/mapgen.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "cdt/errors.hpp"

namespace cdt {

namespace {

constexpr std::uint8_t kWall = 255;

void fill_rect(OccupancyGrid& g, int col0, int row0, int col1, int row1, std::uint8_t v = kWall) {
    col0 = std::max(col0, 0);
    row0 = std::max(row0, 0);
    col1 = std::min(col1, g.width);
    row1 = std::min(row1, g.height);
    for (int r = row0; r < row1; ++r)
        for (int c = col0; c < col1; ++c) g.cells[static_cast<std::size_t>(r) * g.width + c] = v;
}

int uniform(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Block layout shared by the maze and the floorplan: even block indices are
// walls of `wall` pixels, odd ones are open spans of `span` pixels.
struct BlockLayout {
    int span;
    int wall;
    int offset(int block) const { return (block / 2) * (span + wall) + (block % 2) * wall; }
    int size(int block) const { return block % 2 ? span : wall; }
};

OccupancyGrid rasterize_blocks(const std::vector<std::vector<char>>& blocks, const BlockLayout& L) {
    const int bh = static_cast<int>(blocks.size());
    const int bw = static_cast<int>(blocks[0].size());
    OccupancyGrid g = make_grid(L.offset(bw - 1) + L.size(bw - 1), L.offset(bh - 1) + L.size(bh - 1));
    for (int by = 0; by < bh; ++by)
        for (int bx = 0; bx < bw; ++bx)
            if (blocks[by][bx])
                fill_rect(g, L.offset(bx), L.offset(by), L.offset(bx) + L.size(bx), L.offset(by) + L.size(by));
    return g;
}

Point2 block_center(const OccupancyGrid& g, const BlockLayout& L, int bx, int by) {
    const double col = L.offset(bx) + L.size(bx) / 2.0;
    const double row = L.offset(by) + L.size(by) / 2.0;
    return {col * g.resolution, (g.height - row) * g.resolution};
}

}  // namespace

GeneratedMap gen_cluttered(const ClutteredParams& p) {
    if (p.width < 4 || p.height < 4 || p.obstacles < 0 || p.min_size < 1 || p.max_size < p.min_size)
        throw InvalidInput("gen_cluttered: bad parameters");
    std::mt19937_64 rng(p.seed);
    GeneratedMap out;
    out.kind = "cluttered";
    out.grid = make_grid(p.width, p.height);

    struct Rect {
        int c0, r0, c1, r1;
    };
    std::vector<Rect> placed;
    const int m = p.margin;
    for (int attempt = 0; attempt < 2000 * std::max(1, p.obstacles) && static_cast<int>(placed.size()) < p.obstacles;
         ++attempt) {
        const int w = uniform(rng, p.min_size, p.max_size);
        const int h = uniform(rng, p.min_size, p.max_size);
        if (w + 2 * m > p.width || h + 2 * m > p.height) continue;
        const int c0 = uniform(rng, m, p.width - m - w);
        const int r0 = uniform(rng, m, p.height - m - h);
        const Rect r{c0, r0, c0 + w, r0 + h};
        // Keep the start and goal corners clear.
        if (r.c0 < 2 * m + 2 && r.r1 > p.height - 2 * m - 2) continue;
        if (r.c1 > p.width - 2 * m - 2 && r.r0 < 2 * m + 2) continue;
        bool clash = false;
        for (const Rect& q : placed)
            if (r.c0 < q.c1 + m && q.c0 < r.c1 + m && r.r0 < q.r1 + m && q.r0 < r.r1 + m) {
                clash = true;
                break;
            }
        if (clash) continue;
        placed.push_back(r);
        fill_rect(out.grid, r.c0, r.r0, r.c1, r.r1);
    }
    out.obstacles = static_cast<int>(placed.size());
    const double res = out.grid.resolution;
    out.start = {(m / 2.0 + 0.5) * res, (m / 2.0 + 0.5) * res};
    out.goal = {(p.width - m / 2.0 - 0.5) * res, (p.height - m / 2.0 - 0.5) * res};
    return out;
}

GeneratedMap gen_trap(const TrapParams& p) {
    if (p.pillars_x < 1 || p.pillars_y < 1 || p.pillar < 1 || p.gap < 3 || p.lanes < 1 || p.lane_width < 1)
        throw InvalidInput("gen_trap: bad parameters");
    std::mt19937_64 rng(p.seed);
    const int pitch = p.pillar + p.gap;
    const int field_w = p.pillars_x * pitch + p.gap;
    const int height = p.pillars_y * pitch + p.gap;
    const int lane_pitch = p.lane_width + 1;
    const int width = field_w + 1 + p.lanes * lane_pitch;

    GeneratedMap out;
    out.kind = "trap";
    out.grid = make_grid(width, height);
    OccupancyGrid& g = out.grid;

    const int jitter = (p.gap - 2) / 3;
    for (int i = 0; i < p.pillars_x; ++i)
        for (int j = 0; j < p.pillars_y; ++j) {
            const int c = p.gap + i * pitch + uniform(rng, -jitter, jitter);
            const int r = p.gap + j * pitch + uniform(rng, -jitter, jitter);
            fill_rect(g, c, r, c + p.pillar, r + p.pillar);
        }
    out.obstacles = p.pillars_x * p.pillars_y;

    // Separation wall with a single mouth at the top, then the switchbacks.
    fill_rect(g, field_w, p.lane_width, field_w + 1, height);
    for (int k = 0; k + 1 < p.lanes; ++k) {
        const int c = field_w + 1 + k * lane_pitch + p.lane_width;
        if (k % 2 == 0)
            fill_rect(g, c, 0, c + 1, height - p.lane_width);  // gap at the bottom
        else
            fill_rect(g, c, p.lane_width, c + 1, height);  // gap at the top
    }

    const double res = g.resolution;
    out.start = {p.gap / 2.0 * res, p.gap / 2.0 * res};
    const double last_lane = field_w + 1 + (p.lanes - 1) * lane_pitch + p.lane_width / 2.0;
    // The last lane is entered at one end; the goal sits at the other.
    const bool enter_bottom = (p.lanes - 1) % 2 == 1;
    const double goal_row = enter_bottom ? 1.0 : height - 1.0;
    out.goal = {last_lane * res, (height - goal_row) * res};
    return out;
}

GeneratedMap gen_maze(const MazeParams& p) {
    if (p.cols < 1 || p.rows < 1 || p.corridor < 1 || p.wall < 1 || p.loops < 0)
        throw InvalidInput("gen_maze: bad parameters");
    std::mt19937_64 rng(p.seed);
    const int bw = 2 * p.cols + 1;
    const int bh = 2 * p.rows + 1;
    std::vector<std::vector<char>> blocks(bh, std::vector<char>(bw, 0));
    for (int x = 0; x < bw; ++x) blocks[0][x] = blocks[bh - 1][x] = 1;
    for (int y = 0; y < bh; ++y) blocks[y][0] = blocks[y][bw - 1] = 1;

    // Chamber [x0,x1) x [y0,y1) in maze-cell units.
    std::function<void(int, int, int, int)> divide = [&](int x0, int y0, int x1, int y1) {
        const int w = x1 - x0;
        const int h = y1 - y0;
        if (w < 2 && h < 2) return;
        const bool horizontal = h > w || (h == w && uniform(rng, 0, 1) == 0);
        if (horizontal) {
            const int r = uniform(rng, y0 + 1, y1 - 1);
            for (int bx = 2 * x0; bx <= 2 * x1; ++bx) blocks[2 * r][bx] = 1;
            blocks[2 * r][2 * uniform(rng, x0, x1 - 1) + 1] = 0;
            divide(x0, y0, x1, r);
            divide(x0, r, x1, y1);
        } else {
            const int c = uniform(rng, x0 + 1, x1 - 1);
            for (int by = 2 * y0; by <= 2 * y1; ++by) blocks[by][2 * c] = 1;
            blocks[2 * uniform(rng, y0, y1 - 1) + 1][2 * c] = 0;
            divide(x0, y0, c, y1);
            divide(c, y0, x1, y1);
        }
    };
    divide(0, 0, p.cols, p.rows);

    std::vector<std::pair<int, int>> candidates;
    for (int by = 1; by < bh - 1; ++by)
        for (int bx = 1; bx < bw - 1; ++bx)
            if (blocks[by][bx] && (bx + by) % 2 == 1) candidates.emplace_back(bx, by);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    const int opened = std::min<int>(p.loops, static_cast<int>(candidates.size()));
    for (int i = 0; i < opened; ++i) blocks[candidates[i].second][candidates[i].first] = 0;

    const BlockLayout L{p.corridor, p.wall};
    GeneratedMap out;
    out.kind = p.loops > 0 ? "maze-loops" : "maze";
    out.grid = rasterize_blocks(blocks, L);
    out.obstacles = opened;
    out.start = block_center(out.grid, L, 1, bh - 2);
    out.goal = block_center(out.grid, L, bw - 2, 1);
    return out;
}

GeneratedMap gen_floorplan(const FloorplanParams& p) {
    if (p.rooms_x < 1 || p.rooms_y < 1 || p.wall < 1 || p.door < 1 || p.room < p.door + 2)
        throw InvalidInput("gen_floorplan: bad parameters");
    std::mt19937_64 rng(p.seed);
    const int bw = 2 * p.rooms_x + 1;
    const int bh = 2 * p.rooms_y + 1;
    std::vector<std::vector<char>> blocks(bh, std::vector<char>(bw, 1));
    for (int y = 0; y < p.rooms_y; ++y)
        for (int x = 0; x < p.rooms_x; ++x) blocks[2 * y + 1][2 * x + 1] = 0;

    // Walls between neighbouring rooms: (room a, room b, block x, block y).
    struct Wall {
        int a, b, bx, by;
    };
    std::vector<Wall> walls;
    auto id = [&](int x, int y) { return y * p.rooms_x + x; };
    for (int y = 0; y < p.rooms_y; ++y)
        for (int x = 0; x < p.rooms_x; ++x) {
            if (x + 1 < p.rooms_x) walls.push_back({id(x, y), id(x + 1, y), 2 * x + 2, 2 * y + 1});
            if (y + 1 < p.rooms_y) walls.push_back({id(x, y), id(x, y + 1), 2 * x + 1, 2 * y + 2});
        }
    std::shuffle(walls.begin(), walls.end(), rng);

    // Random spanning tree (Kruskal) plus extra doors.
    std::vector<int> parent(p.rooms_x * p.rooms_y);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
    std::vector<const Wall*> doors;
    std::bernoulli_distribution extra(p.extra_door_prob);
    for (const Wall& w : walls) {
        const int ra = find(w.a);
        const int rb = find(w.b);
        if (ra != rb) {
            parent[ra] = rb;
            doors.push_back(&w);
        } else if (extra(rng)) {
            doors.push_back(&w);
        }
    }

    const BlockLayout L{p.room, p.wall};
    GeneratedMap out;
    out.kind = "floorplan";
    out.grid = rasterize_blocks(blocks, L);
    for (const Wall* w : doors) {
        const int along = uniform(rng, 1, p.room - p.door - 1);
        if (w->bx % 2 == 0) {  // vertical wall
            const int r0 = L.offset(w->by) + along;
            fill_rect(out.grid, L.offset(w->bx), r0, L.offset(w->bx) + p.wall, r0 + p.door, 0);
        } else {
            const int c0 = L.offset(w->bx) + along;
            fill_rect(out.grid, c0, L.offset(w->by), c0 + p.door, L.offset(w->by) + p.wall, 0);
        }
    }
    out.obstacles = static_cast<int>(doors.size());
    out.start = block_center(out.grid, L, 1, bh - 2);
    out.goal = block_center(out.grid, L, bw - 2, 1);
    return out;
}

const std::vector<std::string>& archetype_names() {
    static const std::vector<std::string> names{"cluttered", "trap", "maze", "maze-loops", "floorplan"};
    return names;
}

GeneratedMap gen_archetype(const std::string& kind, int size, int obstacles, std::uint64_t seed) {
    if (size < 20) throw InvalidInput("gen_archetype: size must be at least 20");
    if (kind == "cluttered") {
        ClutteredParams p;
        p.width = p.height = size;
        p.obstacles = obstacles;
        p.min_size = std::max(2, size / 25);
        p.max_size = std::max(p.min_size, size / 7);
        p.seed = seed;
        return gen_cluttered(p);
    }
    if (kind == "trap") {
        TrapParams p;
        p.seed = seed;
        return gen_trap(p);
    }
    if (kind == "maze" || kind == "maze-loops") {
        MazeParams p;
        p.cols = p.rows = std::max(2, size / (p.corridor + p.wall));
        p.loops = kind == "maze" ? 0 : std::max(1, obstacles);
        p.seed = seed;
        return gen_maze(p);
    }
    if (kind == "floorplan") {
        FloorplanParams p;
        p.room = std::max(p.door + 2, (size - (p.rooms_x + 1) * p.wall) / p.rooms_x);
        p.seed = seed;
        return gen_floorplan(p);
    }
    throw InvalidInput("unknown map kind: " + kind);
}

}  // namespace cdt
