#include "cdt/map_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "cdt/errors.hpp"

namespace cdt {

// ---------------------------------------------------------------------------
// Grid basics and PGM I/O

std::size_t OccupancyGrid::free_count() const {
    std::size_t n = 0;
    for (auto v : cells)
        if (v < occ_threshold) ++n;
    return n;
}

std::pair<int, int> OccupancyGrid::cell_of(Point2 p) const {
    const double cx = p.x / resolution;
    const double cy = p.y / resolution;
    if (cx < 0.0 || cy < 0.0 || cx >= width || cy >= height) return {-1, -1};
    const int col = static_cast<int>(cx);
    const int row = height - 1 - static_cast<int>(cy);
    return {col, row};
}

OccupancyGrid make_grid(int width, int height, double resolution, std::uint8_t occ_threshold) {
    if (width <= 0 || height <= 0) throw GeometryError("make_grid: non-positive dimensions");
    if (!(resolution > 0.0)) throw GeometryError("make_grid: resolution must be positive");
    OccupancyGrid g;
    g.width = width;
    g.height = height;
    g.resolution = resolution;
    g.occ_threshold = occ_threshold;
    g.cells.assign(static_cast<std::size_t>(width) * height, 0);
    return g;
}

namespace {

class PgmReader {
public:
    explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = static_cast<char>(bytes_[pos_]);
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string token() {
        skip_space_and_comments();
        std::string out;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#')
            out.push_back(static_cast<char>(bytes_[pos_++]));
        return out;
    }

    long long header_number(const char* what) {
        const std::string t = token();
        if (t.empty()) throw ParseError(std::string("malformed header: missing ") + what);
        long long v = 0;
        for (char c : t) {
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw ParseError(std::string("malformed header: bad ") + what);
            v = v * 10 + (c - '0');
            if (v > (1LL << 40)) throw ParseError("dimension overflow");
        }
        return v;
    }

    std::size_t& pos() { return pos_; }
    std::span<const std::uint8_t> bytes() const { return bytes_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

OccupancyGrid load_grid(std::span<const std::uint8_t> bytes, std::uint8_t occ_threshold, double resolution) {
    PgmReader in(bytes);
    const std::string magic = in.token();
    if (magic != "P2" && magic != "P5") throw ParseError("malformed header: expected P2 or P5");
    const long long w = in.header_number("width");
    const long long h = in.header_number("height");
    const long long maxval = in.header_number("maxval");
    if (w <= 0 || h <= 0) throw ParseError("malformed header: zero dimension");
    if (w > (1 << 20) || h > (1 << 20) || w * h > (1LL << 30)) throw ParseError("dimension overflow");
    if (maxval <= 0 || maxval > 65535) throw ParseError("malformed header: maxval out of range");

    OccupancyGrid g = make_grid(static_cast<int>(w), static_cast<int>(h), resolution, occ_threshold);
    const std::size_t count = static_cast<std::size_t>(w * h);
    auto rescale = [&](long long v) -> std::uint8_t {
        if (v > maxval) throw ParseError("sample exceeds maxval");
        if (maxval == 255) return static_cast<std::uint8_t>(v);
        return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    };

    if (magic == "P2") {
        for (std::size_t i = 0; i < count; ++i) {
            const std::string t = in.token();
            if (t.empty()) throw ParseError("short read");
            long long v = 0;
            for (char c : t) {
                if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError("malformed sample");
                v = v * 10 + (c - '0');
                if (v > 65535) throw ParseError("sample exceeds maxval");
            }
            g.cells[i] = rescale(v);
        }
    } else {
        // Exactly one whitespace byte separates maxval from the raster.
        std::size_t& pos = in.pos();
        if (pos >= bytes.size()) throw ParseError("short read");
        ++pos;
        const std::size_t bps = maxval < 256 ? 1 : 2;
        if (bytes.size() - pos < count * bps) throw ParseError("short read");
        for (std::size_t i = 0; i < count; ++i) {
            long long v = bytes[pos + i * bps];
            if (bps == 2) v = (v << 8) | bytes[pos + i * bps + 1];
            g.cells[i] = rescale(v);
        }
    }
    return g;
}

OccupancyGrid load_grid_file(const std::filesystem::path& path, std::uint8_t occ_threshold, double resolution) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::ios_base::failure("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return load_grid(bytes, occ_threshold, resolution);
}

std::string encode_pgm(const OccupancyGrid& grid) {
    std::ostringstream out;
    out << "P5\n" << grid.width << ' ' << grid.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(grid.cells.data()), static_cast<std::streamsize>(grid.cells.size()));
    return out.str();
}

// ---------------------------------------------------------------------------
// Components and boundary tracing

OccupancyGrid normalize_diagonals(const OccupancyGrid& grid) {
    OccupancyGrid g = grid;
    const std::uint8_t wall = 255;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int r = -1; r < g.height; ++r) {
            for (int c = -1; c < g.width; ++c) {
                const bool a = g.free(c, r), b = g.free(c + 1, r);
                const bool d = g.free(c, r + 1), e = g.free(c + 1, r + 1);
                int victim_c = 0, victim_r = 0;
                if (a && e && !b && !d) {
                    victim_c = c + 1;
                    victim_r = r + 1;
                } else if (b && d && !a && !e) {
                    victim_c = c + 1;
                    victim_r = r;
                } else {
                    continue;
                }
                g.cells[static_cast<std::size_t>(victim_r) * g.width + victim_c] = wall;
                changed = true;
            }
        }
    }
    return g;
}

std::vector<FreeComponent> extract_components(const OccupancyGrid& grid) {
    const int W = grid.width, H = grid.height;
    std::vector<int> label(static_cast<std::size_t>(W) * H, -1);
    std::vector<std::size_t> sizes;
    int next_label = 0;
    std::vector<int> stack;
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            const int idx = r * W + c;
            if (!grid.free(c, r) || label[idx] >= 0) continue;
            std::size_t size = 0;
            label[idx] = next_label;
            stack.push_back(idx);
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                ++size;
                const int cc = cur % W, cr = cur / W;
                const int nbr[4][2] = {{cc + 1, cr}, {cc - 1, cr}, {cc, cr + 1}, {cc, cr - 1}};
                for (const auto& nb : nbr) {
                    if (!grid.free(nb[0], nb[1])) continue;
                    const int ni = nb[1] * W + nb[0];
                    if (label[ni] < 0) {
                        label[ni] = next_label;
                        stack.push_back(ni);
                    }
                }
            }
            sizes.push_back(size);
            ++next_label;
        }
    }

    // Directed boundary edges on the lattice (i, k), k pointing up, with free
    // space on the left. Vertex id = k * (W + 1) + i.
    const int LW = W + 1;
    std::vector<int> next_vertex(static_cast<std::size_t>(LW) * (H + 1), -1);
    std::vector<int> edge_label(next_vertex.size(), -1);
    auto vid = [&](int i, int k) { return k * LW + i; };
    auto add_edge = [&](int from, int to, int lab) {
        if (next_vertex[from] != -1) throw InternalError("extract_components: diagonal free contact in grid");
        next_vertex[from] = to;
        edge_label[from] = lab;
    };
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            if (!grid.free(c, r)) continue;
            const int lab = label[r * W + c];
            const int k0 = H - 1 - r;
            if (grid.occupied(c, r + 1)) add_edge(vid(c, k0), vid(c + 1, k0), lab);
            if (grid.occupied(c + 1, r)) add_edge(vid(c + 1, k0), vid(c + 1, k0 + 1), lab);
            if (grid.occupied(c, r - 1)) add_edge(vid(c + 1, k0 + 1), vid(c, k0 + 1), lab);
            if (grid.occupied(c - 1, r)) add_edge(vid(c, k0 + 1), vid(c, k0), lab);
        }
    }

    std::vector<FreeComponent> comps(static_cast<std::size_t>(next_label));
    for (int i = 0; i < next_label; ++i) {
        comps[i].id = i;
        comps[i].cell_count = sizes[i];
    }
    std::vector<char> used(next_vertex.size(), 0);
    std::vector<int> outer_seen(static_cast<std::size_t>(next_label), 0);
    for (std::size_t start = 0; start < next_vertex.size(); ++start) {
        if (next_vertex[start] < 0 || used[start]) continue;
        BoundaryLoop loop;
        int v = static_cast<int>(start);
        const int lab = edge_label[start];
        do {
            used[v] = 1;
            loop.points.push_back({(v % LW) * grid.resolution, (v / LW) * grid.resolution});
            v = next_vertex[v];
            if (v < 0) throw InternalError("extract_components: open boundary chain");
        } while (v != static_cast<int>(start));
        loop.points.push_back(loop.points.front());
        if (signed_area(std::span(loop.points).first(loop.points.size() - 1)) > 0.0) {
            loop.kind = LoopKind::outer;
            if (outer_seen[lab]++) throw InternalError("extract_components: component with two outer loops");
            comps[lab].outer = std::move(loop);
        } else {
            loop.kind = LoopKind::hole;
            comps[lab].holes.push_back(std::move(loop));
        }
    }
    return comps;
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

std::vector<Point2> open_loop(const Polyline& closed) {
    std::vector<Point2> pts(closed.begin(), closed.end());
    if (pts.size() >= 2 && pts.front() == pts.back()) pts.pop_back();
    return pts;
}

Polyline close_loop(std::vector<Point2> pts) {
    if (!pts.empty()) pts.push_back(pts.front());
    return pts;
}

// One loop under simplification: original vertices rotated to start at the
// lexicographically smallest point, plus kept flags. Index n aliases 0.
struct LoopWork {
    std::vector<Point2> pts;
    std::vector<char> keep;

    std::size_t n() const { return pts.size(); }
    Point2 at(std::size_t i) const { return pts[i % pts.size()]; }

    explicit LoopWork(std::vector<Point2> open) {
        const auto lowest = std::min_element(open.begin(), open.end(), [](Point2 a, Point2 b) {
            return a.x < b.x || (a.x == b.x && a.y < b.y);
        });
        std::rotate(open.begin(), lowest, open.end());
        pts = std::move(open);
        keep.assign(pts.size(), 0);
    }

    // Kept indices in order; the loop closes back to the first one.
    std::vector<std::size_t> kept() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n(); ++i)
            if (keep[i]) out.push_back(i);
        return out;
    }

    // Vertex strictly between i and j (j may equal n) farthest from chord.
    std::size_t worst_between(std::size_t i, std::size_t j) const {
        std::size_t best = i + 1;
        double best_d = -1.0;
        for (std::size_t m = i + 1; m < j; ++m) {
            const double d = point_segment_distance(at(m), at(i), at(j));
            if (d > best_d) {
                best_d = d;
                best = m;
            }
        }
        return best;
    }

    void douglas_peucker(double eps) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 1; i < n(); ++i) {
            const double d = distance(pts[0], pts[i]);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        keep[0] = 1;
        keep[far] = 1;
        std::vector<std::pair<std::size_t, std::size_t>> work{{0, far}, {far, n()}};
        while (!work.empty()) {
            auto [i, j] = work.back();
            work.pop_back();
            if (j <= i + 1) continue;
            const std::size_t m = worst_between(i, j);
            if (point_segment_distance(at(m), at(i), at(j)) > eps) {
                keep[m] = 1;
                work.push_back({i, m});
                work.push_back({m, j});
            }
        }
    }

    std::vector<Point2> result() const {
        std::vector<Point2> out;
        for (std::size_t i : kept()) out.push_back(pts[i]);
        return out;
    }
};

}  // namespace

BoundaryLoop simplify_loop(const BoundaryLoop& loop, double epsilon_fit) {
    if (!(epsilon_fit > 0.0)) throw GeometryError("simplify_loop: epsilon_fit must be positive");
    std::vector<Point2> pts = open_loop(loop.points);
    if (pts.size() < 3) throw GeometryError("simplify_loop: loop has fewer than 3 vertices");
    LoopWork w(std::move(pts));
    w.douglas_peucker(epsilon_fit);
    auto out = w.result();
    if (out.size() < 3) throw GeometryError("simplify_loop: loop degenerates below 3 vertices");
    return {close_loop(std::move(out)), loop.kind};
}

bool segment_clips_occupied(const OccupancyGrid& grid, Point2 a, Point2 b) {
    // Lattice coordinates with y up.
    const Point2 p{a.x / grid.resolution, a.y / grid.resolution};
    const Point2 q{b.x / grid.resolution, b.y / grid.resolution};
    const Point2 d = q - p;
    std::vector<double> ts{0.0, 1.0};
    auto add_crossings = [&](double from, double delta) {
        if (delta == 0.0) return;
        const double lo = std::min(from, from + delta), hi = std::max(from, from + delta);
        for (double g = std::ceil(lo); g <= hi; g += 1.0) {
            const double t = (g - from) / delta;
            if (t > 0.0 && t < 1.0) ts.push_back(t);
        }
    };
    add_crossings(p.x, d.x);
    add_crossings(p.y, d.y);
    std::sort(ts.begin(), ts.end());
    auto occupied_lattice = [&](long long i, long long k) {
        // Lattice cell [i,i+1]x[k,k+1] -> grid row H-1-k.
        if (i < 0 || k < 0 || i >= grid.width || k >= grid.height) return true;
        return grid.occupied(static_cast<int>(i), grid.height - 1 - static_cast<int>(k));
    };
    constexpr double kOnLine = 1e-9;
    for (std::size_t s = 1; s < ts.size(); ++s) {
        if (ts[s] - ts[s - 1] <= 1e-12) continue;
        const Point2 m = lerp(p, q, 0.5 * (ts[s] + ts[s - 1]));
        const double fx = std::floor(m.x), fy = std::floor(m.y);
        const bool on_x = std::abs(m.x - std::round(m.x)) < kOnLine;
        const bool on_y = std::abs(m.y - std::round(m.y)) < kOnLine;
        if (on_x && on_y) continue;
        if (on_x) {
            const long long gx = std::llround(m.x);
            if (occupied_lattice(gx - 1, static_cast<long long>(fy)) && occupied_lattice(gx, static_cast<long long>(fy)))
                return true;
        } else if (on_y) {
            const long long gy = std::llround(m.y);
            if (occupied_lattice(static_cast<long long>(fx), gy - 1) && occupied_lattice(static_cast<long long>(fx), gy))
                return true;
        } else if (occupied_lattice(static_cast<long long>(fx), static_cast<long long>(fy))) {
            return true;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Hole merging

int SimplePolygon::bridge_count() const {
    int m = -1;
    for (int b : edge_bridge) m = std::max(m, b);
    return m + 1;
}

int SimplePolygon::bridge_twin(int edge) const {
    const int b = edge_bridge[edge];
    if (b < 0) return -1;
    for (int i = 0; i < static_cast<int>(edge_bridge.size()); ++i)
        if (i != edge && edge_bridge[i] == b) return i;
    return -1;
}

bool SimplePolygon::is_bridge_vertex(int v) const {
    const int n = static_cast<int>(size());
    return edge_bridge[v] >= 0 || edge_bridge[(v + n - 1) % n] >= 0;
}

namespace {

// Direction d from vertex `at` lies strictly inside the interior wedge formed
// by neighbours prev and next (interior on the left of prev->at->next).
bool in_wedge(Point2 prev, Point2 at, Point2 next, Point2 target, double eps) {
    const Point2 a = next - at;
    const Point2 b = prev - at;
    const Point2 d = target - at;
    const int ad = orient({0, 0}, a, d, eps);
    const int db = orient({0, 0}, d, b, eps);
    if (orient({0, 0}, a, b, eps) > 0) return ad > 0 && db > 0;
    return ad > 0 || db > 0;
}

std::vector<Point2> oriented(const BoundaryLoop& loop, bool want_ccw) {
    std::vector<Point2> pts = open_loop(loop.points);
    if ((signed_area(pts) > 0.0) != want_ccw) std::reverse(pts.begin(), pts.end());
    return pts;
}

bool bridge_clear(Point2 from, Point2 to, const std::vector<const std::vector<Point2>*>& loops, double eps) {
    const Segment s{from, to};
    for (const auto* loop : loops) {
        const std::size_t n = loop->size();
        for (std::size_t i = 0; i < n; ++i) {
            const Segment e{(*loop)[i], (*loop)[(i + 1) % n]};
            const auto hit = seg_intersect(s, e, eps);
            if (hit.kind == IntersectionKind::none) continue;
            if (hit.kind == IntersectionKind::endpoint_touch &&
                (distance(*hit.point, from) <= eps || distance(*hit.point, to) <= eps))
                continue;
            return false;
        }
    }
    return true;
}

}  // namespace

SimplePolygon merge_holes(const BoundaryLoop& outer, const std::vector<BoundaryLoop>& holes) {
    SimplePolygon poly;
    poly.vertices = oriented(outer, true);
    poly.edge_bridge.assign(poly.vertices.size(), -1);
    if (poly.vertices.size() < 3) throw GeometryError("merge_holes: outer loop has fewer than 3 vertices");

    std::vector<std::vector<Point2>> hs;
    for (const auto& h : holes) {
        hs.push_back(oriented(h, false));
        if (hs.back().size() < 3) throw GeometryError("merge_holes: hole has fewer than 3 vertices");
    }
    std::vector<Point2> all = poly.vertices;
    for (const auto& h : hs) all.insert(all.end(), h.begin(), h.end());
    const double eps = geometry_eps(all);

    auto leftmost = [](const std::vector<Point2>& h) {
        return static_cast<std::size_t>(std::min_element(h.begin(), h.end(), [](Point2 a, Point2 b) {
                                            return a.x < b.x || (a.x == b.x && a.y < b.y);
                                        }) -
                                        h.begin());
    };
    std::vector<std::size_t> order(hs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Point2 pa = hs[a][leftmost(hs[a])], pb = hs[b][leftmost(hs[b])];
        return pa.x < pb.x || (pa.x == pb.x && pa.y < pb.y);
    });

    std::vector<char> merged(hs.size(), 0);
    int bridge_id = 0;
    for (std::size_t hi : order) {
        const auto& hole = hs[hi];
        const std::size_t hn = hole.size();
        const std::size_t k = leftmost(hole);
        const Point2 h = hole[k];
        const Point2 h_prev = hole[(k + hn - 1) % hn];
        const Point2 h_next = hole[(k + 1) % hn];

        std::vector<const std::vector<Point2>*> blockers{&poly.vertices};
        for (std::size_t j = 0; j < hs.size(); ++j)
            if (!merged[j]) blockers.push_back(&hs[j]);

        const std::size_t n = poly.vertices.size();
        std::vector<std::size_t> cand(n);
        std::iota(cand.begin(), cand.end(), 0);
        std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            return distance(poly.vertices[a], h) < distance(poly.vertices[b], h);
        });
        std::optional<std::size_t> chosen;
        for (std::size_t i : cand) {
            const Point2 v = poly.vertices[i];
            if (distance(v, h) <= eps) continue;
            if (!in_wedge(poly.vertices[(i + n - 1) % n], v, poly.vertices[(i + 1) % n], h, eps)) continue;
            if (!in_wedge(h_prev, h, h_next, v, eps)) continue;
            if (!bridge_clear(v, h, blockers, eps)) continue;
            chosen = i;
            break;
        }
        if (!chosen) throw InternalError("merge_holes: no visible bridge for hole");

        const std::size_t i = *chosen;
        std::vector<Point2> verts(poly.vertices.begin(), poly.vertices.begin() + i + 1);
        std::vector<int> tags(poly.edge_bridge.begin(), poly.edge_bridge.begin() + i);
        tags.push_back(bridge_id);  // v -> h
        for (std::size_t s = 0; s < hn; ++s) {
            verts.push_back(hole[(k + s) % hn]);
            tags.push_back(-1);
        }
        verts.push_back(h);
        tags.push_back(bridge_id);  // h -> v
        verts.push_back(poly.vertices[i]);
        tags.push_back(poly.edge_bridge[i]);
        verts.insert(verts.end(), poly.vertices.begin() + i + 1, poly.vertices.end());
        tags.insert(tags.end(), poly.edge_bridge.begin() + i + 1, poly.edge_bridge.end());
        poly.vertices = std::move(verts);
        poly.edge_bridge = std::move(tags);
        merged[hi] = 1;
        ++bridge_id;
    }
    return poly;
}

bool is_weakly_simple(const SimplePolygon& poly, double eps) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    if (n < 3) return false;
    if (signed_area(v) <= 0.0) return false;
    auto duplicated = [&](Point2 p) {
        int count = 0;
        for (const auto& q : v)
            if (distance(p, q) <= eps) ++count;
        return count > 1;
    };
    for (std::size_t i = 0; i < n; ++i) {
        const Segment ei{v[i], v[(i + 1) % n]};
        if (distance(ei.a, ei.b) <= eps) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            const Segment ej{v[j], v[(j + 1) % n]};
            const auto hit = seg_intersect(ei, ej, eps);
            if (hit.kind == IntersectionKind::none) continue;
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            const bool twins = poly.edge_bridge[i] >= 0 && poly.edge_bridge[i] == poly.edge_bridge[j];
            if (twins) continue;
            if (hit.kind == IntersectionKind::endpoint_touch) {
                if (adjacent) continue;
                const Point2 p = *hit.point;
                const bool at_ends_i = distance(p, ei.a) <= eps || distance(p, ei.b) <= eps;
                const bool at_ends_j = distance(p, ej.a) <= eps || distance(p, ej.b) <= eps;
                if (at_ends_i && at_ends_j && duplicated(p)) continue;
            }
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Full ingest

namespace {

void fit_component(const OccupancyGrid& grid, std::vector<LoopWork>& loops, double eps_fit) {
    for (auto& w : loops) w.douglas_peucker(eps_fit);

    auto split = [](LoopWork& w, std::size_t i, std::size_t j) {
        if (j <= i + 1) return false;
        w.keep[w.worst_between(i, j) % w.n()] = 1;
        return true;
    };
    struct Edge {
        std::size_t loop, i, j;
        std::size_t pos, count;  // position among kept edges of the loop
    };

    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<Edge> edges;
        for (std::size_t l = 0; l < loops.size(); ++l) {
            auto& w = loops[l];
            auto kept = w.kept();
            if (kept.size() < 3) {
                // Degenerate: split the widest span.
                std::size_t best = 0, span = 0;
                for (std::size_t e = 0; e < kept.size(); ++e) {
                    const std::size_t i = kept[e], j = e + 1 < kept.size() ? kept[e + 1] : w.n();
                    if (j - i > span) {
                        span = j - i;
                        best = e;
                    }
                }
                const std::size_t i = kept[best];
                const std::size_t j = best + 1 < kept.size() ? kept[best + 1] : w.n();
                if (split(w, i, j)) changed = true;
                continue;
            }
            for (std::size_t e = 0; e < kept.size(); ++e) {
                const std::size_t i = kept[e], j = e + 1 < kept.size() ? kept[e + 1] : w.n();
                edges.push_back({l, i, j, e, kept.size()});
            }
        }
        if (changed) continue;

        for (const auto& e : edges) {
            auto& w = loops[e.loop];
            if (e.j > e.i + 1 && segment_clips_occupied(grid, w.at(e.i), w.at(e.j))) changed |= split(w, e.i, e.j);
        }
        if (changed) continue;

        for (std::size_t a = 0; a < edges.size(); ++a) {
            const auto& ea = edges[a];
            const Segment sa{loops[ea.loop].at(ea.i), loops[ea.loop].at(ea.j)};
            for (std::size_t b = a + 1; b < edges.size(); ++b) {
                const auto& eb = edges[b];
                if (ea.j - ea.i == 1 && eb.j - eb.i == 1) continue;
                if (ea.loop == eb.loop) {
                    const bool adjacent = eb.pos == ea.pos + 1 || (ea.pos == 0 && eb.pos + 1 == eb.count);
                    if (adjacent) continue;
                }
                const Segment sb{loops[eb.loop].at(eb.i), loops[eb.loop].at(eb.j)};
                if (seg_intersect(sa, sb, 1e-9).kind == IntersectionKind::none) continue;
                changed |= split(loops[ea.loop], ea.i, ea.j);
                changed |= split(loops[eb.loop], eb.i, eb.j);
            }
        }
        if (changed) continue;

        // A chord must not swallow another loop into its pocket.
        for (const auto& e : edges) {
            if (e.j <= e.i + 1) continue;
            auto& w = loops[e.loop];
            std::vector<Point2> pocket(w.pts.begin() + static_cast<std::ptrdiff_t>(e.i),
                                       w.pts.begin() + static_cast<std::ptrdiff_t>(std::min(e.j, w.n())));
            if (e.j == w.n()) pocket.push_back(w.pts[0]);
            for (std::size_t m = 0; m < loops.size(); ++m) {
                if (m == e.loop) continue;
                const Point2 probe = loops[m].pts[0];
                if (point_in_polygon(pocket, probe, 0.0)) {
                    changed |= split(w, e.i, e.j);
                    break;
                }
            }
        }
    }
}

}  // namespace

MapGeometry ingest(const OccupancyGrid& input, const IngestConfig& cfg) {
    if (!(cfg.epsilon_fit > 0.0)) throw GeometryError("ingest: epsilon_fit must be positive");
    OccupancyGrid grid = input;
    grid.occ_threshold = cfg.occ_threshold;
    grid = normalize_diagonals(grid);

    MapGeometry out;
    out.width = grid.width;
    out.height = grid.height;
    out.resolution = grid.resolution;
    out.epsilon_fit = cfg.epsilon_fit;

    for (auto& comp : extract_components(grid)) {
        std::vector<LoopWork> loops;
        loops.emplace_back(open_loop(comp.outer.points));
        for (const auto& h : comp.holes) loops.emplace_back(open_loop(h.points));
        fit_component(grid, loops, cfg.epsilon_fit);

        ComponentGeometry g;
        g.id = comp.id;
        g.free_cells = comp.cell_count;
        g.outer = loops[0].result();
        for (std::size_t i = 1; i < loops.size(); ++i) g.holes.push_back(loops[i].result());

        BoundaryLoop outer{close_loop(g.outer), LoopKind::outer};
        std::vector<BoundaryLoop> holes;
        for (const auto& h : g.holes) holes.push_back({close_loop(h), LoopKind::hole});
        g.polygon = merge_holes(outer, holes);
        g.polygon.component = comp.id;
        out.components.push_back(std::move(g));
    }
    return out;
}

}  // namespace cdt
