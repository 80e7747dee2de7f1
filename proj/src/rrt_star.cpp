#include "cdt/rrt_star.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cdt/errors.hpp"

namespace cdt {

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
}

}  // namespace

FreeSpace::FreeSpace(const ComponentGeometry& component) : outer_(component.outer), holes_(component.holes) {
    if (outer_.size() < 3) throw InvalidInput("FreeSpace: outer boundary needs three vertices");
    auto add_loop = [&](const std::vector<Point2>& loop) {
        for (std::size_t i = 0; i < loop.size(); ++i) edges_.push_back({loop[i], loop[(i + 1) % loop.size()]});
    };
    add_loop(outer_);
    for (const auto& h : holes_) add_loop(h);

    lo_ = hi_ = outer_[0];
    for (Point2 v : outer_) {
        lo_ = {std::min(lo_.x, v.x), std::min(lo_.y, v.y)};
        hi_ = {std::max(hi_.x, v.x), std::max(hi_.y, v.y)};
    }
    area_ = std::abs(signed_area(outer_));
    for (const auto& h : holes_) area_ -= std::abs(signed_area(h));

    const double span = std::max(hi_.x - lo_.x, hi_.y - lo_.y);
    const int target = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(edges_.size()))) * 2, 4, 256);
    cell_ = span / target;
    cols_ = std::max(1, static_cast<int>(std::ceil((hi_.x - lo_.x) / cell_)));
    rows_ = std::max(1, static_cast<int>(std::ceil((hi_.y - lo_.y) / cell_)));
    buckets_.assign(static_cast<std::size_t>(cols_) * rows_, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        int c0, r0, c1, r1;
        bucket_range(edges_[e].a, edges_[e].b, c0, r0, c1, r1);
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c) buckets_[static_cast<std::size_t>(r) * cols_ + c].push_back(static_cast<int>(e));
    }
}

int FreeSpace::bucket_col(double x) const {
    return std::clamp(static_cast<int>((x - lo_.x) / cell_), 0, cols_ - 1);
}

void FreeSpace::bucket_range(Point2 a, Point2 b, int& c0, int& r0, int& c1, int& r1) const {
    auto col = [&](double x) { return bucket_col(x); };
    auto row = [&](double y) { return std::clamp(static_cast<int>((y - lo_.y) / cell_), 0, rows_ - 1); };
    c0 = col(std::min(a.x, b.x));
    c1 = col(std::max(a.x, b.x));
    r0 = row(std::min(a.y, b.y));
    r1 = row(std::max(a.y, b.y));
}

bool FreeSpace::contains(Point2 p) const {
    if (p.x < lo_.x || p.y < lo_.y || p.x > hi_.x || p.y > hi_.y) return false;
    // Crossing parity of a ray to the right. An edge sits in every bucket it
    // overlaps, so each crossing is counted only in the bucket holding it.
    int c0, r0, c1, r1;
    bucket_range(p, {hi_.x, p.y}, c0, r0, c1, r1);
    bool inside = false;
    for (int c = c0; c <= c1; ++c)
        for (int e : buckets_[static_cast<std::size_t>(r0) * cols_ + c]) {
            const Point2 a = edges_[e].a, b = edges_[e].b;
            if ((a.y > p.y) == (b.y > p.y)) continue;
            const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x && bucket_col(x) == c) inside = !inside;
        }
    return inside;
}

bool FreeSpace::segment_free(Point2 a, Point2 b) const {
    if (!contains(a) || !contains(b) || !contains(midpoint(a, b))) return false;
    int c0, r0, c1, r1;
    bucket_range(a, b, c0, r0, c1, r1);
    const Segment s{a, b};
    const double len = distance(a, b);
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c)
            for (int e : buckets_[static_cast<std::size_t>(r) * cols_ + c]) {
                const Intersection x = seg_intersect(s, edges_[e]);
                if (x.kind == IntersectionKind::proper || x.kind == IntersectionKind::collinear_overlap) return false;
                if (x.kind == IntersectionKind::endpoint_touch && len > 0.0) {
                    // Passing through a boundary vertex: look just past the contact.
                    const double t = distance(a, *x.point) / len;
                    const double d = 1e-6;
                    if (t > d && t < 1.0 - d && (!contains(lerp(a, b, t - d)) || !contains(lerp(a, b, t + d))))
                        return false;
                }
            }
    return true;
}

namespace {

struct Node {
    Point2 p;
    int parent = -1;
    double cost = 0.0;
};

class NodeGrid {
public:
    NodeGrid(Point2 lo, Point2 hi, double cell) : lo_(lo), cell_(cell) {
        cols_ = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / cell)) + 1);
        rows_ = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / cell)) + 1);
        buckets_.assign(static_cast<std::size_t>(cols_) * rows_, {});
    }
    void insert(int id, Point2 p) { buckets_[index(col(p.x), row(p.y))].push_back(id); }

    int nearest(const std::vector<Node>& nodes, Point2 p) const {
        const int pc = col(p.x), pr = row(p.y);
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int ring = 0; ring <= std::max(cols_, rows_); ++ring) {
            if (best >= 0 && bd <= (ring - 1) * cell_) break;
            for (int r = pr - ring; r <= pr + ring; ++r)
                for (int c = pc - ring; c <= pc + ring; ++c) {
                    if (std::max(std::abs(r - pr), std::abs(c - pc)) != ring) continue;
                    if (c < 0 || r < 0 || c >= cols_ || r >= rows_) continue;
                    for (int id : buckets_[index(c, r)]) {
                        const double d = distance(nodes[id].p, p);
                        if (d < bd || (d == bd && id < best)) {
                            bd = d;
                            best = id;
                        }
                    }
                }
        }
        return best;
    }

    void within(const std::vector<Node>& nodes, Point2 p, double radius, std::vector<int>& out) const {
        out.clear();
        const int reach = static_cast<int>(std::ceil(radius / cell_));
        const int pc = col(p.x), pr = row(p.y);
        for (int r = std::max(0, pr - reach); r <= std::min(rows_ - 1, pr + reach); ++r)
            for (int c = std::max(0, pc - reach); c <= std::min(cols_ - 1, pc + reach); ++c)
                for (int id : buckets_[index(c, r)])
                    if (distance(nodes[id].p, p) <= radius) out.push_back(id);
        std::sort(out.begin(), out.end());
    }

private:
    int col(double x) const { return std::clamp(static_cast<int>((x - lo_.x) / cell_), 0, cols_ - 1); }
    int row(double y) const { return std::clamp(static_cast<int>((y - lo_.y) / cell_), 0, rows_ - 1); }
    std::size_t index(int c, int r) const { return static_cast<std::size_t>(r) * cols_ + c; }

    Point2 lo_;
    double cell_;
    int cols_, rows_;
    std::vector<std::vector<int>> buckets_;
};

}  // namespace

RrtStarResult rrt_star(const FreeSpace& space, Point2 start, Point2 goal, const RrtStarParams& params) {
    if (params.iterations < 0) throw InvalidInput("rrt_star: negative iteration count");
    if (!space.contains(start)) throw NotInFreeSpace("rrt_star: start is not in free space");
    if (!space.contains(goal)) throw NotInFreeSpace("rrt_star: goal is not in free space");
    const auto t0 = Clock::now();
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> ux(space.lo().x, space.hi().x), uy(space.lo().y, space.hi().y), u01(0, 1);

    const double diag = distance(space.lo(), space.hi());
    const double step = params.step_fraction * diag;
    const double gamma = 2.0 * std::sqrt(1.5) * std::sqrt(space.area() / std::numbers::pi);

    std::vector<Node> nodes{{start, -1, 0.0}};
    std::vector<std::vector<int>> children(1);
    std::vector<char> goal_link(1, 0);
    NodeGrid grid(space.lo(), space.hi(), std::max(step, diag * 1e-3));
    grid.insert(0, start);

    RrtStarResult out;
    int best_node = -1;
    double best = std::numeric_limits<double>::infinity();
    auto offer = [&](int id, int iteration) {
        const double len = nodes[id].cost + distance(nodes[id].p, goal);
        if (len < best) {
            best = len;
            best_node = id;
            const double now = micros_since(t0);
            if (!out.t_init_us) out.t_init_us = now;
            out.improvements.push_back({iteration, now, len});
        }
    };
    if (space.segment_free(start, goal) && distance(start, goal) <= step) {
        goal_link[0] = 1;
        offer(0, 0);
    }

    std::vector<int> near, stack;
    for (int it = 0; it < params.iterations; ++it) {
        out.iterations_used = it + 1;
        if (params.time_budget_us > 0.0 && micros_since(t0) > params.time_budget_us) break;
        if (params.stop_length > 0.0 && best <= params.stop_length) break;

        Point2 x_rand = goal;
        if (u01(rng) >= params.goal_bias) {
            do x_rand = {ux(rng), uy(rng)};
            while (!space.contains(x_rand));
        }
        const int nearest = grid.nearest(nodes, x_rand);
        Point2 x_new = x_rand;
        const double d = distance(nodes[nearest].p, x_rand);
        if (d > step) x_new = lerp(nodes[nearest].p, x_rand, step / d);
        if (d == 0.0 || !space.segment_free(nodes[nearest].p, x_new)) continue;

        const double n = static_cast<double>(nodes.size());
        const double radius = std::min(step, gamma * std::sqrt(std::log(n + 1.0) / (n + 1.0)));
        grid.within(nodes, x_new, radius, near);

        int parent = nearest;
        double cost = nodes[nearest].cost + distance(nodes[nearest].p, x_new);
        for (int id : near) {
            const double c = nodes[id].cost + distance(nodes[id].p, x_new);
            if (c < cost && space.segment_free(nodes[id].p, x_new)) {
                cost = c;
                parent = id;
            }
        }
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({x_new, parent, cost});
        children.emplace_back();
        children[parent].push_back(id);
        goal_link.push_back(distance(x_new, goal) <= step && space.segment_free(x_new, goal));
        grid.insert(id, x_new);
        if (goal_link[id]) offer(id, it);

        for (int v : near) {
            if (v == parent) continue;
            const double c = cost + distance(x_new, nodes[v].p);
            if (c >= nodes[v].cost || !space.segment_free(x_new, nodes[v].p)) continue;
            auto& siblings = children[nodes[v].parent];
            siblings.erase(std::find(siblings.begin(), siblings.end(), v));
            children[id].push_back(v);
            nodes[v].parent = id;
            const double delta = nodes[v].cost - c;
            stack.assign(1, v);
            while (!stack.empty()) {
                const int w = stack.back();
                stack.pop_back();
                nodes[w].cost -= delta;
                if (goal_link[w]) offer(w, it);
                for (int ch : children[w]) stack.push_back(ch);
            }
        }
    }

    out.nodes = static_cast<int>(nodes.size());
    if (best_node >= 0) {
        out.success = true;
        out.best_length = best;
        Polyline rev{goal};
        for (int v = best_node; v >= 0; v = nodes[v].parent) rev.push_back(nodes[v].p);
        out.best_path.assign(rev.rbegin(), rev.rend());
    }
    out.elapsed_us = micros_since(t0);
    return out;
}

}  // namespace cdt
