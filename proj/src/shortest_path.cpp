#include "cdt/shortest_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdt/errors.hpp"

namespace cdt {

double map_diagonal(const DissectionMap& dm) {
    double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
    double hi_x = -lo_x, hi_y = -lo_x;
    for (const auto& cell : dm.cells) {
        for (const auto& p : cell.vertices) {
            lo_x = std::min(lo_x, p.x);
            lo_y = std::min(lo_y, p.y);
            hi_x = std::max(hi_x, p.x);
            hi_y = std::max(hi_y, p.y);
        }
    }
    if (lo_x > hi_x) return 0.0;
    return std::hypot(hi_x - lo_x, hi_y - lo_y);
}

SolverConfig default_solver_config(const DissectionMap& dm, std::size_t crossings) {
    SolverConfig cfg;
    cfg.epsilon_stop = 1e-6 * std::max(map_diagonal(dm), 1e-12);
    cfg.max_rounds = std::max<int>(10, 10 * static_cast<int>(crossings));
    return cfg;
}

double project_param(Point2 prev, Point2 next, const Cutline& c) {
    const Point2 d = c.b - c.a;
    const double len2 = dot(d, d);
    if (len2 == 0.0) return 0.0;
    const double len = std::sqrt(len2);
    const Point2 n{-d.y / len, d.x / len};
    const double sa = dot(n, prev - c.a);
    double sb = dot(n, next - c.a);
    if (sa * sb > 0.0) {
        next = next - (2.0 * sb) * n;
        sb = -sb;
    }
    double t;
    const double tol = 1e-12 * std::max({len, norm(prev - c.a), norm(next - c.a)});
    if (std::abs(sa - sb) <= tol) {
        // Both on the cutline's line: any point between their projections.
        t = 0.5 * (dot(prev - c.a, d) + dot(next - c.a, d)) / len2;
    } else {
        const Point2 x = lerp(prev, next, sa / (sa - sb));
        t = dot(x - c.a, d) / len2;
    }
    return std::clamp(t, 0.0, 1.0);
}

Point2 project_on_cutline(Point2 prev, Point2 next, const Cutline& c) {
    return c.at(project_param(prev, next, c));
}

namespace {

struct Band {
    const DissectionMap& dm;
    Point2 xs, xe;
    std::vector<const Cutline*> cuts;
    std::vector<double> t;

    Point2 point(std::size_t k) const {  // k in [0, m+1]
        if (k == 0) return xs;
        if (k == cuts.size() + 1) return xe;
        return cuts[k - 1]->at(t[k - 1]);
    }

    double length() const {
        double s = 0.0;
        for (std::size_t k = 0; k <= cuts.size(); ++k) s += distance(point(k), point(k + 1));
        return s;
    }

    // Rounds of ascending sweeps; appends the length after each round.
    int descend(const SolverConfig& cfg, std::vector<double>& record) {
        double cost = length();
        int rounds = 0;
        while (rounds < cfg.max_rounds) {
            for (std::size_t k = 1; k <= cuts.size(); ++k)
                t[k - 1] = project_param(point(k - 1), point(k + 1), *cuts[k - 1]);
            ++rounds;
            const double next = length();
            record.push_back(next);
            const double gain = cost - next;
            cost = next;
            if (gain < cfg.epsilon_stop) break;
        }
        return rounds;
    }
};

}  // namespace

ClassPath shortest_in_class(const DissectionMap& dm, const CdtCode& code, Point2 x_s, Point2 x_e,
                            SolverConfig cfg) {
    const auto& nodes = code.nodes();
    if (nodes.empty()) throw InvalidInput("shortest_in_class: empty code");
    if (!in_cell(dm, nodes.front(), x_s)) throw InvalidInput("shortest_in_class: start is not in the first cell");
    if (!in_cell(dm, nodes.back(), x_e)) throw InvalidInput("shortest_in_class: goal is not in the last cell");

    Band band{dm, x_s, x_e, {}, {}};
    ClassPath out;
    const auto& edges = code.path().edges;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        int cid = i < edges.size() ? edges[i] : -1;
        if (cid >= 0) {
            const auto& c = dm.cutlines.at(static_cast<std::size_t>(cid));
            const bool joins = (c.left_poly == nodes[i - 1] && c.right_poly == nodes[i]) ||
                               (c.right_poly == nodes[i - 1] && c.left_poly == nodes[i]);
            if (!joins) cid = -1;
        }
        if (cid < 0) {
            const auto found = dm.cutline_between(nodes[i - 1], nodes[i]);
            if (!found) throw InvalidInput("shortest_in_class: consecutive cells are not adjacent");
            cid = *found;
        }
        band.cuts.push_back(&dm.cutlines[static_cast<std::size_t>(cid)]);
        out.cutlines.push_back(cid);
    }
    band.t.assign(band.cuts.size(), 0.5);

    const SolverConfig def = default_solver_config(dm, band.cuts.size());
    if (cfg.epsilon_stop <= 0.0) cfg.epsilon_stop = def.epsilon_stop;
    if (cfg.max_rounds <= 0) cfg.max_rounds = def.max_rounds;

    out.round_lengths.push_back(band.length());
    out.rounds = band.descend(cfg, out.round_lengths);

    // Snag polish: points parked on a cutline end can block each other.
    std::vector<double> saved = band.t;
    bool snagged = false;
    for (auto& t : band.t) {
        if (t <= 0.0) {
            t = 1e-4;
            snagged = true;
        } else if (t >= 1.0) {
            t = 1.0 - 1e-4;
            snagged = true;
        }
    }
    if (snagged) {
        const double before = out.round_lengths.back();
        out.polish_lengths.push_back(band.length());
        const int extra = band.descend(cfg, out.polish_lengths);
        if (band.length() < before - cfg.epsilon_stop) {
            out.polished = true;
            out.rounds += extra;
        } else {
            band.t = saved;
        }
    }

    out.params = band.t;
    out.path.push_back(x_s);
    for (std::size_t k = 1; k <= band.cuts.size() + 1; ++k) {
        const Point2 p = band.point(k);
        if (distance(p, out.path.back()) > dm.eps) out.path.push_back(p);
    }
    if (out.path.size() == 1) out.path.push_back(x_e);
    out.length = polyline_length(out.path);
    return out;
}

}  // namespace cdt
