#pragma once

#include <vector>

#include "cdt/decomposition.hpp"
#include "cdt/geometry.hpp"
#include "cdt/topology.hpp"

namespace cdt {

/// Stop rule for the band descent. Zero fields are filled in from the map
/// and the code length (see default_solver_config).
struct SolverConfig {
    double epsilon_stop = 0.0;
    int max_rounds = 0;
};

/// 1e-6 of the map diagonal, 10 rounds per crossed cutline (at least 10).
SolverConfig default_solver_config(const DissectionMap& dm, std::size_t crossings);

/// Diagonal of the bounding box of all cells.
double map_diagonal(const DissectionMap& dm);

/// Point on cutline c minimizing |x - prev| + |x - next|.
Point2 project_on_cutline(Point2 prev, Point2 next, const Cutline& c);
/// Same, as the parameter along a->b in [0, 1].
double project_param(Point2 prev, Point2 next, const Cutline& c);

struct ClassPath {
    Polyline path;                     // x_s, crossing points, x_e
    double length = 0.0;
    std::vector<int> cutlines;         // cutline crossed at each band point
    std::vector<double> params;        // band point parameters along those cutlines
    std::vector<double> round_lengths; // length before the first round, then after each
    std::vector<double> polish_lengths; // jittered start, then each polish round
    int rounds = 0;
    bool polished = false;             // the snag polish found an improvement
};

/// Shortest path from x_s to x_e inside the homotopy class `code`.
/// Throws InvalidInput when the endpoints are not in the first/last cells or
/// consecutive code nodes are not adjacent.
ClassPath shortest_in_class(const DissectionMap& dm, const CdtCode& code, Point2 x_s, Point2 x_e,
                            SolverConfig cfg = {});

}  // namespace cdt
