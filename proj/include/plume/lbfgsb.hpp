#pragma once

/// Bound-constrained limited-memory quasi-Newton minimizer over a 2-D box:
/// gradient projection combined with L-BFGS curvature (two-loop recursion,
/// memory 10) and a projected-path Armijo backtracking line search. This is a
/// faithful reimplementation of the behavior of the classic bound-constrained
/// L-BFGS method, not of its exact line-search internals.

#include <functional>

#include "plume/geometry.hpp"

namespace plume {

struct LbfgsOptions {
    int memory = 10;        ///< number of stored (s, y) correction pairs
    int max_iters = 200;    ///< hard iteration cap
    double pg_tol = 1e-10;  ///< stop when the projected gradient inf-norm drops below
    double armijo_c1 = 1e-4;
    int max_line_steps = 40;  ///< halvings before the line search gives up
};

struct LbfgsReport {
    Vec2 x;            ///< final iterate (always inside the box)
    double f = 0.0;    ///< objective at x
    int iterations = 0;
    bool converged = false;  ///< projected-gradient tolerance reached
};

/// Objective callback: returns f(x); writes the gradient when grad != nullptr.
using BoxObjective = std::function<double(Vec2 x, Vec2* grad)>;

/// Minimizes over the closed box. The start is clamped into the box first.
/// Throws std::runtime_error if the objective turns non-finite.
LbfgsReport minimize_box(const BoxObjective& objective, Vec2 start, const Box2& box,
                         const LbfgsOptions& options = {});

}  // namespace plume
