#include "plume/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace plume {

namespace {

struct Pair {
    Vec2 s;
    Vec2 y;
    double rho;  ///< 1 / (s . y)
};

/// Two-loop recursion: returns -H g with H built from the stored pairs.
Vec2 lbfgs_direction(const Vec2& g, const std::deque<Pair>& pairs) {
    Vec2 q = g;
    double a[64];
    int k = static_cast<int>(pairs.size());
    for (int i = k - 1; i >= 0; --i) {
        a[i] = pairs[static_cast<std::size_t>(i)].rho * dot(pairs[static_cast<std::size_t>(i)].s, q);
        q = q - a[i] * pairs[static_cast<std::size_t>(i)].y;
    }
    if (k > 0) {
        const Pair& newest = pairs.back();
        const double yy = dot(newest.y, newest.y);
        if (yy > 0.0) q = (dot(newest.s, newest.y) / yy) * q;
    }
    for (int i = 0; i < k; ++i) {
        const double b = pairs[static_cast<std::size_t>(i)].rho * dot(pairs[static_cast<std::size_t>(i)].y, q);
        q = q + (a[i] - b) * pairs[static_cast<std::size_t>(i)].s;
    }
    return {-q.x, -q.y};
}

}  // namespace

LbfgsReport minimize_box(const BoxObjective& objective, Vec2 start, const Box2& box,
                         const LbfgsOptions& options) {
    if (options.memory <= 0 || options.memory > 64 || options.max_iters <= 0 ||
        !(options.pg_tol > 0.0)) {
        throw std::invalid_argument("minimize_box: invalid options");
    }

    Vec2 x = box.clamp(start);
    Vec2 g;
    double f = objective(x, &g);
    if (!std::isfinite(f) || !g.finite()) {
        throw std::runtime_error("minimize_box: non-finite objective at the start point");
    }

    std::deque<Pair> pairs;
    LbfgsReport report;

    for (int it = 0; it < options.max_iters; ++it) {
        const Vec2 pg = x - box.clamp(x - g);
        if (pg.norm_inf() <= options.pg_tol) {
            report.converged = true;
            break;
        }

        const Vec2 quasi_newton = lbfgs_direction(g, pairs);
        Vec2 accepted;
        bool success = false;
        // Try the quasi-Newton direction first, steepest descent as fallback;
        // both are searched along the projected path x(a) = clamp(x + a d).
        for (int pass = 0; pass < 2 && !success; ++pass) {
            const bool raw_gradient = pass == 1 || pairs.empty();
            const Vec2 d = pass == 0 ? quasi_newton : Vec2{-g.x, -g.y};
            // Until curvature pairs exist the direction is just -g, whose
            // magnitude carries no step information; start from a unit-length
            // trial instead of a full gradient-sized one.
            double alpha = raw_gradient ? 1.0 / std::max(1.0, d.norm()) : 1.0;
            for (int ls = 0; ls < options.max_line_steps; ++ls) {
                const Vec2 xn = box.clamp(x + alpha * d);
                const Vec2 step = xn - x;
                if (step.x == 0.0 && step.y == 0.0) break;  // projection stalled
                const double fn = objective(xn, nullptr);
                const double slope = dot(g, step);
                if (std::isfinite(fn) && fn <= f + options.armijo_c1 * slope) {
                    accepted = xn;
                    success = true;
                    break;
                }
                // Backtrack to the minimizer of the quadratic through
                // phi(0)=f, phi'(0)=slope, phi(1)=fn (t scales the step taken),
                // clamped so progress is neither stalled nor thrown away.
                double shrink = 0.5;
                if (std::isfinite(fn)) {
                    const double curvature = fn - f - slope;
                    if (curvature > 0.0) shrink = -0.5 * slope / curvature;
                }
                alpha *= std::clamp(shrink, 0.1, 0.5);
            }
        }
        if (!success) break;  // no acceptable step; report the current iterate

        Vec2 gn;
        const double fn = objective(accepted, &gn);
        if (!std::isfinite(fn) || !gn.finite()) {
            throw std::runtime_error("minimize_box: non-finite objective during descent");
        }
        const Vec2 s = accepted - x;
        const Vec2 y = gn - g;
        const double sy = dot(s, y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (static_cast<int>(pairs.size()) == options.memory) pairs.pop_front();
            pairs.push_back({s, y, 1.0 / sy});
        }
        x = accepted;
        f = fn;
        g = gn;
        report.iterations = it + 1;
    }

    if (!report.converged) {
        const Vec2 pg = x - box.clamp(x - g);
        report.converged = pg.norm_inf() <= options.pg_tol;
    }
    report.x = x;
    report.f = f;
    return report;
}

}  // namespace plume
