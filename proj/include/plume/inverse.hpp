#pragma once

/// Source localization: least-squares data misfit J(p') over the source box,
/// its analytic gradient through the surrogate's parameter sensitivity, and a
/// multi-start bound-constrained quasi-Newton driver.

#include <string>
#include <vector>

#include "plume/lbfgsb.hpp"
#include "plume/observations.hpp"
#include "plume/surrogate.hpp"

namespace plume {

/// J(p') = sum_j (y_j - u~(x_j; p'))^2 and its gradient
/// dJ/dp' = -2 sum_j (y_j - u~(x_j; p')) du~/dp(x_j; p').
/// The sum runs in a canonical observation order (sorted by x, y, value), so
/// the result is bitwise invariant under permutations of the input.
/// Throws std::invalid_argument if p_prime lies outside the source box.
double objective_and_gradient(const SurrogateModel& model, const ObservationSet& obs,
                              Vec2 p_prime, Vec2* grad);

enum class StartPolicy {
    Grid3,   ///< 3x3 uniform grid over the source box, inset by 1e-6 km
    Center,  ///< single start at the box center (paper-literal mode)
};

std::vector<Vec2> make_starts(StartPolicy policy, const Box2& p_box);

struct StartRecord {
    Vec2 start;
    Vec2 endpoint;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct LocalizationResult {
    Vec2 p_hat;                 ///< best endpoint, km; always inside the box
    double objective_value = 0.0;  ///< J(p_hat)
    int iterations = 0;         ///< iterations of the winning start
    bool converged = false;
    int starts_tried = 0;
    std::vector<StartRecord> starts;
};

/// Runs the bound-constrained minimizer from every start and returns the
/// endpoint with the smallest J (ties broken by start index). Deterministic.
LocalizationResult localize(const SurrogateModel& model, const ObservationSet& obs,
                            const std::vector<Vec2>& starts, const LbfgsOptions& options = {});
LocalizationResult localize(const SurrogateModel& model, const ObservationSet& obs,
                            StartPolicy policy = StartPolicy::Grid3,
                            const LbfgsOptions& options = {});

/// Result JSON: p_hat in km and m, objective, iterations, converged, and the
/// per-start table.
std::string localization_result_to_json(const LocalizationResult& result);

}  // namespace plume
