#pragma once

/// Physics-guided surrogate of the steady dispersion field: the network
/// output is multiplied by an approximate distance function of the domain
/// boundary, so the surrogate satisfies the homogeneous Dirichlet condition
/// exactly for every parameter vector.

#include <cstddef>
#include <vector>

#include "plume/adf.hpp"
#include "plume/geometry.hpp"
#include "plume/mlp.hpp"
#include "plume/parallel.hpp"

namespace plume {

struct SurrogateModel {
    nn::AdfSpec adf;             ///< boundary distance factor (domain + mu)
    Box2 source_box = kSourceBox;  ///< admissible source positions
    nn::MlpParameters params;    ///< network weights, input [x; p]
};

/// Throws std::invalid_argument if the model is inconsistent.
void validate(const SurrogateModel& model);

/// Surrogate value together with both gradients at (x, p).
struct SurrogateEval {
    double value = 0.0;  ///< u~(x; p)
    Vec2 grad_x;         ///< d u~ / dx, the spatial gradient
    Vec2 grad_p;         ///< d u~ / dp, the source-position sensitivity
};

/// Value only; cheaper than the full evaluation.
double surrogate_value(const SurrogateModel& model, Vec2 x, Vec2 p, nn::MlpTape& tape);

/// Value plus spatial gradient (what the H1 training loss consumes).
/// Writes value and grad_x of the result; grad_p is left zero.
SurrogateEval surrogate_value_grad_x(const SurrogateModel& model, Vec2 x, Vec2 p,
                                     nn::MlpTape& tape);

/// Full evaluation with both gradients.
SurrogateEval surrogate_eval(const SurrogateModel& model, Vec2 x, Vec2 p, nn::MlpTape& tape);

/// Batched value evaluation over pairs (x_i, p_i); out.size() == x.size().
/// Serial and parallel policies produce identical bits.
void surrogate_values(const SurrogateModel& model, const std::vector<Vec2>& x,
                      const std::vector<Vec2>& p, std::vector<double>& out,
                      ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace plume
