#pragma once

#include "plume/geometry.hpp"

namespace plume::nn {

/// Approximate distance function to the box boundary: with per-edge distances
/// phi_i, psi = (sum phi_i^-mu)^(-1/mu). Vanishes exactly on the boundary and
/// is smooth inside.
struct AdfSpec {
    double mu = 1.0;
    Box2 domain = kDomain;
};

struct AdfValue {
    double psi = 0.0;
    Vec2 grad;
};

/// psi and its gradient at x. On (or outside) the boundary the value branch
/// returns exactly 0 and the gradient its continuous one-sided limit.
AdfValue adf(const AdfSpec& spec, Vec2 x);

/// Throws std::invalid_argument for mu < 1.
void validate(const AdfSpec& spec);

}  // namespace plume::nn
