#include "plume/adf.hpp"

#include <cmath>
#include <stdexcept>

namespace plume::nn {

void validate(const AdfSpec& spec) {
    if (!(spec.mu >= 1.0)) {
        throw std::invalid_argument("AdfSpec: mu must be >= 1");
    }
    if (!(spec.domain.hi.x > spec.domain.lo.x) || !(spec.domain.hi.y > spec.domain.lo.y)) {
        throw std::invalid_argument("AdfSpec: empty domain box");
    }
}

AdfValue adf(const AdfSpec& spec, Vec2 x) {
    const double phi[4] = {x.x - spec.domain.lo.x, spec.domain.hi.x - x.x,
                           x.y - spec.domain.lo.y, spec.domain.hi.y - x.y};
    static const Vec2 dphi[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

    double m = phi[0];
    for (int i = 1; i < 4; ++i) m = std::min(m, phi[i]);

    AdfValue out;
    if (m <= 0.0) {
        // Boundary (or exterior) branch: exact zero; gradient is the inward
        // limit, the sum of the vanishing edges' normals.
        for (int i = 0; i < 4; ++i) {
            if (phi[i] <= 0.0) out.grad += dphi[i];
        }
        return out;
    }

    // Scale by the smallest edge distance so the powers stay in [0,1].
    const double mu = spec.mu;
    double t = 0.0;
    double r[4];
    for (int i = 0; i < 4; ++i) {
        r[i] = m / phi[i];
        t += (mu == 1.0) ? r[i] : std::pow(r[i], mu);
    }
    if (mu == 1.0) {
        out.psi = m / t;
        const double inv_t2 = 1.0 / (t * t);
        for (int i = 0; i < 4; ++i) out.grad += dphi[i] * (r[i] * r[i] * inv_t2);
    } else {
        out.psi = m * std::pow(t, -1.0 / mu);
        const double scale = std::pow(t, -(1.0 + mu) / mu);
        for (int i = 0; i < 4; ++i) out.grad += dphi[i] * (std::pow(r[i], 1.0 + mu) * scale);
    }
    return out;
}

}  // namespace plume::nn
