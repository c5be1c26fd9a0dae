#include "plume/surrogate.hpp"

#include <stdexcept>

namespace plume {

void validate(const SurrogateModel& model) {
    validate(model.adf);
    nn::validate(model.params);
    if (!(model.source_box.lo.x < model.source_box.hi.x &&
          model.source_box.lo.y < model.source_box.hi.y)) {
        throw std::invalid_argument("SurrogateModel: empty source box");
    }
    if (!model.adf.domain.contains(model.source_box.lo) ||
        !model.adf.domain.contains(model.source_box.hi)) {
        throw std::invalid_argument("SurrogateModel: source box must lie inside the domain");
    }
}

double surrogate_value(const SurrogateModel& model, Vec2 x, Vec2 p, nn::MlpTape& tape) {
    const double z[4] = {x.x, x.y, p.x, p.y};
    const double net = nn::mlp_value(model.params, z, tape);
    return nn::adf(model.adf, x).psi * net;
}

SurrogateEval surrogate_value_grad_x(const SurrogateModel& model, Vec2 x, Vec2 p,
                                     nn::MlpTape& tape) {
    const double z[4] = {x.x, x.y, p.x, p.y};
    double dx[2];
    const double net = nn::mlp_forward_spatial(model.params, z, tape, dx);
    const nn::AdfValue a = nn::adf(model.adf, x);
    SurrogateEval r;
    r.value = a.psi * net;
    r.grad_x = {a.grad.x * net + a.psi * dx[0], a.grad.y * net + a.psi * dx[1]};
    return r;
}

SurrogateEval surrogate_eval(const SurrogateModel& model, Vec2 x, Vec2 p, nn::MlpTape& tape) {
    const double z[4] = {x.x, x.y, p.x, p.y};
    double dz[4];
    const double net = nn::mlp_value_jacobian(model.params, z, tape, dz);
    const nn::AdfValue a = nn::adf(model.adf, x);
    SurrogateEval r;
    r.value = a.psi * net;
    r.grad_x = {a.grad.x * net + a.psi * dz[0], a.grad.y * net + a.psi * dz[1]};
    r.grad_p = {a.psi * dz[2], a.psi * dz[3]};
    return r;
}

void surrogate_values(const SurrogateModel& model, const std::vector<Vec2>& x,
                      const std::vector<Vec2>& p, std::vector<double>& out, ExecPolicy policy) {
    if (x.size() != p.size()) {
        throw std::invalid_argument("surrogate_values: x and p length mismatch");
    }
    out.resize(x.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    if (policy == ExecPolicy::Parallel) {
#ifdef _OPENMP
#pragma omp parallel
        {
            nn::MlpTape tape;
#pragma omp for schedule(static)
            for (std::ptrdiff_t i = 0; i < n; ++i) {
                out[static_cast<std::size_t>(i)] =
                    surrogate_value(model, x[static_cast<std::size_t>(i)],
                                    p[static_cast<std::size_t>(i)], tape);
            }
        }
        return;
#endif
    }
    nn::MlpTape tape;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = surrogate_value(
            model, x[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)], tape);
    }
}

}  // namespace plume
