#include "plume/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace plume {

namespace {

/// Loss and gradient contribution of one sample, accumulated (+=) into grad.
double sample_loss_grad(const nn::MlpParameters& params, const nn::AdfSpec& adf_spec,
                        const TrainingSample& s, nn::MlpTape& tape, double* grad) {
    const double z[4] = {s.q.x, s.q.y, s.p.x, s.p.y};
    double dx[2];
    const double net = nn::mlp_forward_spatial(params, z, tape, dx);
    const nn::AdfValue a = nn::adf(adf_spec, s.q);

    const double ev = a.psi * net - s.u_ref;
    const Vec2 eg{a.grad.x * net + a.psi * dx[0] - s.grad_ref.x,
                  a.grad.y * net + a.psi * dx[1] - s.grad_ref.y};
    const double loss = ev * ev + eg.x * eg.x + eg.y * eg.y;

    if (grad) {
        // dF/dtheta = alpha*dN/dtheta + w . d(dN/dx)/dtheta
        const double alpha = 2.0 * (ev * a.psi + eg.x * a.grad.x + eg.y * a.grad.y);
        const double w[2] = {2.0 * a.psi * eg.x, 2.0 * a.psi * eg.y};
        nn::mlp_backward_dir(params, tape, alpha, w, grad);
    }
    return loss;
}

std::size_t chunk_count(std::size_t n) { return (n + kReductionChunk - 1) / kReductionChunk; }

}  // namespace

double pg_loss_and_grad(const nn::MlpParameters& params, const nn::AdfSpec& adf_spec,
                        const std::vector<TrainingSample>& data, const std::size_t* idx,
                        std::size_t n, double* grad, ExecPolicy policy, PgWorkspace& ws) {
    if (n == 0) throw std::invalid_argument("pg_loss_and_grad: empty batch");
    const std::size_t n_params = params.theta.size();
    const std::size_t n_chunks = chunk_count(n);

    ws.chunk_grad.assign(n_chunks * n_params, 0.0);
    ws.chunk_loss.assign(n_chunks, 0.0);
    ws.chunk_bad.assign(n_chunks, -1);
    const int n_threads = policy == ExecPolicy::Parallel ? max_threads() : 1;
    if (static_cast<int>(ws.tapes.size()) < n_threads) ws.tapes.resize(n_threads);

    const auto run_chunk = [&](std::size_t c, nn::MlpTape& tape) {
        const std::size_t begin = c * kReductionChunk;
        const std::size_t end = std::min(begin + kReductionChunk, n);
        double* cg = ws.chunk_grad.data() + c * n_params;
        double acc = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const std::size_t row = idx ? idx[k] : k;
            const double f = sample_loss_grad(params, adf_spec, data[row], tape, cg);
            if (!std::isfinite(f)) {
                ws.chunk_bad[c] = static_cast<std::ptrdiff_t>(k);
                return;
            }
            acc += f;
        }
        ws.chunk_loss[c] = acc;
    };

    if (policy == ExecPolicy::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
            run_chunk(static_cast<std::size_t>(c), ws.tapes[omp_get_thread_num()]);
        }
#else
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c, ws.tapes[0]);
#endif
    } else {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c, ws.tapes[0]);
    }

    for (std::size_t c = 0; c < n_chunks; ++c) {
        if (ws.chunk_bad[c] >= 0) {
            throw std::runtime_error("pg_loss_and_grad: non-finite loss at batch sample " +
                                     std::to_string(ws.chunk_bad[c]));
        }
    }

    double loss = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) loss += ws.chunk_loss[c];
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    if (grad) {
        std::fill(grad, grad + n_params, 0.0);
        for (std::size_t c = 0; c < n_chunks; ++c) {
            const double* cg = ws.chunk_grad.data() + c * n_params;
            for (std::size_t j = 0; j < n_params; ++j) grad[j] += cg[j];
        }
        for (std::size_t j = 0; j < n_params; ++j) grad[j] *= inv_n;
    }
    if (!std::isfinite(loss)) {
        throw std::runtime_error("pg_loss_and_grad: non-finite loss after reduction");
    }
    return loss;
}

double pg_loss_and_grad(const nn::MlpParameters& params, const nn::AdfSpec& adf_spec,
                        const std::vector<TrainingSample>& batch, std::vector<double>& grad,
                        ExecPolicy policy) {
    grad.assign(params.theta.size(), 0.0);
    PgWorkspace ws;
    return pg_loss_and_grad(params, adf_spec, batch, nullptr, batch.size(), grad.data(), policy,
                            ws);
}

double evaluate_test_mse(const nn::MlpParameters& params, const nn::AdfSpec& adf_spec,
                         const std::vector<TrainingSample>& test_set, ExecPolicy policy) {
    if (test_set.empty()) throw std::invalid_argument("evaluate_test_mse: empty test set");
    const std::size_t n = test_set.size();
    const std::size_t n_chunks = chunk_count(n);
    std::vector<double> chunk_sum(n_chunks, 0.0);

    const auto run_chunk = [&](std::size_t c, nn::MlpTape& tape) {
        const std::size_t begin = c * kReductionChunk;
        const std::size_t end = std::min(begin + kReductionChunk, n);
        double acc = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const TrainingSample& s = test_set[k];
            const double z[4] = {s.q.x, s.q.y, s.p.x, s.p.y};
            const double net = nn::mlp_value(params, z, tape);
            const double r = nn::adf(adf_spec, s.q).psi * net - s.u_ref;
            acc += r * r;
        }
        chunk_sum[c] = acc;
    };

    if (policy == ExecPolicy::Parallel) {
#ifdef _OPENMP
#pragma omp parallel
        {
            nn::MlpTape tape;
#pragma omp for schedule(static)
            for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
                run_chunk(static_cast<std::size_t>(c), tape);
            }
        }
#else
        nn::MlpTape tape;
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c, tape);
#endif
    } else {
        nn::MlpTape tape;
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c, tape);
    }

    double total = 0.0;
    for (double v : chunk_sum) total += v;
    return total / static_cast<double>(n);
}

}  // namespace plume
