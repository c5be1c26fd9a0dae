#include "plume/mlp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "plume/rng.hpp"

namespace plume::nn {

namespace {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<const RowMajorMat>;
using MapVec = Eigen::Map<const Eigen::VectorXd>;
using MutMat = Eigen::Map<RowMajorMat>;
using MutVec = Eigen::Map<Eigen::VectorXd>;

/// softplus value and its derivative (the logistic sigmoid), overflow-safe on
/// both tails.
inline void softplus(double a, double& value, double& sigmoid) {
    if (a > 0.0) {
        const double e = std::exp(-a);
        value = a + std::log1p(e);
        sigmoid = 1.0 / (1.0 + e);
    } else {
        const double e = std::exp(a);
        value = std::log1p(e);
        sigmoid = e / (1.0 + e);
    }
}

void check_layer_sizes(const std::vector<int>& layer_sizes) {
    if (layer_sizes.size() < 2) {
        throw std::invalid_argument("layer_sizes needs at least input and output widths");
    }
    if (layer_sizes.front() != 4 || layer_sizes.back() != 1) {
        throw std::invalid_argument("layer_sizes must start at 4 ([x;p]) and end at 1");
    }
    for (int n : layer_sizes) {
        if (n <= 0) throw std::invalid_argument("layer_sizes must be positive");
    }
}

}  // namespace

std::size_t MlpParameters::weight_offset(int layer) const {
    std::size_t off = 0;
    for (int k = 1; k < layer; ++k) {
        off += static_cast<std::size_t>(layer_sizes[k]) * layer_sizes[k - 1] + layer_sizes[k];
    }
    return off;
}

std::size_t MlpParameters::bias_offset(int layer) const {
    return weight_offset(layer) + static_cast<std::size_t>(layer_sizes[layer]) * layer_sizes[layer - 1];
}

std::size_t MlpParameters::param_count(const std::vector<int>& layer_sizes) {
    std::size_t n = 0;
    for (std::size_t k = 1; k < layer_sizes.size(); ++k) {
        n += static_cast<std::size_t>(layer_sizes[k]) * layer_sizes[k - 1] + layer_sizes[k];
    }
    return n;
}

MlpParameters MlpParameters::zeros(const std::vector<int>& layer_sizes) {
    check_layer_sizes(layer_sizes);
    MlpParameters p;
    p.layer_sizes = layer_sizes;
    p.theta.assign(param_count(layer_sizes), 0.0);
    return p;
}

void validate(const MlpParameters& params) {
    check_layer_sizes(params.layer_sizes);
    if (params.theta.size() != MlpParameters::param_count(params.layer_sizes)) {
        throw std::invalid_argument("MlpParameters: parameter count does not match layer sizes");
    }
    for (double v : params.theta) {
        if (!std::isfinite(v)) throw std::invalid_argument("MlpParameters: non-finite parameter");
    }
}

MlpParameters init_params(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    MlpParameters p = MlpParameters::zeros(layer_sizes);
    Rng rng(seed);
    for (int k = 1; k <= p.n_layers(); ++k) {
        const int n_out = layer_sizes[static_cast<std::size_t>(k)];
        const int n_in = layer_sizes[static_cast<std::size_t>(k) - 1];
        const double bound = std::sqrt(6.0 / (n_in + n_out));
        double* w = p.theta.data() + p.weight_offset(k);
        for (int i = 0; i < n_out * n_in; ++i) {
            w[i] = rng.uniform(-bound, bound);
        }
        // biases stay zero
    }
    return p;
}

void MlpTape::resize(const std::vector<int>& layer_sizes, int jac_cols) {
    const int L = static_cast<int>(layer_sizes.size()) - 1;
    act.assign(static_cast<std::size_t>(L), {});
    sig.assign(static_cast<std::size_t>(L), {});
    jac.assign(static_cast<std::size_t>(L), {});
    dir_pre.assign(static_cast<std::size_t>(L), {});
    dir_post.assign(static_cast<std::size_t>(L), {});
    int widest = 0;
    for (int k = 0; k < L; ++k) {
        const int nk = layer_sizes[static_cast<std::size_t>(k)];
        act[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(nk), 0.0);
        jac[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(nk) * jac_cols, 0.0);
        dir_post[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(nk), 0.0);
        if (k >= 1) {
            sig[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(nk), 0.0);
            dir_pre[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(nk), 0.0);
        }
        widest = std::max(widest, nk);
    }
    lam.assign(static_cast<std::size_t>(widest), 0.0);
    mu.assign(static_cast<std::size_t>(widest), 0.0);
    lam_prev.assign(static_cast<std::size_t>(widest), 0.0);
    mu_prev.assign(static_cast<std::size_t>(widest), 0.0);
}

bool MlpTape::sized_for(const std::vector<int>& layer_sizes) const {
    const int L = static_cast<int>(layer_sizes.size()) - 1;
    if (static_cast<int>(act.size()) != L) return false;
    for (int k = 0; k < L; ++k) {
        if (static_cast<int>(act[static_cast<std::size_t>(k)].size()) !=
            layer_sizes[static_cast<std::size_t>(k)]) {
            return false;
        }
    }
    return true;
}

namespace {

/// Shared forward pass; propagates an optional input Jacobian with jac_cols
/// columns (the leading columns of dl/dz).
double forward_impl(const MlpParameters& params, const double z[4], MlpTape& tape, int jac_cols,
                    double* jac_out) {
    const auto& ls = params.layer_sizes;
    const int L = static_cast<int>(ls.size()) - 1;
    if (!tape.sized_for(ls)) tape.resize(ls, 4);

    for (int i = 0; i < 4; ++i) tape.act[0][static_cast<std::size_t>(i)] = z[i];
    if (jac_cols > 0) {
        auto& j0 = tape.jac[0];
        std::fill(j0.begin(), j0.end(), 0.0);
        // dl_0/dz restricted to the first jac_cols inputs
        for (int c = 0; c < jac_cols; ++c) j0[static_cast<std::size_t>(c * 4 + c)] = 1.0;
    }

    for (int k = 1; k < L; ++k) {
        const int nk = ls[static_cast<std::size_t>(k)];
        const int nk1 = ls[static_cast<std::size_t>(k) - 1];
        MapMat W(params.theta.data() + params.weight_offset(k), nk, nk1);
        MapVec b(params.theta.data() + params.bias_offset(k), nk);
        MapVec prev(tape.act[static_cast<std::size_t>(k) - 1].data(), nk1);
        MutVec lk(tape.act[static_cast<std::size_t>(k)].data(), nk);
        MutVec sk(tape.sig[static_cast<std::size_t>(k)].data(), nk);

        lk.noalias() = W * prev + b;
        for (int i = 0; i < nk; ++i) {
            softplus(lk[i], lk[i], sk[i]);
        }
        if (jac_cols > 0) {
            MutMat Jk(tape.jac[static_cast<std::size_t>(k)].data(), nk, 4);
            MapMat Jprev(tape.jac[static_cast<std::size_t>(k) - 1].data(), nk1, 4);
            Jk.leftCols(jac_cols).noalias() = W * Jprev.leftCols(jac_cols);
            Jk.leftCols(jac_cols) = sk.asDiagonal() * Jk.leftCols(jac_cols);
        }
    }

    const int n_last = ls[static_cast<std::size_t>(L) - 1];
    MapMat WL(params.theta.data() + params.weight_offset(L), 1, n_last);
    const double bL = params.theta[params.bias_offset(L)];
    MapVec last(tape.act[static_cast<std::size_t>(L) - 1].data(), n_last);
    const double value = WL.row(0).dot(last) + bL;
    if (jac_cols > 0) {
        MapMat Jlast(tape.jac[static_cast<std::size_t>(L) - 1].data(), n_last, 4);
        for (int c = 0; c < jac_cols; ++c) {
            jac_out[c] = WL.row(0).dot(Jlast.col(c));
        }
    }
    return value;
}

}  // namespace

double mlp_value(const MlpParameters& params, const double z[4], MlpTape& tape) {
    return forward_impl(params, z, tape, 0, nullptr);
}

double mlp_value_jacobian(const MlpParameters& params, const double z[4], MlpTape& tape,
                          double dz[4]) {
    return forward_impl(params, z, tape, 4, dz);
}

double mlp_forward_spatial(const MlpParameters& params, const double z[4], MlpTape& tape,
                           double dx[2]) {
    return forward_impl(params, z, tape, 2, dx);
}

void mlp_backward_dir(const MlpParameters& params, MlpTape& tape, double alpha, const double w[2],
                      double* grad) {
    const auto& ls = params.layer_sizes;
    const int L = static_cast<int>(ls.size()) - 1;

    // Directional forward: u_k = d/d(eps) l_k(z + eps*d) with d = (w, 0, 0).
    tape.dir_post[0][0] = w[0];
    tape.dir_post[0][1] = w[1];
    for (std::size_t i = 2; i < tape.dir_post[0].size(); ++i) tape.dir_post[0][i] = 0.0;
    for (int k = 1; k < L; ++k) {
        const int nk = ls[static_cast<std::size_t>(k)];
        const int nk1 = ls[static_cast<std::size_t>(k) - 1];
        MapMat W(params.theta.data() + params.weight_offset(k), nk, nk1);
        MapVec uprev(tape.dir_post[static_cast<std::size_t>(k) - 1].data(), nk1);
        MutVec s(tape.dir_pre[static_cast<std::size_t>(k)].data(), nk);
        MutVec u(tape.dir_post[static_cast<std::size_t>(k)].data(), nk);
        s.noalias() = W * uprev;
        MapVec sg(tape.sig[static_cast<std::size_t>(k)].data(), nk);
        u = sg.cwiseProduct(s);
    }

    // Output layer: contributes alpha to N = W_L l + b_L and 1 to W_L u.
    {
        const int n_last = ls[static_cast<std::size_t>(L) - 1];
        MapVec last(tape.act[static_cast<std::size_t>(L) - 1].data(), n_last);
        MapVec ulast(tape.dir_post[static_cast<std::size_t>(L) - 1].data(), n_last);
        MutVec gW(grad + params.weight_offset(L), n_last);
        gW.noalias() += alpha * last + ulast;
        grad[params.bias_offset(L)] += alpha;

        MapMat WL(params.theta.data() + params.weight_offset(L), 1, n_last);
        MutVec lam(tape.lam.data(), n_last);
        MutVec mu(tape.mu.data(), n_last);
        lam = alpha * WL.row(0).transpose();
        mu = WL.row(0).transpose();
    }

    // Hidden layers: l_k = rho(a_k), u_k = rho'(a_k).*s_k. The mu-adjoint
    // carries the second-order term through rho''.
    for (int k = L - 1; k >= 1; --k) {
        const int nk = ls[static_cast<std::size_t>(k)];
        const int nk1 = ls[static_cast<std::size_t>(k) - 1];
        MapVec sg(tape.sig[static_cast<std::size_t>(k)].data(), nk);
        MapVec s(tape.dir_pre[static_cast<std::size_t>(k)].data(), nk);
        MutVec lam(tape.lam.data(), nk);
        MutVec mu(tape.mu.data(), nk);

        // delta = lam.*rho' + mu.*rho''.*s ; rho'' = rho'(1-rho')
        for (int i = 0; i < nk; ++i) {
            const double sp = sg[i];
            const double delta = lam[i] * sp + mu[i] * sp * (1.0 - sp) * s[i];
            const double sigma = mu[i] * sp;
            lam[i] = delta;
            mu[i] = sigma;
        }
        // now lam holds delta, mu holds sigma
        MapVec prev(tape.act[static_cast<std::size_t>(k) - 1].data(), nk1);
        MapVec uprev(tape.dir_post[static_cast<std::size_t>(k) - 1].data(), nk1);
        MutMat gW(grad + params.weight_offset(k), nk, nk1);
        MutVec gb(grad + params.bias_offset(k), nk);
        gW.noalias() += lam * prev.transpose();
        gW.noalias() += mu * uprev.transpose();
        gb += lam;

        if (k > 1) {
            MapMat W(params.theta.data() + params.weight_offset(k), nk, nk1);
            MutVec lam_prev(tape.lam_prev.data(), nk1);
            MutVec mu_prev(tape.mu_prev.data(), nk1);
            lam_prev.noalias() = W.transpose() * lam;
            mu_prev.noalias() = W.transpose() * mu;
            tape.lam.swap(tape.lam_prev);
            tape.mu.swap(tape.mu_prev);
        }
    }
}

}  // namespace plume::nn
