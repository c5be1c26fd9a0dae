#pragma once

#include <cstdint>
#include <vector>

namespace plume::nn {

/// Fully-connected feed-forward network with softplus hidden activations and
/// an affine output layer. Parameters live in one flat buffer: per layer the
/// row-major weight matrix followed by the bias vector, input layer first.
struct MlpParameters {
    std::vector<int> layer_sizes;  // {4, ..., 1}
    std::vector<double> theta;

    std::size_t n_params() const { return theta.size(); }
    int n_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }

    std::size_t weight_offset(int layer) const;  // layer in [1, n_layers()]
    std::size_t bias_offset(int layer) const;

    static std::size_t param_count(const std::vector<int>& layer_sizes);
    static MlpParameters zeros(const std::vector<int>& layer_sizes);
};

/// Throws std::invalid_argument unless sizes start at 4, end at 1, and every
/// width is positive; also rejects non-finite parameter values.
void validate(const MlpParameters& params);

/// Glorot-uniform weights (bound sqrt(6/(n_in+n_out))), zero biases,
/// deterministic in the seed.
MlpParameters init_params(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Reusable per-evaluation scratch: forward records plus adjoint buffers.
/// One instance per thread; sized on first use.
struct MlpTape {
    // forward records
    std::vector<std::vector<double>> act;   // l_k, k = 0..L-1 (l_0 = input)
    std::vector<std::vector<double>> sig;   // softplus'(a_k) = sigmoid(a_k), k = 1..L-1
    std::vector<std::vector<double>> jac;   // input-Jacobian rows of l_k, k = 0..L-1
    // directional-derivative records for the second-order backward pass
    std::vector<std::vector<double>> dir_pre;   // s_k = W_k u_{k-1}
    std::vector<std::vector<double>> dir_post;  // u_k = sigmoid(a_k) .* s_k
    // adjoint buffers
    std::vector<double> lam, mu, lam_prev, mu_prev;

    void resize(const std::vector<int>& layer_sizes, int jac_cols);
    bool sized_for(const std::vector<int>& layer_sizes) const;
};

/// Value only.
double mlp_value(const MlpParameters& params, const double z[4], MlpTape& tape);

/// Value plus full input Jacobian dN/dz (4 entries).
double mlp_value_jacobian(const MlpParameters& params, const double z[4], MlpTape& tape,
                          double dz[4]);

/// Value plus the spatial part of the Jacobian (dN/dx, 2 entries), leaving the
/// forward records in the tape for mlp_backward_dir.
double mlp_forward_spatial(const MlpParameters& params, const double z[4], MlpTape& tape,
                           double dx[2]);

/// Accumulates d/dtheta [ alpha * N(z) + w . dN/dx(z) ] into grad (length
/// n_params). Requires the tape state left by mlp_forward_spatial. The w-term
/// is the derivative of the network's spatial gradient, so this is exact
/// second-order backpropagation.
void mlp_backward_dir(const MlpParameters& params, MlpTape& tape, double alpha, const double w[2],
                      double* grad);

}  // namespace plume::nn
