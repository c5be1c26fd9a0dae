#pragma once

/// Physics-guided H1 training loss: mean over the batch of the squared value
/// residual plus the squared norm of the spatial-gradient residual, with the
/// exact parameter gradient (including the mixed second derivatives through
/// the network and the boundary factor).
///
/// Reductions are chunked (see parallel.hpp): per-chunk partial sums are
/// accumulated serially in sample order and combined in chunk order, so the
/// serial and OpenMP paths agree bit-for-bit at any thread count.

#include <cstddef>
#include <vector>

#include "plume/adf.hpp"
#include "plume/dataset.hpp"
#include "plume/mlp.hpp"
#include "plume/parallel.hpp"

namespace plume {

/// Reusable scratch for the batched loss kernels (per-chunk partials and
/// per-thread tapes); safe to share across calls on one thread.
struct PgWorkspace {
    std::vector<double> chunk_grad;       ///< n_chunks x n_params partials
    std::vector<double> chunk_loss;       ///< n_chunks loss partials
    std::vector<std::ptrdiff_t> chunk_bad;  ///< first non-finite sample per chunk, -1 if none
    std::vector<nn::MlpTape> tapes;       ///< one tape per worker thread
};

/// Loss and exact parameter gradient over batch = data[idx[0..n)] (idx may be
/// null, meaning data[0..n)). grad must have params.theta.size() entries and
/// is overwritten. Throws std::runtime_error naming the first offending
/// sample if the loss turns non-finite.
double pg_loss_and_grad(const nn::MlpParameters& params, const nn::AdfSpec& adf_spec,
                        const std::vector<TrainingSample>& data, const std::size_t* idx,
                        std::size_t n, double* grad, ExecPolicy policy, PgWorkspace& ws);

/// Convenience overload over a whole dataset.
double pg_loss_and_grad(const nn::MlpParameters& params, const nn::AdfSpec& adf_spec,
                        const std::vector<TrainingSample>& batch, std::vector<double>& grad,
                        ExecPolicy policy = ExecPolicy::Parallel);

/// Value-only mean squared error (the paper-style test metric; gradient
/// labels are ignored). Same deterministic chunked reduction.
double evaluate_test_mse(const nn::MlpParameters& params, const nn::AdfSpec& adf_spec,
                         const std::vector<TrainingSample>& test_set,
                         ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace plume
