#pragma once

/// ADAM training loop for the physics-guided surrogate: shuffled mini-batches
/// of the H1 loss, per-epoch training-loss / test-MSE curve, best-test-MSE
/// checkpoint retention, and a divergence abort that hands back the last good
/// parameters. Deterministic given (seed, config, thread-independent loss).

#include <iosfwd>
#include <string>
#include <vector>

#include "plume/dataset.hpp"
#include "plume/loss.hpp"

namespace plume {

struct EpochRecord {
    int epoch = 0;  ///< 1-based epoch index
    double train_h1_loss = 0.0;
    double test_mse = 0.0;
};

struct TrainResult {
    nn::MlpParameters final_params;  ///< parameters after the last completed epoch
    nn::MlpParameters best_params;   ///< parameters with the lowest test MSE
    int best_epoch = 0;
    double best_test_mse = 0.0;
    std::vector<EpochRecord> curve;  ///< one record per completed epoch
    bool aborted = false;            ///< true if training stopped on divergence
    std::string abort_reason;
};

/// Trains starting from `init`. learning_rate == 0 is accepted here as the
/// degenerate optimizer (parameters stay fixed); config validation for the
/// CLI still demands a positive rate. If `log` is non-null a one-line
/// progress record is streamed per epoch.
TrainResult train(const nn::MlpParameters& init, const nn::AdfSpec& adf_spec,
                  const std::vector<TrainingSample>& dataset,
                  const std::vector<TrainingSample>& test_set, const TrainConfig& config,
                  ExecPolicy policy = ExecPolicy::Parallel, std::ostream* log = nullptr);

/// Training-curve CSV: header epoch,train_h1_loss,test_mse.
void write_curve_csv(const std::vector<EpochRecord>& curve, std::ostream& out);
void write_curve_csv(const std::vector<EpochRecord>& curve, const std::string& path);
std::vector<EpochRecord> read_curve_csv(std::istream& in);
std::vector<EpochRecord> read_curve_csv(const std::string& path);

}  // namespace plume
