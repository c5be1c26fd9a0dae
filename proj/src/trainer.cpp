#include "plume/trainer.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "plume/rng.hpp"
#include "plume/textio.hpp"

namespace plume {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

TrainResult train(const nn::MlpParameters& init, const nn::AdfSpec& adf_spec,
                  const std::vector<TrainingSample>& dataset,
                  const std::vector<TrainingSample>& test_set, const TrainConfig& config,
                  ExecPolicy policy, std::ostream* log) {
    nn::validate(init);
    validate(adf_spec);
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    if (test_set.empty()) throw std::invalid_argument("train: empty test set");
    if (config.epochs <= 0 || config.batch_size <= 0) {
        throw std::invalid_argument("train: epochs and batch_size must be positive");
    }
    if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
        throw std::invalid_argument("train: learning_rate must be finite and non-negative");
    }

    const std::size_t n = dataset.size();
    const std::size_t n_params = init.theta.size();

    TrainResult result;
    result.final_params = init;
    result.best_params = init;
    result.best_test_mse = std::numeric_limits<double>::infinity();

    nn::MlpParameters params = init;
    nn::MlpParameters last_good = init;
    std::vector<double> grad(n_params, 0.0);
    std::vector<double> m(n_params, 0.0), v(n_params, 0.0);
    PgWorkspace ws;

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng shuffle_rng(derive_seed(config.seed, 1));

    long step = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(perm);
        double loss_sum = 0.0;
        try {
            for (std::size_t off = 0; off < n; off += static_cast<std::size_t>(config.batch_size)) {
                const std::size_t len =
                    std::min(static_cast<std::size_t>(config.batch_size), n - off);
                const double loss = pg_loss_and_grad(params, adf_spec, dataset, perm.data() + off,
                                                     len, grad.data(), policy, ws);
                loss_sum += loss * static_cast<double>(len);

                ++step;
                const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
                for (std::size_t j = 0; j < n_params; ++j) {
                    const double g = grad[j];
                    m[j] = kBeta1 * m[j] + (1.0 - kBeta1) * g;
                    v[j] = kBeta2 * v[j] + (1.0 - kBeta2) * g * g;
                    params.theta[j] -=
                        config.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + kAdamEps);
                }
            }
        } catch (const std::runtime_error& e) {
            result.aborted = true;
            result.abort_reason = "epoch " + std::to_string(epoch) + ": " + e.what();
            result.final_params = last_good;
            if (log) *log << "training aborted: " << result.abort_reason << '\n';
            return result;
        }

        const double train_loss = loss_sum / static_cast<double>(n);
        const double test_mse = evaluate_test_mse(params, adf_spec, test_set, policy);
        result.curve.push_back({epoch, train_loss, test_mse});
        last_good = params;
        if (test_mse < result.best_test_mse) {
            result.best_test_mse = test_mse;
            result.best_epoch = epoch;
            result.best_params = params;
        }
        if (log) {
            *log << "epoch " << epoch << '/' << config.epochs << "  train_h1 "
                 << format_double(train_loss) << "  test_mse " << format_double(test_mse) << '\n';
        }
    }
    result.final_params = params;
    return result;
}

void write_curve_csv(const std::vector<EpochRecord>& curve, std::ostream& out) {
    out << "epoch,train_h1_loss,test_mse\n";
    for (const EpochRecord& r : curve) {
        out << r.epoch << ',' << format_double(r.train_h1_loss) << ','
            << format_double(r.test_mse) << '\n';
    }
    if (!out) throw std::runtime_error("curve: write failed");
}

void write_curve_csv(const std::vector<EpochRecord>& curve, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("curve: cannot open for writing: " + path);
    write_curve_csv(curve, f);
}

std::vector<EpochRecord> read_curve_csv(std::istream& in) {
    const auto table_rows = read_csv(in, "epoch,train_h1_loss,test_mse");
    std::vector<EpochRecord> curve;
    curve.reserve(table_rows.size());
    for (const auto& row : table_rows) {
        curve.push_back({static_cast<int>(parse_int(row[0])), parse_double(row[1]),
                         parse_double(row[2])});
    }
    return curve;
}

std::vector<EpochRecord> read_curve_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("curve: cannot open: " + path);
    return read_curve_csv(f);
}

}  // namespace plume
