#pragma once

/// Training-data pipeline: draw (source, query) pairs from P x Omega with the
/// singularity-exclusion radius, label them with FEM reference solutions
/// (one solve per distinct source, reused across its query points), and read
/// or write the dataset CSV.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "plume/geometry.hpp"
#include "plume/parallel.hpp"

namespace plume {

struct TrainingSample {
    Vec2 p;         ///< source position, km
    Vec2 q;         ///< query point, km
    double u_ref = 0.0;  ///< reference concentration at q
    Vec2 grad_ref;  ///< reference spatial gradient at q, per km
};

struct UnlabeledSample {
    Vec2 p;
    Vec2 q;
};

struct TrainConfig {
    int n_sources = 400;
    int n_queries_per_source = 200;
    double learning_rate = 1e-3;
    int epochs = 1500;
    int batch_size = 512;
    std::uint64_t seed = 42;
    int test_set_size = 20000;
};

/// Throws std::invalid_argument on non-positive counts or learning rate.
void validate(const TrainConfig& config);

/// Strict parse of the config JSON (unknown keys rejected, missing keys take
/// the defaults above).
TrainConfig train_config_from_json(const std::string& text);
std::string train_config_to_json(const TrainConfig& config);
TrainConfig load_train_config(const std::string& path);

/// Seeded sampling: n_sources positions uniform in p_box, each followed by
/// n_queries_per_source query points uniform in domain, rejection-resampled
/// until |q - p| >= 0.02 km. Output is grouped by source in draw order.
std::vector<UnlabeledSample> sample_dataset(const TrainConfig& config,
                                            const Box2& p_box = kSourceBox,
                                            const Box2& domain = kDomain);

/// FEM labeling. Performs one steady solve per distinct source position
/// (first-appearance order, batched against a single factorization) and
/// evaluates value and raw P1 gradient at each query point. If n_solves is
/// non-null it receives the number of FEM solves performed.
std::vector<TrainingSample> label_dataset(const std::vector<UnlabeledSample>& samples,
                                          int mesh_n = kDefaultMeshN,
                                          ExecPolicy policy = ExecPolicy::Parallel,
                                          std::size_t* n_solves = nullptr);

/// CSV header: px_km,py_km,qx_km,qy_km,u,gx,gy (shortest round-trip decimals).
void write_dataset_csv(const std::vector<TrainingSample>& samples, std::ostream& out);
void write_dataset_csv(const std::vector<TrainingSample>& samples, const std::string& path);
std::vector<TrainingSample> read_dataset_csv(std::istream& in);
std::vector<TrainingSample> read_dataset_csv(const std::string& path);

/// Validates dataset invariants (positions in their boxes, exclusion radius,
/// finite labels); throws std::invalid_argument with the offending row.
void validate_dataset(const std::vector<TrainingSample>& samples,
                      const Box2& p_box = kSourceBox, const Box2& domain = kDomain);

}  // namespace plume
