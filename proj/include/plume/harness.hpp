#pragma once

/// Experiment runner: synthesizes noisy observations from FEM ground truth,
/// sweeps the localization pipeline over a source grid and a set of noise
/// levels, and reduces the per-row errors to per-sigma statistics.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "plume/fem.hpp"
#include "plume/inverse.hpp"
#include "plume/parallel.hpp"

namespace plume {

/// n points at angles 2*pi*k/n, k = 0..n-1, starting east, counterclockwise.
/// Rejects circles whose curve leaves `domain` or intersects `p_box`.
std::vector<Vec2> make_circle_observations(Vec2 center, double radius, int n,
                                           const Box2& p_box = kSourceBox,
                                           const Box2& domain = kDomain);

/// y_j = field(x_j) + sigma * zeta_j with zeta_j i.i.d. standard normal from
/// a generator seeded with `seed`; sigma = 0 reproduces the FEM values
/// exactly. The field's source position is NOT consulted here.
ObservationSet synthesize_measurements(const fem::NodalField& field,
                                       const std::vector<Vec2>& points, double sigma,
                                       std::uint64_t seed);

struct SweepConfig {
    Vec2 circle_center{0.5, 0.5};
    double circle_radius = 0.25;  ///< km
    int n_observations = 100;
    int grid_per_side = 18;  ///< 18x18 = 324 sources over the source box, endpoints included
    std::vector<double> sigmas{0.0, 0.00625, 0.0125, 0.025};
    std::uint64_t noise_seed = 7;
    int trials = 1;  ///< noise realizations per (source, sigma)
    std::string starts = "grid3";  ///< "grid3" or "center"
    std::string curve_csv;  ///< optional training-curve CSV to chart alongside
};

void validate(const SweepConfig& config);
SweepConfig sweep_config_from_json(const std::string& text);
std::string sweep_config_to_json(const SweepConfig& config);
SweepConfig load_sweep_config(const std::string& path);

/// Source positions of the sweep: grid_per_side^2 points uniform over p_box,
/// endpoints included, x fastest.
std::vector<Vec2> sweep_sources(const SweepConfig& config, const Box2& p_box);

struct SweepRow {
    double sigma = 0.0;
    std::uint64_t seed = 0;  ///< derived noise sub-seed of this row
    Vec2 p_true;
    Vec2 p_hat;
    double error_m = 0.0;  ///< |p_true - p_hat| in meters
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double runtime_ms = 0.0;  ///< wall clock of the localize call
    bool ok = true;
    std::string note = "ok";  ///< "ok" or the failure message
};

struct SigmaSummary {
    double sigma = 0.0;
    int n = 0;
    int n_failed = 0;
    double mean_m = 0.0;
    double median_m = 0.0;
    double q1_m = 0.0;
    double q3_m = 0.0;
    double max_m = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;  ///< ordered by (sigma index, source index, trial)
    std::vector<SigmaSummary> summaries;
    std::size_t fem_solves = 0;
};

/// Full sweep: one FEM solve per source (reused across sigma levels and
/// trials), then synthesize + localize per row. Per-row failures are recorded
/// and the sweep continues. Deterministic given seeds (runtime_ms aside).
SweepReport run_sweep(const SurrogateModel& model, const SweepConfig& config,
                      int mesh_n = kDefaultMeshN, ExecPolicy policy = ExecPolicy::Parallel,
                      std::ostream* log = nullptr);

/// Per-sigma statistics over the ok rows (quantiles by linear interpolation).
/// Throws std::invalid_argument on an empty report.
std::vector<SigmaSummary> summarize_errors(const std::vector<SweepRow>& rows);

/// Rows CSV header:
/// sigma,seed,px_km,py_km,phatx_km,phaty_km,error_m,objective,iterations,converged,runtime_ms,status
void write_rows_csv(const std::vector<SweepRow>& rows, std::ostream& out);
void write_rows_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> read_rows_csv(std::istream& in);
std::vector<SweepRow> read_rows_csv(const std::string& path);

/// Summary CSV header: sigma,n,n_failed,mean_m,median_m,q1_m,q3_m,max_m
void write_summary_csv(const std::vector<SigmaSummary>& summaries, std::ostream& out);
void write_summary_csv(const std::vector<SigmaSummary>& summaries, const std::string& path);
std::vector<SigmaSummary> read_summary_csv(std::istream& in);
std::vector<SigmaSummary> read_summary_csv(const std::string& path);

}  // namespace plume
