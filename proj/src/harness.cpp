#include "plume/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "plume/rng.hpp"
#include "plume/textio.hpp"

namespace plume {

namespace {

/// Distance from a point to a closed box (0 inside).
double box_distance(const Box2& box, Vec2 x) {
    const double dx = std::max({box.lo.x - x.x, 0.0, x.x - box.hi.x});
    const double dy = std::max({box.lo.y - x.y, 0.0, x.y - box.hi.y});
    return std::hypot(dx, dy);
}

double farthest_corner(const Box2& box, Vec2 x) {
    double d = 0.0;
    for (double cx : {box.lo.x, box.hi.x}) {
        for (double cy : {box.lo.y, box.hi.y}) {
            d = std::max(d, std::hypot(cx - x.x, cy - x.y));
        }
    }
    return d;
}

}  // namespace

std::vector<Vec2> make_circle_observations(Vec2 center, double radius, int n, const Box2& p_box,
                                           const Box2& domain) {
    if (!(radius > 0.0) || !std::isfinite(radius) || !center.finite()) {
        throw std::invalid_argument("circle: radius must be positive and finite");
    }
    if (n < 1) throw std::invalid_argument("circle: need at least one point");
    if (center.x - radius < domain.lo.x || center.x + radius > domain.hi.x ||
        center.y - radius < domain.lo.y || center.y + radius > domain.hi.y) {
        throw std::invalid_argument("circle: curve leaves the domain");
    }
    // The curve meets the box iff the radius falls between the nearest and
    // farthest box distance; r beyond the farthest corner encloses the box
    // without touching it.
    const double dmin = box_distance(p_box, center);
    const double dmax = farthest_corner(p_box, center);
    if (dmin <= radius && radius <= dmax) {
        throw std::invalid_argument("circle: curve intersects the source box");
    }

    std::vector<Vec2> points;
    points.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / n;
        points.push_back({center.x + radius * std::cos(angle),
                          center.y + radius * std::sin(angle)});
    }
    for (const Vec2& p : points) {
        if (!domain.contains(p)) throw std::invalid_argument("circle: point outside the domain");
        if (p_box.contains(p)) throw std::invalid_argument("circle: point inside the source box");
    }
    return points;
}

ObservationSet synthesize_measurements(const fem::NodalField& field,
                                       const std::vector<Vec2>& points, double sigma,
                                       std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("synthesize_measurements: sigma must be finite and >= 0");
    }
    Rng rng(seed);
    ObservationSet obs;
    obs.noise_sigma = sigma;
    obs.points = points;
    obs.values.reserve(points.size());
    for (const Vec2& x : points) {
        obs.values.push_back(fem::eval_field(field, x).value + sigma * rng.normal());
    }
    return obs;
}

void validate(const SweepConfig& config) {
    if (!(config.circle_radius > 0.0)) {
        throw std::invalid_argument("sweep config: circle_radius must be positive");
    }
    if (config.n_observations < 1) {
        throw std::invalid_argument("sweep config: n_observations must be positive");
    }
    if (config.grid_per_side < 2) {
        throw std::invalid_argument("sweep config: grid_per_side must be at least 2");
    }
    if (config.sigmas.empty()) throw std::invalid_argument("sweep config: sigmas must be non-empty");
    for (double s : config.sigmas) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw std::invalid_argument("sweep config: sigmas must be finite and >= 0");
        }
    }
    if (config.trials < 1) throw std::invalid_argument("sweep config: trials must be positive");
    if (config.starts != "grid3" && config.starts != "center") {
        throw std::invalid_argument("sweep config: starts must be 'grid3' or 'center'");
    }
}

SweepConfig sweep_config_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("sweep config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("sweep config: expected a JSON object");
    SweepConfig c;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "circle_center") {
                if (!value.is_array() || value.size() != 2) {
                    throw std::invalid_argument("sweep config: circle_center must be [x, y]");
                }
                c.circle_center = {value[0].get<double>(), value[1].get<double>()};
            } else if (key == "circle_radius") c.circle_radius = value.get<double>();
            else if (key == "n_observations") c.n_observations = value.get<int>();
            else if (key == "grid_per_side") c.grid_per_side = value.get<int>();
            else if (key == "sigmas") c.sigmas = value.get<std::vector<double>>();
            else if (key == "noise_seed") c.noise_seed = value.get<std::uint64_t>();
            else if (key == "trials") c.trials = value.get<int>();
            else if (key == "starts") c.starts = value.get<std::string>();
            else if (key == "curve_csv") c.curve_csv = value.get<std::string>();
            else throw std::invalid_argument("sweep config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("sweep config: mistyped field: ") + e.what());
    }
    validate(c);
    return c;
}

std::string sweep_config_to_json(const SweepConfig& config) {
    nlohmann::json doc{{"circle_center", {config.circle_center.x, config.circle_center.y}},
                       {"circle_radius", config.circle_radius},
                       {"n_observations", config.n_observations},
                       {"grid_per_side", config.grid_per_side},
                       {"sigmas", config.sigmas},
                       {"noise_seed", config.noise_seed},
                       {"trials", config.trials},
                       {"starts", config.starts},
                       {"curve_csv", config.curve_csv}};
    return doc.dump(2) + "\n";
}

SweepConfig load_sweep_config(const std::string& path) {
    return sweep_config_from_json(read_text_file(path));
}

std::vector<Vec2> sweep_sources(const SweepConfig& config, const Box2& p_box) {
    const int g = config.grid_per_side;
    std::vector<Vec2> sources;
    sources.reserve(static_cast<std::size_t>(g) * g);
    for (int j = 0; j < g; ++j) {
        const double y = p_box.lo.y + (p_box.hi.y - p_box.lo.y) * j / (g - 1);
        for (int i = 0; i < g; ++i) {
            const double x = p_box.lo.x + (p_box.hi.x - p_box.lo.x) * i / (g - 1);
            sources.push_back({x, y});
        }
    }
    return sources;
}

SweepReport run_sweep(const SurrogateModel& model, const SweepConfig& config, int mesh_n,
                      ExecPolicy policy, std::ostream* log) {
    validate(model);
    validate(config);
    const std::vector<Vec2> circle =
        make_circle_observations(config.circle_center, config.circle_radius,
                                 config.n_observations, model.source_box, model.adf.domain);
    const std::vector<Vec2> sources = sweep_sources(config, model.source_box);
    const std::size_t n_sources = sources.size();
    const std::size_t n_points = circle.size();

    // Ground truth: one FEM solve per source; only the circle values are
    // kept, so the nodal fields can be dropped block by block.
    std::vector<double> truth(n_sources * n_points);
    {
        auto mesh = fem::build_mesh_shared(mesh_n);
        const fem::SteadySolver solver(mesh, kDefaultKappa, kDefaultVelocity);
        constexpr std::size_t kSourceBlock = 64;
        for (std::size_t begin = 0; begin < n_sources; begin += kSourceBlock) {
            const std::size_t end = std::min(begin + kSourceBlock, n_sources);
            const std::vector<Vec2> block(sources.begin() + static_cast<std::ptrdiff_t>(begin),
                                          sources.begin() + static_cast<std::ptrdiff_t>(end));
            const std::vector<fem::NodalField> fields = solver.solve_many(block);
            for (std::size_t s = begin; s < end; ++s) {
                for (std::size_t j = 0; j < n_points; ++j) {
                    truth[s * n_points + j] = fem::eval_field(fields[s - begin], circle[j]).value;
                }
            }
            if (log) *log << "fem ground truth: " << end << '/' << n_sources << " sources\n";
        }
    }

    const StartPolicy start_policy =
        config.starts == "center" ? StartPolicy::Center : StartPolicy::Grid3;
    const std::vector<Vec2> starts = make_starts(start_policy, model.source_box);

    SweepReport report;
    report.fem_solves = n_sources;
    const std::size_t n_rows =
        config.sigmas.size() * n_sources * static_cast<std::size_t>(config.trials);
    report.rows.resize(n_rows);

    // Rows are independent; each derives its own noise sub-seed, so the
    // content (runtime aside) does not depend on execution order.
    const auto run_row = [&](std::size_t r) {
        const std::size_t per_sigma = n_sources * static_cast<std::size_t>(config.trials);
        const std::size_t si = r / per_sigma;
        const std::size_t s = (r % per_sigma) / static_cast<std::size_t>(config.trials);
        const std::size_t trial = r % static_cast<std::size_t>(config.trials);
        const double sigma = config.sigmas[si];

        SweepRow row;
        row.sigma = sigma;
        row.seed = derive_seed(config.noise_seed, r);
        row.p_true = sources[s];
        try {
            ObservationSet obs;
            obs.noise_sigma = sigma;
            obs.points = circle;
            obs.values.resize(n_points);
            Rng rng(row.seed);
            for (std::size_t j = 0; j < n_points; ++j) {
                obs.values[j] = truth[s * n_points + j] + sigma * rng.normal();
            }
            const auto t0 = std::chrono::steady_clock::now();
            const LocalizationResult loc = localize(model, obs, starts);
            const auto t1 = std::chrono::steady_clock::now();
            row.p_hat = loc.p_hat;
            row.error_m = (loc.p_hat - row.p_true).norm() * 1000.0;
            row.objective = loc.objective_value;
            row.iterations = loc.iterations;
            row.converged = loc.converged;
            row.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        } catch (const std::exception& e) {
            row.ok = false;
            std::string note = e.what();
            for (char& ch : note) {
                if (ch == ',' || ch == '\n') ch = ';';
            }
            row.note = "error: " + note;
        }
        report.rows[r] = std::move(row);
        (void)trial;
    };

    if (policy == ExecPolicy::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(n_rows); ++r) {
            run_row(static_cast<std::size_t>(r));
        }
#else
        for (std::size_t r = 0; r < n_rows; ++r) run_row(r);
#endif
    } else {
        for (std::size_t r = 0; r < n_rows; ++r) run_row(r);
    }
    if (log) *log << "sweep: " << n_rows << " rows done\n";

    report.summaries = summarize_errors(report.rows);
    return report;
}

namespace {

/// Quantile by linear interpolation on the sorted sample (h = (n-1) q).
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    const double w = h - static_cast<double>(lo);
    return sorted[lo] * (1.0 - w) + sorted[lo + 1] * w;
}

}  // namespace

std::vector<SigmaSummary> summarize_errors(const std::vector<SweepRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("summarize_errors: empty report");
    // Distinct sigmas in first-appearance order (rows are grouped by sigma).
    std::vector<double> sigmas;
    for (const SweepRow& r : rows) {
        if (sigmas.empty() || sigmas.back() != r.sigma) {
            if (std::find(sigmas.begin(), sigmas.end(), r.sigma) == sigmas.end()) {
                sigmas.push_back(r.sigma);
            }
        }
    }
    std::vector<SigmaSummary> out;
    out.reserve(sigmas.size());
    for (double sigma : sigmas) {
        SigmaSummary sum;
        sum.sigma = sigma;
        std::vector<double> errors;
        for (const SweepRow& r : rows) {
            if (r.sigma != sigma) continue;
            ++sum.n;
            if (!r.ok) {
                ++sum.n_failed;
                continue;
            }
            errors.push_back(r.error_m);
        }
        if (!errors.empty()) {
            std::sort(errors.begin(), errors.end());
            double mean = 0.0;
            for (double e : errors) mean += e;
            sum.mean_m = mean / static_cast<double>(errors.size());
            sum.median_m = quantile_sorted(errors, 0.5);
            sum.q1_m = quantile_sorted(errors, 0.25);
            sum.q3_m = quantile_sorted(errors, 0.75);
            sum.max_m = errors.back();
        }
        out.push_back(sum);
    }
    return out;
}

void write_rows_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "sigma,seed,px_km,py_km,phatx_km,phaty_km,error_m,objective,iterations,converged,"
           "runtime_ms,status\n";
    for (const SweepRow& r : rows) {
        out << format_double(r.sigma) << ',' << r.seed << ',' << format_double(r.p_true.x) << ','
            << format_double(r.p_true.y) << ',' << format_double(r.p_hat.x) << ','
            << format_double(r.p_hat.y) << ',' << format_double(r.error_m) << ','
            << format_double(r.objective) << ',' << r.iterations << ','
            << (r.converged ? 1 : 0) << ',' << format_double(r.runtime_ms) << ',' << r.note
            << '\n';
    }
    if (!out) throw std::runtime_error("sweep rows: write failed");
}

void write_rows_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("sweep rows: cannot open for writing: " + path);
    write_rows_csv(rows, f);
}

std::vector<SweepRow> read_rows_csv(std::istream& in) {
    const auto table_rows = read_csv(
        in,
        "sigma,seed,px_km,py_km,phatx_km,phaty_km,error_m,objective,iterations,converged,"
        "runtime_ms,status");
    std::vector<SweepRow> rows;
    rows.reserve(table_rows.size());
    for (const auto& row : table_rows) {
        SweepRow r;
        r.sigma = parse_double(row[0]);
        r.seed = static_cast<std::uint64_t>(std::stoull(row[1]));
        r.p_true = {parse_double(row[2]), parse_double(row[3])};
        r.p_hat = {parse_double(row[4]), parse_double(row[5])};
        r.error_m = parse_double(row[6]);
        r.objective = parse_double(row[7]);
        r.iterations = static_cast<int>(parse_int(row[8]));
        r.converged = parse_int(row[9]) != 0;
        r.runtime_ms = parse_double(row[10]);
        r.note = row[11];
        r.ok = r.note == "ok";
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<SweepRow> read_rows_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("sweep rows: cannot open: " + path);
    return read_rows_csv(f);
}

void write_summary_csv(const std::vector<SigmaSummary>& summaries, std::ostream& out) {
    out << "sigma,n,n_failed,mean_m,median_m,q1_m,q3_m,max_m\n";
    for (const SigmaSummary& s : summaries) {
        out << format_double(s.sigma) << ',' << s.n << ',' << s.n_failed << ','
            << format_double(s.mean_m) << ',' << format_double(s.median_m) << ','
            << format_double(s.q1_m) << ',' << format_double(s.q3_m) << ','
            << format_double(s.max_m) << '\n';
    }
    if (!out) throw std::runtime_error("sweep summary: write failed");
}

void write_summary_csv(const std::vector<SigmaSummary>& summaries, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("sweep summary: cannot open for writing: " + path);
    write_summary_csv(summaries, f);
}

std::vector<SigmaSummary> read_summary_csv(std::istream& in) {
    const auto table_rows = read_csv(in, "sigma,n,n_failed,mean_m,median_m,q1_m,q3_m,max_m");
    std::vector<SigmaSummary> out;
    out.reserve(table_rows.size());
    for (const auto& row : table_rows) {
        SigmaSummary s;
        s.sigma = parse_double(row[0]);
        s.n = static_cast<int>(parse_int(row[1]));
        s.n_failed = static_cast<int>(parse_int(row[2]));
        s.mean_m = parse_double(row[3]);
        s.median_m = parse_double(row[4]);
        s.q1_m = parse_double(row[5]);
        s.q3_m = parse_double(row[6]);
        s.max_m = parse_double(row[7]);
        out.push_back(s);
    }
    return out;
}

std::vector<SigmaSummary> read_summary_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("sweep summary: cannot open: " + path);
    return read_summary_csv(f);
}

}  // namespace plume
