// Command-line front end for the dispersion surrogate toolchain:
// data generation, training, localization, the noise sweep, a raw FEM
// solve, and a self-check suite. Exit codes: 0 success, 1 validation
// error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plume/checkpoint.hpp"
#include "plume/dataset.hpp"
#include "plume/fem.hpp"
#include "plume/harness.hpp"
#include "plume/inverse.hpp"
#include "plume/loss.hpp"
#include "plume/rng.hpp"
#include "plume/svgplot.hpp"
#include "plume/textio.hpp"
#include "plume/trainer.hpp"

namespace {

using namespace plume;

int cmd_gen_data(const std::string& config_path, const std::string& out_path, int mesh_n,
                 std::uint64_t seed, bool seed_given) {
    TrainConfig config = load_train_config(config_path);
    if (seed_given) config.seed = seed;
    std::cerr << "sampling " << config.n_sources << " sources x " << config.n_queries_per_source
              << " queries (seed " << config.seed << ")\n";
    const std::vector<UnlabeledSample> samples = sample_dataset(config);
    std::size_t n_solves = 0;
    const std::vector<TrainingSample> labeled =
        label_dataset(samples, mesh_n, ExecPolicy::Parallel, &n_solves);
    write_dataset_csv(labeled, out_path);
    std::cerr << "labeled " << labeled.size() << " samples with " << n_solves
              << " FEM solves (mesh " << mesh_n << "x" << mesh_n << ") -> " << out_path << '\n';
    return 0;
}

/// Path for the final-epoch checkpoint next to the best one: foo.json ->
/// foo.final.json, anything else gets .final appended.
std::string final_checkpoint_path(const std::string& out_path) {
    const std::string suffix = ".json";
    if (out_path.size() > suffix.size() &&
        out_path.compare(out_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return out_path.substr(0, out_path.size() - suffix.size()) + ".final.json";
    }
    return out_path + ".final";
}

int cmd_train(const std::string& data_path, const std::string& test_path,
              const std::string& config_path, const std::string& out_path,
              const std::string& curve_path) {
    const TrainConfig config = load_train_config(config_path);
    const std::vector<TrainingSample> dataset = read_dataset_csv(data_path);
    const std::vector<TrainingSample> test_set = read_dataset_csv(test_path);
    validate_dataset(dataset);
    validate_dataset(test_set);

    SurrogateModel model;
    model.params = nn::init_params({4, 30, 30, 30, 30, 1}, derive_seed(config.seed, 0));
    std::cerr << "training on " << dataset.size() << " samples, testing on " << test_set.size()
              << ", " << config.epochs << " epochs\n";
    const TrainResult result =
        train(model.params, model.adf, dataset, test_set, config, ExecPolicy::Parallel, &std::cerr);

    if (!curve_path.empty()) write_curve_csv(result.curve, curve_path);

    if (result.aborted) {
        model.params = result.final_params;  // last good parameters
        save_checkpoint(model, out_path);
        std::cerr << "training diverged (" << result.abort_reason
                  << "); last good checkpoint -> " << out_path << '\n';
        throw std::runtime_error("training aborted: " + result.abort_reason);
    }

    model.params = result.best_params;
    save_checkpoint(model, out_path);
    model.params = result.final_params;
    save_checkpoint(model, final_checkpoint_path(out_path));
    std::cerr << "best test MSE " << format_double(result.best_test_mse) << " at epoch "
              << result.best_epoch << " -> " << out_path << " (final epoch -> "
              << final_checkpoint_path(out_path) << ")\n";
    return 0;
}

int cmd_solve(const std::string& model_path, const std::string& obs_path,
              const std::string& starts, const std::string& out_path) {
    const SurrogateModel model = load_checkpoint(model_path);
    const ObservationSet obs = read_observations_csv(obs_path);
    const StartPolicy policy = starts == "center" ? StartPolicy::Center : StartPolicy::Grid3;
    const LocalizationResult result = localize(model, obs, policy);
    write_text_file(out_path, localization_result_to_json(result));
    std::cout << "p_hat_km " << format_double(result.p_hat.x) << ' '
              << format_double(result.p_hat.y) << "  objective "
              << format_double(result.objective_value) << "  iterations " << result.iterations
              << (result.converged ? "" : "  (not converged)") << '\n';
    return 0;
}

int cmd_sweep(const std::string& model_path, const std::string& config_path,
              const std::string& rows_path, const std::string& summary_path,
              const std::string& svg_dir, int mesh_n) {
    const SurrogateModel model = load_checkpoint(model_path);
    const SweepConfig config = load_sweep_config(config_path);
    const SweepReport report =
        run_sweep(model, config, mesh_n, ExecPolicy::Parallel, &std::cerr);
    write_rows_csv(report.rows, rows_path);
    write_summary_csv(report.summaries, summary_path);
    int failed = 0;
    for (const SigmaSummary& s : report.summaries) failed += s.n_failed;
    if (failed > 0) std::cerr << "warning: " << failed << " rows failed\n";
    if (!svg_dir.empty()) {
        std::filesystem::create_directories(svg_dir);
        const std::string violin = (std::filesystem::path(svg_dir) / "violin.svg").string();
        write_violin_svg(report.rows, violin);
        std::cerr << "chart -> " << violin << '\n';
        if (!config.curve_csv.empty()) {
            const std::string curve = (std::filesystem::path(svg_dir) / "curve.svg").string();
            write_curve_svg(read_curve_csv(config.curve_csv), curve);
            std::cerr << "chart -> " << curve << '\n';
        }
    }
    for (const SigmaSummary& s : report.summaries) {
        std::cout << "sigma " << format_double(s.sigma) << "  mean " << format_double(s.mean_m)
                  << " m  median " << format_double(s.median_m) << " m  max "
                  << format_double(s.max_m) << " m  (" << s.n - s.n_failed << '/' << s.n
                  << " ok)\n";
    }
    return 0;
}

int cmd_fem_solve(const std::string& p_text, const std::string& out_path, int mesh_n) {
    const auto comma = p_text.find(',');
    if (comma == std::string::npos) {
        throw std::invalid_argument("--p expects X,Y (km)");
    }
    const Vec2 p{parse_double(p_text.substr(0, comma)), parse_double(p_text.substr(comma + 1))};
    auto mesh = fem::build_mesh_shared(mesh_n);
    const fem::SteadySolver solver(mesh, kDefaultKappa, kDefaultVelocity);
    const fem::NodalField field = solver.solve(p);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
    fem::write_field_csv(field, out);
    std::cerr << "field for source (" << format_double(p.x) << ", " << format_double(p.y)
              << ") -> " << out_path << '\n';
    return 0;
}

int cmd_verify() {
    int failures = 0;
    const auto check = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
        if (!detail.empty()) std::cout << "  (" << detail << ')';
        std::cout << '\n';
        if (!ok) ++failures;
    };

    // Forward solver: manufactured-solution convergence at second order.
    const fem::ManufacturedErrors coarse = fem::verify_manufactured(kDefaultKappa, kDefaultVelocity, 41);
    const fem::ManufacturedErrors fine = fem::verify_manufactured(kDefaultKappa, kDefaultVelocity, 81);
    const double ratio = coarse.l2 / fine.l2;
    check("manufactured solution L2 refinement ratio in [3.4, 4.6]",
          ratio >= 3.4 && ratio <= 4.6,
          "ratio " + format_double(ratio));

    // Dirac load: partition of unity.
    {
        const fem::Mesh mesh = fem::build_mesh(25);
        bool ok = true;
        double worst = 0.0;
        Rng rng(11);
        for (int t = 0; t < 20; ++t) {
            const std::vector<double> load = fem::delta_load_full(mesh, rng.uniform_in(kSourceBox));
            double sum = 0.0;
            for (double v : load) sum += v;
            worst = std::max(worst, std::abs(sum - 1.0));
            ok = ok && std::abs(sum - 1.0) <= 1e-12;
        }
        check("Dirac load sums to 1", ok, "worst |sum-1| " + format_double(worst));
    }

    // Training loss: analytic parameter gradient vs central differences.
    {
        const nn::MlpParameters params = nn::init_params({4, 30, 30, 30, 30, 1}, 99);
        std::vector<TrainingSample> batch;
        Rng rng(5);
        for (int i = 0; i < 16; ++i) {
            TrainingSample s;
            s.p = rng.uniform_in(kSourceBox);
            do {
                s.q = rng.uniform_in(kDomain);
            } while ((s.q - s.p).norm() < kExclusionRadiusKm);
            s.u_ref = rng.uniform(-0.2, 0.8);
            s.grad_ref = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
            batch.push_back(s);
        }
        const nn::AdfSpec adf_spec;
        std::vector<double> grad;
        pg_loss_and_grad(params, adf_spec, batch, grad, ExecPolicy::Serial);

        double worst_rel = 0.0;
        constexpr double kStep = 1e-6;
        Rng dir_rng(17);
        for (int d = 0; d < 20; ++d) {
            std::vector<double> dir(params.theta.size());
            double norm = 0.0;
            for (double& v : dir) {
                v = dir_rng.uniform(-1.0, 1.0);
                norm += v * v;
            }
            norm = std::sqrt(norm);
            double analytic = 0.0;
            nn::MlpParameters plus = params, minus = params;
            for (std::size_t j = 0; j < dir.size(); ++j) {
                dir[j] /= norm;
                analytic += grad[j] * dir[j];
                plus.theta[j] += kStep * dir[j];
                minus.theta[j] -= kStep * dir[j];
            }
            std::vector<double> unused;
            const double fp = pg_loss_and_grad(plus, adf_spec, batch, unused, ExecPolicy::Serial);
            const double fm = pg_loss_and_grad(minus, adf_spec, batch, unused, ExecPolicy::Serial);
            const double fd = (fp - fm) / (2.0 * kStep);
            const double rel = std::abs(fd - analytic) / std::max(1e-12, std::abs(fd));
            worst_rel = std::max(worst_rel, rel);
        }
        check("H1 loss gradient matches finite differences (20 directions, rel < 1e-5)",
              worst_rel < 1e-5, "worst rel " + format_double(worst_rel));
    }

    // Localization objective: analytic dJ/dp vs central differences.
    {
        SurrogateModel model;
        model.params = nn::init_params({4, 30, 30, 30, 30, 1}, 123);
        Rng rng(29);
        double worst_rel = 0.0;
        bool ok = true;
        for (int t = 0; t < 50; ++t) {
            ObservationSet obs;
            const int n_obs = 5 + static_cast<int>(rng.index(8));
            for (int j = 0; j < n_obs; ++j) {
                Vec2 x;
                do {
                    x = rng.uniform_in(kDomain);
                } while (kSourceBox.contains(x));
                obs.points.push_back(x);
                obs.values.push_back(rng.uniform(-0.5, 0.5));
            }
            const Vec2 p{rng.uniform(0.36, 0.64), rng.uniform(0.36, 0.64)};
            Vec2 grad;
            objective_and_gradient(model, obs, p, &grad);
            // Five-point central stencil: 4th-order truncation permits a step
            // large enough that cancellation noise stays well below the gate.
            constexpr double kStep = 1e-4;
            for (int axis = 0; axis < 2; ++axis) {
                const auto at = [&](double offset) {
                    Vec2 probe = p;
                    (axis == 0 ? probe.x : probe.y) += offset;
                    return objective_and_gradient(model, obs, probe, nullptr);
                };
                const double fd = (8.0 * (at(kStep) - at(-kStep)) -
                                   (at(2.0 * kStep) - at(-2.0 * kStep))) /
                                  (12.0 * kStep);
                const double analytic = axis == 0 ? grad.x : grad.y;
                const double rel = std::abs(fd - analytic) / std::max(1e-9, std::abs(fd));
                worst_rel = std::max(worst_rel, rel);
                ok = ok && rel < 1e-6;
            }
        }
        check("objective gradient matches finite differences (50 configs, rel < 1e-6)", ok,
              "worst rel " + format_double(worst_rel));
    }

    if (failures > 0) {
        throw std::runtime_error(std::to_string(failures) + " verification check(s) failed");
    }
    std::cout << "all checks passed\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"physics-guided gas-dispersion surrogate and source localization"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_path, test_path, curve_path, model_path, obs_path;
    std::string rows_path, summary_path, svg_dir, p_text;
    std::string starts = "grid3";
    int mesh_n = kDefaultMeshN;
    std::uint64_t seed = 0;

    auto* gen = app.add_subcommand("gen-data", "sample and FEM-label a training dataset");
    gen->add_option("--config", config_path, "train config JSON")->required();
    gen->add_option("--out", out_path, "output dataset CSV")->required();
    gen->add_option("--mesh-n", mesh_n, "mesh nodes per side");
    auto* seed_opt = gen->add_option("--seed", seed, "override the config seed");

    auto* train_cmd = app.add_subcommand("train", "train the surrogate");
    train_cmd->add_option("--data", data_path, "training dataset CSV")->required();
    train_cmd->add_option("--test", test_path, "test dataset CSV")->required();
    train_cmd->add_option("--config", config_path, "train config JSON")->required();
    train_cmd->add_option("--out", out_path, "output checkpoint JSON")->required();
    train_cmd->add_option("--curve", curve_path, "training-curve CSV");

    auto* solve = app.add_subcommand("solve", "localize a source from observations");
    solve->add_option("--model", model_path, "checkpoint JSON")->required();
    solve->add_option("--obs", obs_path, "observations CSV")->required();
    solve->add_option("--starts", starts, "start policy: grid3 or center")
        ->check(CLI::IsMember({"grid3", "center"}));
    solve->add_option("--out", out_path, "result JSON")->required();

    auto* sweep = app.add_subcommand("sweep", "noise/source sweep with error statistics");
    sweep->add_option("--model", model_path, "checkpoint JSON")->required();
    sweep->add_option("--config", config_path, "sweep config JSON")->required();
    sweep->add_option("--out-rows", rows_path, "per-row CSV")->required();
    sweep->add_option("--out-summary", summary_path, "per-sigma summary CSV")->required();
    sweep->add_option("--svg", svg_dir, "directory for SVG charts");
    sweep->add_option("--mesh-n", mesh_n, "mesh nodes per side");

    auto* fem_cmd = app.add_subcommand("fem-solve", "steady FEM solve for one source");
    fem_cmd->add_option("--p", p_text, "source position X,Y in km")->required();
    fem_cmd->add_option("--out", out_path, "field CSV")->required();
    fem_cmd->add_option("--mesh-n", mesh_n, "mesh nodes per side");

    app.add_subcommand("verify", "run the manufactured-solution and gradient-check suites");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen_data(config_path, out_path, mesh_n, seed,
                                               seed_opt->count() > 0);
        if (train_cmd->parsed()) return cmd_train(data_path, test_path, config_path, out_path,
                                                  curve_path);
        if (solve->parsed()) return cmd_solve(model_path, obs_path, starts, out_path);
        if (sweep->parsed()) return cmd_sweep(model_path, config_path, rows_path, summary_path,
                                              svg_dir, mesh_n);
        if (fem_cmd->parsed()) return cmd_fem_solve(p_text, out_path, mesh_n);
        return cmd_verify();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help/version vs. bad usage
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
