#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <vector>

#include "plume/loss.hpp"
#include "plume/rng.hpp"
#include "plume/surrogate.hpp"

using namespace plume;
using namespace plume::nn;

namespace {

MlpParameters seasoned_params(std::uint64_t seed) {
    MlpParameters p = init_params({4, 30, 30, 30, 30, 1}, seed);
    Rng rng(derive_seed(seed, 5));
    for (int layer = 1; layer <= p.n_layers(); ++layer) {
        const std::size_t b0 = p.bias_offset(layer);
        const int nout = p.layer_sizes[static_cast<std::size_t>(layer)];
        for (int i = 0; i < nout; ++i) {
            p.theta[b0 + static_cast<std::size_t>(i)] = rng.uniform(-0.2, 0.2);
        }
    }
    return p;
}

std::vector<TrainingSample> random_batch(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TrainingSample> batch(n);
    for (auto& s : batch) {
        s.p = Vec2{rng.uniform(0.35, 0.65), rng.uniform(0.35, 0.65)};
        s.q = Vec2{rng.uniform01(), rng.uniform01()};
        s.u_ref = rng.uniform(0.0, 0.4);
        s.grad_ref = Vec2{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    }
    return batch;
}

// Labels produced by the surrogate itself (perfect-fit construction).
std::vector<TrainingSample> self_labeled_batch(const MlpParameters& params, std::size_t n,
                                               std::uint64_t seed) {
    SurrogateModel model;
    model.params = params;
    MlpTape tape;
    auto batch = random_batch(n, seed);
    for (auto& s : batch) {
        const SurrogateEval e = surrogate_value_grad_x(model, s.q, s.p, tape);
        s.u_ref = e.value;
        s.grad_ref = e.grad_x;
    }
    return batch;
}

}  // namespace

TEST_CASE("loss vanishes at a perfect fit") {
    const MlpParameters p = seasoned_params(1);
    const auto batch = self_labeled_batch(p, 100, 2);
    std::vector<double> grad;
    const double loss = pg_loss_and_grad(p, AdfSpec{}, batch, grad, ExecPolicy::Serial);
    CHECK(loss == 0.0);
    for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("loss is positive and finite away from a perfect fit") {
    const MlpParameters p = seasoned_params(3);
    const auto batch = random_batch(200, 4);
    std::vector<double> grad;
    const double loss = pg_loss_and_grad(p, AdfSpec{}, batch, grad, ExecPolicy::Serial);
    CHECK(loss > 0.0);
    CHECK(std::isfinite(loss));
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    CHECK(gnorm > 0.0);
}

TEST_CASE("loss gradient matches directional finite differences") {
    const MlpParameters p = seasoned_params(5);
    const auto batch = random_batch(64, 6);
    std::vector<double> grad;
    const double base = pg_loss_and_grad(p, AdfSpec{}, batch, grad, ExecPolicy::Serial);
    CHECK(base > 0.0);

    Rng rng(7);
    const double eps = 1e-6;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> dir(p.n_params());
        double norm2 = 0.0;
        for (double& d : dir) {
            d = rng.uniform(-1.0, 1.0);
            norm2 += d * d;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        MlpParameters pp = p, pm = p;
        for (std::size_t k = 0; k < p.n_params(); ++k) {
            pp.theta[k] += eps * inv * dir[k];
            pm.theta[k] -= eps * inv * dir[k];
        }
        std::vector<double> scratch;
        const double fp = pg_loss_and_grad(pp, AdfSpec{}, batch, scratch, ExecPolicy::Serial);
        const double fm = pg_loss_and_grad(pm, AdfSpec{}, batch, scratch, ExecPolicy::Serial);
        const double fd = (fp - fm) / (2 * eps);
        double analytic = 0.0;
        for (std::size_t k = 0; k < p.n_params(); ++k) analytic += grad[k] * inv * dir[k];
        CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("duplicating a chunk-aligned batch leaves loss and gradient unchanged") {
    const MlpParameters p = seasoned_params(8);
    const auto batch = random_batch(64, 9);  // exactly one reduction chunk
    auto doubled = batch;
    doubled.insert(doubled.end(), batch.begin(), batch.end());

    std::vector<double> g1, g2;
    const double l1 = pg_loss_and_grad(p, AdfSpec{}, batch, g1, ExecPolicy::Serial);
    const double l2 = pg_loss_and_grad(p, AdfSpec{}, doubled, g2, ExecPolicy::Serial);
    CHECK(l1 == l2);
    REQUIRE(g1.size() == g2.size());
    for (std::size_t k = 0; k < g1.size(); ++k) CHECK(g1[k] == g2[k]);
}

TEST_CASE("serial and parallel losses agree bit for bit") {
    const MlpParameters p = seasoned_params(10);
    for (std::size_t n : {std::size_t{1}, std::size_t{63}, std::size_t{64}, std::size_t{65},
                          std::size_t{500}}) {
        const auto batch = random_batch(n, 11 + n);
        std::vector<double> gs, gp;
        const double ls = pg_loss_and_grad(p, AdfSpec{}, batch, gs, ExecPolicy::Serial);
        const double lp = pg_loss_and_grad(p, AdfSpec{}, batch, gp, ExecPolicy::Parallel);
        CHECK(ls == lp);
        REQUIRE(gs.size() == gp.size());
        for (std::size_t k = 0; k < gs.size(); ++k) CHECK(gs[k] == gp[k]);
        CHECK(evaluate_test_mse(p, AdfSpec{}, batch, ExecPolicy::Serial) ==
              evaluate_test_mse(p, AdfSpec{}, batch, ExecPolicy::Parallel));
    }
}

TEST_CASE("index view selects the same subset as a copied batch") {
    const MlpParameters p = seasoned_params(12);
    const auto data = random_batch(100, 13);
    const std::vector<std::size_t> idx{5, 17, 3, 99, 42, 77, 0, 63};
    std::vector<TrainingSample> subset;
    for (std::size_t i : idx) subset.push_back(data[i]);

    PgWorkspace ws;
    std::vector<double> g_view(p.n_params(), 0.0), g_copy;
    const double l_view = pg_loss_and_grad(p, AdfSpec{}, data, idx.data(), idx.size(),
                                           g_view.data(), ExecPolicy::Serial, ws);
    const double l_copy = pg_loss_and_grad(p, AdfSpec{}, subset, g_copy, ExecPolicy::Serial);
    CHECK(l_view == l_copy);
    for (std::size_t k = 0; k < g_view.size(); ++k) CHECK(g_view[k] == g_copy[k]);
}

TEST_CASE("test MSE ignores gradient labels and matches a hand reduction") {
    const MlpParameters p = seasoned_params(14);
    auto batch = random_batch(37, 15);
    const double mse = evaluate_test_mse(p, AdfSpec{}, batch, ExecPolicy::Serial);

    auto mangled = batch;
    for (auto& s : mangled) s.grad_ref = Vec2{1e9, -1e9};
    CHECK(evaluate_test_mse(p, AdfSpec{}, mangled, ExecPolicy::Serial) == mse);

    SurrogateModel model;
    model.params = p;
    MlpTape tape;
    double acc = 0.0;
    for (const auto& s : batch) {
        const double r = surrogate_value(model, s.q, s.p, tape) - s.u_ref;
        acc += r * r;
    }
    CHECK(mse == doctest::Approx(acc / static_cast<double>(batch.size())).epsilon(1e-13));
}

TEST_CASE("empty batches are rejected") {
    const MlpParameters p = seasoned_params(16);
    std::vector<TrainingSample> empty;
    std::vector<double> grad;
    CHECK_THROWS_AS(pg_loss_and_grad(p, AdfSpec{}, empty, grad, ExecPolicy::Serial),
                    std::invalid_argument);
    CHECK_THROWS_AS(evaluate_test_mse(p, AdfSpec{}, empty, ExecPolicy::Serial),
                    std::invalid_argument);
}

TEST_CASE("non-finite samples raise a runtime error naming the sample") {
    MlpParameters p = seasoned_params(17);
    auto batch = random_batch(8, 18);
    batch[5].u_ref = std::numeric_limits<double>::infinity();
    std::vector<double> grad;
    CHECK_THROWS_AS(pg_loss_and_grad(p, AdfSpec{}, batch, grad, ExecPolicy::Serial),
                    std::runtime_error);
}
