#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <vector>

#include "plume/rng.hpp"
#include "plume/surrogate.hpp"

using namespace plume;
using namespace plume::nn;

namespace {

SurrogateModel test_model(std::uint64_t seed) {
    SurrogateModel m;
    m.params = init_params({4, 30, 30, 30, 30, 1}, seed);
    // Non-zero biases so gradients exercise every term.
    Rng rng(derive_seed(seed, 3));
    for (int layer = 1; layer <= m.params.n_layers(); ++layer) {
        const std::size_t b0 = m.params.bias_offset(layer);
        const int nout = m.params.layer_sizes[static_cast<std::size_t>(layer)];
        for (int i = 0; i < nout; ++i) {
            m.params.theta[b0 + static_cast<std::size_t>(i)] = rng.uniform(-0.3, 0.3);
        }
    }
    return m;
}

}  // namespace

TEST_CASE("surrogate vanishes exactly on the domain boundary") {
    const SurrogateModel m = test_model(5);
    MlpTape tape;
    const Vec2 p{0.5, 0.5};
    CHECK(surrogate_value(m, Vec2{0.0, 0.42}, p, tape) == 0.0);
    CHECK(surrogate_value(m, Vec2{1.0, 0.13}, p, tape) == 0.0);
    CHECK(surrogate_value(m, Vec2{0.77, 0.0}, p, tape) == 0.0);
    CHECK(surrogate_value(m, Vec2{0.77, 1.0}, p, tape) == 0.0);
}

TEST_CASE("full evaluation is consistent with the cheaper entry points") {
    const SurrogateModel m = test_model(6);
    MlpTape t1, t2, t3;
    Rng rng(61);
    for (int t = 0; t < 30; ++t) {
        const Vec2 x{rng.uniform01(), rng.uniform01()};
        const Vec2 p{rng.uniform(0.35, 0.65), rng.uniform(0.35, 0.65)};
        const SurrogateEval full = surrogate_eval(m, x, p, t1);
        const SurrogateEval spatial = surrogate_value_grad_x(m, x, p, t2);
        const double val = surrogate_value(m, x, p, t3);
        CHECK(full.value == doctest::Approx(val).epsilon(1e-15));
        CHECK(spatial.value == doctest::Approx(val).epsilon(1e-15));
        CHECK(spatial.grad_x.x == doctest::Approx(full.grad_x.x).epsilon(1e-14));
        CHECK(spatial.grad_x.y == doctest::Approx(full.grad_x.y).epsilon(1e-14));
        CHECK(spatial.grad_p.x == 0.0);
        CHECK(spatial.grad_p.y == 0.0);
    }
}

TEST_CASE("both surrogate gradients agree with central differences") {
    const SurrogateModel m = test_model(7);
    MlpTape tape;
    Rng rng(62);
    const double eps = 1e-6;
    for (int t = 0; t < 40; ++t) {
        const Vec2 x{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)};
        const Vec2 p{rng.uniform(0.36, 0.64), rng.uniform(0.36, 0.64)};
        const SurrogateEval e = surrogate_eval(m, x, p, tape);

        const double fxp = surrogate_value(m, Vec2{x.x + eps, x.y}, p, tape);
        const double fxm = surrogate_value(m, Vec2{x.x - eps, x.y}, p, tape);
        const double fyp = surrogate_value(m, Vec2{x.x, x.y + eps}, p, tape);
        const double fym = surrogate_value(m, Vec2{x.x, x.y - eps}, p, tape);
        CHECK(e.grad_x.x == doctest::Approx((fxp - fxm) / (2 * eps)).epsilon(2e-6));
        CHECK(e.grad_x.y == doctest::Approx((fyp - fym) / (2 * eps)).epsilon(2e-6));

        const double fpxp = surrogate_value(m, x, Vec2{p.x + eps, p.y}, tape);
        const double fpxm = surrogate_value(m, x, Vec2{p.x - eps, p.y}, tape);
        const double fpyp = surrogate_value(m, x, Vec2{p.x, p.y + eps}, tape);
        const double fpym = surrogate_value(m, x, Vec2{p.x, p.y - eps}, tape);
        CHECK(e.grad_p.x == doctest::Approx((fpxp - fpxm) / (2 * eps)).epsilon(2e-6));
        CHECK(e.grad_p.y == doctest::Approx((fpyp - fpym) / (2 * eps)).epsilon(2e-6));
    }
}

TEST_CASE("batched evaluation matches pointwise calls bit for bit") {
    const SurrogateModel m = test_model(8);
    Rng rng(63);
    const std::size_t n = 257;  // deliberately not a chunk multiple
    std::vector<Vec2> xs(n), ps(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = Vec2{rng.uniform01(), rng.uniform01()};
        ps[i] = Vec2{rng.uniform(0.35, 0.65), rng.uniform(0.35, 0.65)};
    }
    std::vector<double> serial, parallel;
    surrogate_values(m, xs, ps, serial, ExecPolicy::Serial);
    surrogate_values(m, xs, ps, parallel, ExecPolicy::Parallel);
    REQUIRE(serial.size() == n);
    REQUIRE(parallel.size() == n);
    MlpTape tape;
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(serial[i] == surrogate_value(m, xs[i], ps[i], tape));
        CHECK(parallel[i] == serial[i]);
    }
}

TEST_CASE("model validation catches inconsistencies") {
    SurrogateModel m = test_model(9);
    CHECK_NOTHROW(validate(m));
    m.adf.mu = 0.2;
    CHECK_THROWS_AS(validate(m), std::invalid_argument);

    SurrogateModel m2 = test_model(9);
    m2.source_box = Box2{Vec2{-0.5, 0.35}, Vec2{0.65, 0.65}};
    CHECK_THROWS_AS(validate(m2), std::invalid_argument);

    SurrogateModel m3 = test_model(9);
    m3.params.theta[10] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(m3), std::invalid_argument);
}
