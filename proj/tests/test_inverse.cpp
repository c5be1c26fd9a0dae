#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "plume/inverse.hpp"
#include "plume/rng.hpp"

using namespace plume;
using namespace plume::nn;

namespace {

SurrogateModel trained_like_model(std::uint64_t seed) {
    SurrogateModel m;
    m.params = init_params({4, 30, 30, 30, 30, 1}, seed);
    Rng rng(derive_seed(seed, 4));
    for (double& t : m.params.theta) t += rng.uniform(-0.05, 0.05);
    return m;
}

ObservationSet circle_obs(const SurrogateModel& model, Vec2 p_true, int n) {
    ObservationSet obs;
    MlpTape tape;
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * M_PI * k / n;
        const Vec2 x{0.5 + 0.25 * std::cos(a), 0.5 + 0.25 * std::sin(a)};
        obs.points.push_back(x);
        obs.values.push_back(surrogate_value(model, x, p_true, tape));
    }
    return obs;
}

}  // namespace

TEST_CASE("objective vanishes with gradient zero at the generating source") {
    const SurrogateModel m = trained_like_model(1);
    const Vec2 p_true{0.52, 0.47};
    const ObservationSet obs = circle_obs(m, p_true, 32);
    Vec2 g;
    const double j = objective_and_gradient(m, obs, p_true, &g);
    CHECK(j == 0.0);
    CHECK(g.x == 0.0);
    CHECK(g.y == 0.0);
}

TEST_CASE("objective is bitwise invariant under observation permutations") {
    const SurrogateModel m = trained_like_model(2);
    const ObservationSet obs = circle_obs(m, Vec2{0.6, 0.4}, 25);
    ObservationSet shuffled = obs;
    Rng rng(9);
    std::vector<std::size_t> order(obs.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); ++i) {
        shuffled.points[i] = obs.points[order[i]];
        shuffled.values[i] = obs.values[order[i]];
    }

    const Vec2 probe{0.45, 0.55};
    Vec2 g1, g2;
    const double j1 = objective_and_gradient(m, obs, probe, &g1);
    const double j2 = objective_and_gradient(m, shuffled, probe, &g2);
    CHECK(j1 == j2);
    CHECK(g1.x == g2.x);
    CHECK(g1.y == g2.y);

    const LocalizationResult r1 = localize(m, obs, StartPolicy::Grid3);
    const LocalizationResult r2 = localize(m, shuffled, StartPolicy::Grid3);
    CHECK(r1.p_hat.x == r2.p_hat.x);
    CHECK(r1.p_hat.y == r2.p_hat.y);
    CHECK(r1.objective_value == r2.objective_value);
}

TEST_CASE("objective gradient agrees with central differences") {
    const SurrogateModel m = trained_like_model(3);
    const ObservationSet obs = circle_obs(m, Vec2{0.43, 0.58}, 20);
    Rng rng(10);
    const double eps = 1e-7;
    for (int t = 0; t < 15; ++t) {
        const Vec2 p{rng.uniform(0.36, 0.64), rng.uniform(0.36, 0.64)};
        Vec2 g;
        objective_and_gradient(m, obs, p, &g);
        const double fxp = objective_and_gradient(m, obs, Vec2{p.x + eps, p.y}, nullptr);
        const double fxm = objective_and_gradient(m, obs, Vec2{p.x - eps, p.y}, nullptr);
        const double fyp = objective_and_gradient(m, obs, Vec2{p.x, p.y + eps}, nullptr);
        const double fym = objective_and_gradient(m, obs, Vec2{p.x, p.y - eps}, nullptr);
        CHECK(g.x == doctest::Approx((fxp - fxm) / (2 * eps)).epsilon(1e-5));
        CHECK(g.y == doctest::Approx((fyp - fym) / (2 * eps)).epsilon(1e-5));
    }
}

TEST_CASE("objective rejects probes outside the source box") {
    const SurrogateModel m = trained_like_model(4);
    const ObservationSet obs = circle_obs(m, Vec2{0.5, 0.5}, 8);
    CHECK_THROWS_AS(objective_and_gradient(m, obs, Vec2{0.2, 0.5}, nullptr),
                    std::invalid_argument);
    CHECK_THROWS_AS(objective_and_gradient(m, obs, Vec2{0.5, 0.66}, nullptr),
                    std::invalid_argument);
}

TEST_CASE("observation validation enforces the observable region") {
    ObservationSet obs;
    obs.points = {Vec2{0.1, 0.1}};
    obs.values = {0.2};
    CHECK_NOTHROW(validate(obs));

    ObservationSet in_box = obs;
    in_box.points[0] = Vec2{0.5, 0.5};  // inside the source box
    CHECK_THROWS_AS(validate(in_box), std::invalid_argument);

    ObservationSet outside = obs;
    outside.points[0] = Vec2{1.2, 0.1};
    CHECK_THROWS_AS(validate(outside), std::invalid_argument);

    ObservationSet mismatch = obs;
    mismatch.values.push_back(0.3);
    CHECK_THROWS_AS(validate(mismatch), std::invalid_argument);

    ObservationSet empty;
    CHECK_THROWS_AS(validate(empty), std::invalid_argument);
}

TEST_CASE("observations CSV round-trips bitwise") {
    ObservationSet obs;
    Rng rng(11);
    for (int k = 0; k < 12; ++k) {
        obs.points.push_back(Vec2{rng.uniform(0.0, 0.3), rng.uniform01()});
        obs.values.push_back(rng.uniform(-0.1, 0.5));
    }
    std::ostringstream out;
    write_observations_csv(obs, out);
    std::istringstream head(out.str());
    std::string header;
    std::getline(head, header);
    CHECK(header == "x_km,y_km,value");

    std::istringstream in(out.str());
    const ObservationSet back = read_observations_csv(in);
    REQUIRE(back.points.size() == obs.points.size());
    for (std::size_t i = 0; i < obs.points.size(); ++i) {
        CHECK(back.points[i].x == obs.points[i].x);
        CHECK(back.points[i].y == obs.points[i].y);
        CHECK(back.values[i] == obs.values[i]);
    }
}

// ---- bound-constrained minimizer oracles -----------------------------------

TEST_CASE("minimizer solves a quadratic with an interior optimum") {
    const Box2 box{{0.0, 0.0}, {1.0, 1.0}};
    const Vec2 target{0.3, 0.7};
    const BoxObjective f = [&](Vec2 x, Vec2* g) {
        const Vec2 d = x - target;
        if (g) *g = Vec2{2.0 * d.x, 8.0 * d.y};
        return d.x * d.x + 4.0 * d.y * d.y;
    };
    const LbfgsReport r = minimize_box(f, Vec2{0.9, 0.1}, box);
    CHECK(r.converged);
    CHECK(r.x.x == doctest::Approx(target.x).epsilon(1e-7));
    CHECK(r.x.y == doctest::Approx(target.y).epsilon(1e-7));
    CHECK(r.f < 1e-14);
}

TEST_CASE("minimizer lands on the active bound when the optimum is outside") {
    const Box2 box{{0.0, 0.0}, {1.0, 1.0}};
    const Vec2 target{1.4, 0.25};  // outside to the right
    const BoxObjective f = [&](Vec2 x, Vec2* g) {
        const Vec2 d = x - target;
        if (g) *g = Vec2{2.0 * d.x, 2.0 * d.y};
        return d.x * d.x + d.y * d.y;
    };
    const LbfgsReport r = minimize_box(f, Vec2{0.2, 0.9}, box);
    CHECK(r.converged);
    CHECK(r.x.x == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.x.y == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("minimizer handles the Rosenbrock valley inside the box") {
    const Box2 box{{-2.0, -2.0}, {2.0, 2.0}};
    const BoxObjective f = [&](Vec2 v, Vec2* g) {
        const double a = 1.0 - v.x;
        const double b = v.y - v.x * v.x;
        if (g) {
            g->x = -2.0 * a - 400.0 * v.x * b;
            g->y = 200.0 * b;
        }
        return a * a + 100.0 * b * b;
    };
    const LbfgsReport r = minimize_box(f, Vec2{-1.2, 1.0}, box, LbfgsOptions{});
    CHECK(r.converged);
    CHECK(r.x.x == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.x.y == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("minimizer clamps the start and never leaves the box") {
    const Box2 box{{0.35, 0.35}, {0.65, 0.65}};
    int evals = 0;
    const BoxObjective f = [&](Vec2 x, Vec2* g) {
        ++evals;
        REQUIRE(box.contains(x));
        const Vec2 d = x - Vec2{0.5, 0.5};
        if (g) *g = Vec2{2.0 * d.x, 2.0 * d.y};
        return d.x * d.x + d.y * d.y;
    };
    const LbfgsReport r = minimize_box(f, Vec2{5.0, -3.0}, box);
    CHECK(r.converged);
    CHECK(evals > 0);
    CHECK(r.x.x == doctest::Approx(0.5).epsilon(1e-8));
}

// ---- localization -----------------------------------------------------------

TEST_CASE("make_starts produces the documented patterns") {
    const auto grid = make_starts(StartPolicy::Grid3, kSourceBox);
    REQUIRE(grid.size() == 9);
    const double inset = 1e-6;
    CHECK(grid[0].x == doctest::Approx(0.35 + inset).epsilon(1e-12));
    CHECK(grid[0].y == doctest::Approx(0.35 + inset).epsilon(1e-12));
    CHECK(grid[4].x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(grid[4].y == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(grid[8].x == doctest::Approx(0.65 - inset).epsilon(1e-12));
    for (const auto& s : grid) CHECK(kSourceBox.contains_strict(s));

    const auto center = make_starts(StartPolicy::Center, kSourceBox);
    REQUIRE(center.size() == 1);
    CHECK(center[0].x == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("localization recovers the generating source from exact observations") {
    const SurrogateModel m = trained_like_model(6);
    Rng rng(13);
    for (int t = 0; t < 6; ++t) {
        const Vec2 p_true{rng.uniform(0.37, 0.63), rng.uniform(0.37, 0.63)};
        const ObservationSet obs = circle_obs(m, p_true, 40);
        const LocalizationResult r = localize(m, obs, StartPolicy::Grid3);
        CHECK(kSourceBox.contains(r.p_hat));
        CHECK((r.p_hat - p_true).norm() * 1000.0 < 0.1);  // within 0.1 m
        CHECK(r.starts_tried == 9);
        REQUIRE(r.starts.size() == 9);
        // Reported minimum really is the smallest endpoint objective.
        for (const auto& s : r.starts) CHECK(r.objective_value <= s.objective);
    }
}

TEST_CASE("localization is deterministic") {
    const SurrogateModel m = trained_like_model(7);
    const ObservationSet obs = circle_obs(m, Vec2{0.41, 0.59}, 30);
    const LocalizationResult a = localize(m, obs, StartPolicy::Grid3);
    const LocalizationResult b = localize(m, obs, StartPolicy::Grid3);
    CHECK(a.p_hat.x == b.p_hat.x);
    CHECK(a.p_hat.y == b.p_hat.y);
    CHECK(a.objective_value == b.objective_value);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("localization result JSON carries the documented fields") {
    const SurrogateModel m = trained_like_model(8);
    const ObservationSet obs = circle_obs(m, Vec2{0.55, 0.45}, 16);
    const LocalizationResult r = localize(m, obs, StartPolicy::Grid3);
    const nlohmann::json doc = nlohmann::json::parse(localization_result_to_json(r));
    REQUIRE(doc.at("p_hat_km").size() == 2);
    CHECK(doc.at("p_hat_m").at(0).get<double>() ==
          doctest::Approx(doc.at("p_hat_km").at(0).get<double>() * 1000.0).epsilon(1e-12));
    CHECK(doc.contains("objective"));
    CHECK(doc.contains("iterations"));
    CHECK(doc.contains("converged"));
    CHECK(doc.at("starts_tried").get<int>() == 9);
    REQUIRE(doc.at("starts").size() == 9);
    const auto& s0 = doc.at("starts").at(0);
    CHECK(s0.contains("start_km"));
    CHECK(s0.contains("end_km"));
    CHECK(s0.contains("objective"));
    CHECK(s0.contains("iterations"));
    CHECK(s0.contains("converged"));
}
