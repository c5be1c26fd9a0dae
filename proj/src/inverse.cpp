#include "plume/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace plume {

namespace {

/// Canonical evaluation order: by (x, y, value). Makes the serial residual
/// sum independent of how the observation file happened to be ordered.
std::vector<std::size_t> canonical_order(const ObservationSet& obs) {
    std::vector<std::size_t> order(obs.points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (obs.points[a].x != obs.points[b].x) return obs.points[a].x < obs.points[b].x;
        if (obs.points[a].y != obs.points[b].y) return obs.points[a].y < obs.points[b].y;
        return obs.values[a] < obs.values[b];
    });
    return order;
}

double objective_ordered(const SurrogateModel& model, const ObservationSet& obs,
                         const std::vector<std::size_t>& order, Vec2 p_prime, Vec2* grad,
                         nn::MlpTape& tape) {
    double j_value = 0.0;
    Vec2 g{0.0, 0.0};
    for (std::size_t idx : order) {
        const Vec2 x = obs.points[idx];
        if (grad) {
            const SurrogateEval e = surrogate_eval(model, x, p_prime, tape);
            const double r = obs.values[idx] - e.value;
            j_value += r * r;
            g += (-2.0 * r) * e.grad_p;
        } else {
            const double r = obs.values[idx] - surrogate_value(model, x, p_prime, tape);
            j_value += r * r;
        }
    }
    if (grad) *grad = g;
    return j_value;
}

}  // namespace

double objective_and_gradient(const SurrogateModel& model, const ObservationSet& obs,
                              Vec2 p_prime, Vec2* grad) {
    validate(obs, model.source_box, model.adf.domain);
    if (!model.source_box.contains(p_prime)) {
        throw std::invalid_argument("objective_and_gradient: p' outside the source box");
    }
    const std::vector<std::size_t> order = canonical_order(obs);
    nn::MlpTape tape;
    return objective_ordered(model, obs, order, p_prime, grad, tape);
}

std::vector<Vec2> make_starts(StartPolicy policy, const Box2& p_box) {
    if (policy == StartPolicy::Center) return {p_box.center()};
    constexpr double kInset = 1e-6;  // km; keeps grid starts strictly interior
    const double xs[3] = {p_box.lo.x + kInset, p_box.center().x, p_box.hi.x - kInset};
    const double ys[3] = {p_box.lo.y + kInset, p_box.center().y, p_box.hi.y - kInset};
    std::vector<Vec2> starts;
    starts.reserve(9);
    for (double y : ys) {
        for (double x : xs) starts.push_back({x, y});
    }
    return starts;
}

LocalizationResult localize(const SurrogateModel& model, const ObservationSet& obs,
                            const std::vector<Vec2>& starts, const LbfgsOptions& options) {
    validate(model);
    validate(obs, model.source_box, model.adf.domain);
    if (starts.empty()) throw std::invalid_argument("localize: no start points");

    const std::vector<std::size_t> order = canonical_order(obs);
    nn::MlpTape tape;
    const BoxObjective objective = [&](Vec2 p, Vec2* grad) {
        return objective_ordered(model, obs, order, p, grad, tape);
    };

    LocalizationResult result;
    result.starts_tried = static_cast<int>(starts.size());
    result.starts.reserve(starts.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const LbfgsReport rep = minimize_box(objective, starts[i], model.source_box, options);
        result.starts.push_back({starts[i], rep.x, rep.f, rep.iterations, rep.converged});
        if (result.starts[i].objective < result.starts[best].objective) best = i;
    }
    const StartRecord& win = result.starts[best];
    result.p_hat = win.endpoint;
    result.objective_value = win.objective;
    result.iterations = win.iterations;
    result.converged = win.converged;
    return result;
}

LocalizationResult localize(const SurrogateModel& model, const ObservationSet& obs,
                            StartPolicy policy, const LbfgsOptions& options) {
    return localize(model, obs, make_starts(policy, model.source_box), options);
}

std::string localization_result_to_json(const LocalizationResult& result) {
    nlohmann::json starts = nlohmann::json::array();
    for (const StartRecord& s : result.starts) {
        starts.push_back(nlohmann::json{{"start_km", {s.start.x, s.start.y}},
                                        {"end_km", {s.endpoint.x, s.endpoint.y}},
                                        {"objective", s.objective},
                                        {"iterations", s.iterations},
                                        {"converged", s.converged}});
    }
    nlohmann::json doc{{"p_hat_km", {result.p_hat.x, result.p_hat.y}},
                       {"p_hat_m", {result.p_hat.x * 1000.0, result.p_hat.y * 1000.0}},
                       {"objective", result.objective_value},
                       {"iterations", result.iterations},
                       {"converged", result.converged},
                       {"starts_tried", result.starts_tried},
                       {"starts", std::move(starts)}};
    return doc.dump(2) + "\n";
}

}  // namespace plume
