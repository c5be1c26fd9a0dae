#include <doctest.h>

#include <stdexcept>

#include <vector>

#include "plume/dataset.hpp"
#include "plume/loss.hpp"
#include "plume/rng.hpp"
#include "plume/surrogate.hpp"

using namespace plume;
using namespace plume::nn;

// The parallel kernels all use fixed-chunk reductions or per-slot writes, so
// the serial reference implementation must match them bit for bit at any
// thread count. These are the repo-wide equality checks; the benchmark
// target exercises the same pairs for speed.

namespace {

std::vector<TrainingSample> synth_batch(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TrainingSample> batch(n);
    for (auto& s : batch) {
        s.p = Vec2{rng.uniform(0.35, 0.65), rng.uniform(0.35, 0.65)};
        s.q = Vec2{rng.uniform01(), rng.uniform01()};
        s.u_ref = rng.uniform(0.0, 0.3);
        s.grad_ref = Vec2{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }
    return batch;
}

}  // namespace

TEST_CASE("loss kernel: serial equals parallel at awkward sizes") {
    const MlpParameters p = init_params({4, 30, 30, 30, 30, 1}, 1001);
    for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{63}, std::size_t{64},
                          std::size_t{65}, std::size_t{127}, std::size_t{128}, std::size_t{1000}}) {
        const auto batch = synth_batch(n, 2000 + n);
        std::vector<double> gs, gp;
        const double ls = pg_loss_and_grad(p, AdfSpec{}, batch, gs, ExecPolicy::Serial);
        const double lp = pg_loss_and_grad(p, AdfSpec{}, batch, gp, ExecPolicy::Parallel);
        CHECK(ls == lp);
        CHECK(gs == gp);
        CHECK(evaluate_test_mse(p, AdfSpec{}, batch, ExecPolicy::Serial) ==
              evaluate_test_mse(p, AdfSpec{}, batch, ExecPolicy::Parallel));
    }
}

TEST_CASE("surrogate batch kernel: serial equals parallel") {
    SurrogateModel m;
    m.params = init_params({4, 30, 30, 30, 30, 1}, 1002);
    Rng rng(3000);
    for (std::size_t n : {std::size_t{1}, std::size_t{97}, std::size_t{640}}) {
        std::vector<Vec2> xs(n), ps(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = Vec2{rng.uniform01(), rng.uniform01()};
            ps[i] = Vec2{rng.uniform(0.35, 0.65), rng.uniform(0.35, 0.65)};
        }
        std::vector<double> serial, parallel;
        surrogate_values(m, xs, ps, serial, ExecPolicy::Serial);
        surrogate_values(m, xs, ps, parallel, ExecPolicy::Parallel);
        CHECK(serial == parallel);
    }
}

TEST_CASE("dataset labeling: serial equals parallel") {
    TrainConfig c;
    c.n_sources = 5;
    c.n_queries_per_source = 11;
    c.seed = 404;
    const auto unlabeled = sample_dataset(c);
    const auto serial = label_dataset(unlabeled, 31, ExecPolicy::Serial);
    const auto parallel = label_dataset(unlabeled, 31, ExecPolicy::Parallel);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].u_ref == parallel[i].u_ref);
        CHECK(serial[i].grad_ref.x == parallel[i].grad_ref.x);
        CHECK(serial[i].grad_ref.y == parallel[i].grad_ref.y);
    }
}
