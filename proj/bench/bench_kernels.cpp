// Benchmark of the batched kernels: serial reference vs. OpenMP path.
// Checks bitwise agreement on the fly and reports wall-clock speedup.

#include <chrono>
#include <cstdio>
#include <vector>

#include "plume/loss.hpp"
#include "plume/rng.hpp"
#include "plume/surrogate.hpp"

using namespace plume;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

std::vector<TrainingSample> synthetic_batch(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<TrainingSample> batch;
    batch.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        TrainingSample s;
        s.p = rng.uniform_in(kSourceBox);
        do {
            s.q = rng.uniform_in(kDomain);
        } while ((s.q - s.p).norm() < kExclusionRadiusKm);
        s.u_ref = rng.uniform(-0.2, 0.8);
        s.grad_ref = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        batch.push_back(s);
    }
    return batch;
}

struct Timing {
    double serial_ms;
    double parallel_ms;
    bool identical;
};

Timing bench_loss(const nn::MlpParameters& params, const std::vector<TrainingSample>& batch,
                  int reps) {
    const nn::AdfSpec adf_spec;
    std::vector<double> g_serial(params.theta.size()), g_parallel(params.theta.size());
    PgWorkspace ws;
    double loss_serial = 0.0, loss_parallel = 0.0;

    double t0 = now_ms();
    for (int r = 0; r < reps; ++r) {
        loss_serial = pg_loss_and_grad(params, adf_spec, batch, nullptr, batch.size(),
                                       g_serial.data(), ExecPolicy::Serial, ws);
    }
    double t1 = now_ms();
    for (int r = 0; r < reps; ++r) {
        loss_parallel = pg_loss_and_grad(params, adf_spec, batch, nullptr, batch.size(),
                                         g_parallel.data(), ExecPolicy::Parallel, ws);
    }
    double t2 = now_ms();

    bool identical = loss_serial == loss_parallel;
    for (std::size_t j = 0; j < g_serial.size(); ++j) {
        identical = identical && g_serial[j] == g_parallel[j];
    }
    return {(t1 - t0) / reps, (t2 - t1) / reps, identical};
}

Timing bench_values(const SurrogateModel& model, const std::vector<TrainingSample>& batch,
                    int reps) {
    std::vector<Vec2> x, p;
    for (const TrainingSample& s : batch) {
        x.push_back(s.q);
        p.push_back(s.p);
    }
    std::vector<double> out_serial, out_parallel;

    double t0 = now_ms();
    for (int r = 0; r < reps; ++r) {
        surrogate_values(model, x, p, out_serial, ExecPolicy::Serial);
    }
    double t1 = now_ms();
    for (int r = 0; r < reps; ++r) {
        surrogate_values(model, x, p, out_parallel, ExecPolicy::Parallel);
    }
    double t2 = now_ms();

    bool identical = true;
    for (std::size_t j = 0; j < out_serial.size(); ++j) {
        identical = identical && out_serial[j] == out_parallel[j];
    }
    return {(t1 - t0) / reps, (t2 - t1) / reps, identical};
}

void report(const char* name, std::size_t n, const Timing& t) {
    std::printf("%-28s n=%-7zu serial %9.3f ms   openmp %9.3f ms   speedup %5.2fx   %s\n", name, n,
                t.serial_ms, t.parallel_ms, t.serial_ms / t.parallel_ms,
                t.identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
    std::printf("threads available: %d\n", max_threads());
    const nn::MlpParameters params = nn::init_params({4, 30, 30, 30, 30, 1}, 7);
    SurrogateModel model;
    model.params = params;

    bool all_identical = true;
    for (std::size_t n : {512u, 8192u, 65536u}) {
        const std::vector<TrainingSample> batch = synthetic_batch(n, 1000 + n);
        const int reps = n <= 512 ? 20 : (n <= 8192 ? 5 : 2);
        const Timing loss = bench_loss(params, batch, reps);
        report("pg_loss_and_grad", n, loss);
        const Timing values = bench_values(model, batch, reps);
        report("surrogate_values", n, values);
        all_identical = all_identical && loss.identical && values.identical;
    }
    if (!all_identical) {
        std::printf("serial/parallel results diverged\n");
        return 2;
    }
    return 0;
}
