#include "plume/dataset.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "plume/fem.hpp"
#include "plume/rng.hpp"
#include "plume/textio.hpp"

namespace plume {

void validate(const TrainConfig& config) {
    if (config.n_sources <= 0 || config.n_queries_per_source <= 0) {
        throw std::invalid_argument("TrainConfig: sample counts must be positive");
    }
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    }
    if (config.epochs <= 0) throw std::invalid_argument("TrainConfig: epochs must be positive");
    if (config.batch_size <= 0) {
        throw std::invalid_argument("TrainConfig: batch_size must be positive");
    }
    if (config.test_set_size <= 0) {
        throw std::invalid_argument("TrainConfig: test_set_size must be positive");
    }
}

TrainConfig train_config_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
    TrainConfig c;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "n_sources") c.n_sources = value.get<int>();
            else if (key == "n_queries_per_source") c.n_queries_per_source = value.get<int>();
            else if (key == "learning_rate") c.learning_rate = value.get<double>();
            else if (key == "epochs") c.epochs = value.get<int>();
            else if (key == "batch_size") c.batch_size = value.get<int>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "test_set_size") c.test_set_size = value.get<int>();
            else throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: mistyped field: ") + e.what());
    }
    validate(c);
    return c;
}

std::string train_config_to_json(const TrainConfig& config) {
    nlohmann::json doc{{"n_sources", config.n_sources},
                       {"n_queries_per_source", config.n_queries_per_source},
                       {"learning_rate", config.learning_rate},
                       {"epochs", config.epochs},
                       {"batch_size", config.batch_size},
                       {"seed", config.seed},
                       {"test_set_size", config.test_set_size}};
    return doc.dump(2) + "\n";
}

TrainConfig load_train_config(const std::string& path) {
    return train_config_from_json(read_text_file(path));
}

std::vector<UnlabeledSample> sample_dataset(const TrainConfig& config, const Box2& p_box,
                                            const Box2& domain) {
    validate(config);
    Rng rng(config.seed);
    std::vector<UnlabeledSample> samples;
    samples.reserve(static_cast<std::size_t>(config.n_sources) * config.n_queries_per_source);
    for (int s = 0; s < config.n_sources; ++s) {
        const Vec2 p = rng.uniform_in(p_box);
        for (int k = 0; k < config.n_queries_per_source; ++k) {
            Vec2 q;
            do {
                q = rng.uniform_in(domain);
            } while ((q - p).norm() < kExclusionRadiusKm);
            samples.push_back({p, q});
        }
    }
    return samples;
}

namespace {

struct Vec2Less {
    bool operator()(const Vec2& a, const Vec2& b) const {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    }
};

}  // namespace

std::vector<TrainingSample> label_dataset(const std::vector<UnlabeledSample>& samples, int mesh_n,
                                          ExecPolicy policy, std::size_t* n_solves) {
    if (samples.empty()) {
        if (n_solves) *n_solves = 0;
        return {};
    }
    auto mesh = fem::build_mesh_shared(mesh_n);
    const fem::SteadySolver solver(mesh, kDefaultKappa, kDefaultVelocity);

    // Distinct sources in first-appearance order; every sample gets the id of
    // its source's slot.
    std::map<Vec2, std::size_t, Vec2Less> source_slot;
    std::vector<Vec2> sources;
    std::vector<std::size_t> slot_of_sample(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto [it, inserted] = source_slot.try_emplace(samples[i].p, sources.size());
        if (inserted) sources.push_back(samples[i].p);
        slot_of_sample[i] = it->second;
    }
    std::vector<std::vector<std::size_t>> samples_of_slot(sources.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples_of_slot[slot_of_sample[i]].push_back(i);
    }

    std::vector<TrainingSample> out(samples.size());
    // Process sources in blocks so arbitrarily many distinct sources stay
    // within a fixed memory footprint.
    constexpr std::size_t kSourceBlock = 128;
    for (std::size_t begin = 0; begin < sources.size(); begin += kSourceBlock) {
        const std::size_t end = std::min(begin + kSourceBlock, sources.size());
        const std::vector<Vec2> block(sources.begin() + static_cast<std::ptrdiff_t>(begin),
                                      sources.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<fem::NodalField> fields;
        try {
            fields = solver.solve_many(block);
        } catch (const std::exception& e) {
            throw std::runtime_error("label_dataset: FEM solve failed within source block starting at (" +
                                     format_double(block.front().x) + ", " +
                                     format_double(block.front().y) + "): " + e.what());
        }
        for (std::size_t slot = begin; slot < end; ++slot) {
            const fem::NodalField& field = fields[slot - begin];
            const auto& idx = samples_of_slot[slot];
            const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(idx.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::Parallel)
#endif
            for (std::ptrdiff_t k = 0; k < m; ++k) {
                const std::size_t i = idx[static_cast<std::size_t>(k)];
                const fem::PointSample ps = fem::eval_field(field, samples[i].q);
                out[i] = {samples[i].p, samples[i].q, ps.value, ps.gradient};
            }
        }
    }
    if (n_solves) *n_solves = sources.size();
    return out;
}

void write_dataset_csv(const std::vector<TrainingSample>& samples, std::ostream& out) {
    out << "px_km,py_km,qx_km,qy_km,u,gx,gy\n";
    for (const TrainingSample& s : samples) {
        out << format_double(s.p.x) << ',' << format_double(s.p.y) << ','
            << format_double(s.q.x) << ',' << format_double(s.q.y) << ','
            << format_double(s.u_ref) << ',' << format_double(s.grad_ref.x) << ','
            << format_double(s.grad_ref.y) << '\n';
    }
    if (!out) throw std::runtime_error("dataset: write failed");
}

void write_dataset_csv(const std::vector<TrainingSample>& samples, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("dataset: cannot open for writing: " + path);
    write_dataset_csv(samples, f);
}

std::vector<TrainingSample> read_dataset_csv(std::istream& in) {
    const auto table_rows = read_csv(in, "px_km,py_km,qx_km,qy_km,u,gx,gy");
    std::vector<TrainingSample> samples;
    samples.reserve(table_rows.size());
    for (const auto& row : table_rows) {
        TrainingSample s;
        s.p = {parse_double(row[0]), parse_double(row[1])};
        s.q = {parse_double(row[2]), parse_double(row[3])};
        s.u_ref = parse_double(row[4]);
        s.grad_ref = {parse_double(row[5]), parse_double(row[6])};
        samples.push_back(s);
    }
    return samples;
}

std::vector<TrainingSample> read_dataset_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("dataset: cannot open: " + path);
    return read_dataset_csv(f);
}

void validate_dataset(const std::vector<TrainingSample>& samples, const Box2& p_box,
                      const Box2& domain) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const TrainingSample& s = samples[i];
        const std::string where = "dataset row " + std::to_string(i + 1);
        if (!s.p.finite() || !s.q.finite() || !std::isfinite(s.u_ref) || !s.grad_ref.finite()) {
            throw std::invalid_argument(where + ": non-finite value");
        }
        if (!p_box.contains(s.p)) throw std::invalid_argument(where + ": source outside P");
        if (!domain.contains(s.q)) throw std::invalid_argument(where + ": query outside domain");
        if ((s.q - s.p).norm() < kExclusionRadiusKm) {
            throw std::invalid_argument(where + ": query inside the exclusion radius");
        }
    }
}

}  // namespace plume
