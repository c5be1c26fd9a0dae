#include "plume/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace plume {

namespace {

using nlohmann::json;

json box_to_json(const Box2& b) {
    return json{{"lo", {b.lo.x, b.lo.y}}, {"hi", {b.hi.x, b.hi.y}}};
}

Box2 box_from_json(const json& j) {
    const auto& lo = j.at("lo");
    const auto& hi = j.at("hi");
    if (!lo.is_array() || lo.size() != 2 || !hi.is_array() || hi.size() != 2) {
        throw std::invalid_argument("checkpoint: box must hold lo/hi pairs");
    }
    Box2 b{{lo[0].get<double>(), lo[1].get<double>()},
           {hi[0].get<double>(), hi[1].get<double>()}};
    if (!(b.lo.x < b.hi.x && b.lo.y < b.hi.y)) {
        throw std::invalid_argument("checkpoint: degenerate box");
    }
    return b;
}

}  // namespace

void save_checkpoint(const SurrogateModel& model, std::ostream& out) {
    validate(model);
    const auto& ls = model.params.layer_sizes;

    json layers = json::array();
    for (int k = 1; k <= model.params.n_layers(); ++k) {
        const int n_out = ls[static_cast<std::size_t>(k)];
        const int n_in = ls[static_cast<std::size_t>(k) - 1];
        const double* w = model.params.theta.data() + model.params.weight_offset(k);
        const double* b = model.params.theta.data() + model.params.bias_offset(k);
        json W = json::array();
        for (int i = 0; i < n_out; ++i) {
            json row = json::array();
            for (int j = 0; j < n_in; ++j) row.push_back(w[i * n_in + j]);
            W.push_back(std::move(row));
        }
        json bias = json::array();
        for (int i = 0; i < n_out; ++i) bias.push_back(b[i]);
        layers.push_back(json{{"W", std::move(W)}, {"b", std::move(bias)}});
    }

    json doc{{"version", kCheckpointVersion},
             {"layer_sizes", ls},
             {"activation", "softplus"},
             {"adf_mu", model.adf.mu},
             {"domain", box_to_json(model.adf.domain)},
             {"p_box", box_to_json(model.source_box)},
             {"layers", std::move(layers)}};
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("checkpoint: write failed");
}

void save_checkpoint(const SurrogateModel& model, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    save_checkpoint(model, f);
}

SurrogateModel load_checkpoint(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("checkpoint: invalid JSON: ") + e.what());
    }
    try {
        if (doc.at("version").get<int>() != kCheckpointVersion) {
            throw std::invalid_argument("checkpoint: unsupported version");
        }
        if (doc.at("activation").get<std::string>() != "softplus") {
            throw std::invalid_argument("checkpoint: unknown activation");
        }
        SurrogateModel model;
        model.adf.mu = doc.at("adf_mu").get<double>();
        model.adf.domain = box_from_json(doc.at("domain"));
        model.source_box = box_from_json(doc.at("p_box"));

        const auto ls = doc.at("layer_sizes").get<std::vector<int>>();
        model.params = nn::MlpParameters::zeros(ls);
        const auto& layers = doc.at("layers");
        if (!layers.is_array() || static_cast<int>(layers.size()) != model.params.n_layers()) {
            throw std::invalid_argument("checkpoint: layer count does not match layer_sizes");
        }
        for (int k = 1; k <= model.params.n_layers(); ++k) {
            const int n_out = ls[static_cast<std::size_t>(k)];
            const int n_in = ls[static_cast<std::size_t>(k) - 1];
            const auto& layer = layers[static_cast<std::size_t>(k) - 1];
            const auto& W = layer.at("W");
            const auto& b = layer.at("b");
            if (!W.is_array() || static_cast<int>(W.size()) != n_out ||
                !b.is_array() || static_cast<int>(b.size()) != n_out) {
                throw std::invalid_argument("checkpoint: layer shape mismatch");
            }
            double* wp = model.params.theta.data() + model.params.weight_offset(k);
            double* bp = model.params.theta.data() + model.params.bias_offset(k);
            for (int i = 0; i < n_out; ++i) {
                const auto& row = W[static_cast<std::size_t>(i)];
                if (!row.is_array() || static_cast<int>(row.size()) != n_in) {
                    throw std::invalid_argument("checkpoint: layer shape mismatch");
                }
                for (int j = 0; j < n_in; ++j) {
                    wp[i * n_in + j] = row[static_cast<std::size_t>(j)].get<double>();
                }
                bp[i] = b[static_cast<std::size_t>(i)].get<double>();
            }
        }
        validate(model);
        return model;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("checkpoint: missing or mistyped field: ") +
                                    e.what());
    }
}

SurrogateModel load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("checkpoint: cannot open: " + path);
    return load_checkpoint(f);
}

}  // namespace plume
