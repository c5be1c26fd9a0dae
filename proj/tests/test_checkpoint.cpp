#include <doctest.h>

#include <stdexcept>

#include <cstdio>
#include <functional>
#include <json.hpp>
#include <sstream>

#include "plume/checkpoint.hpp"
#include "plume/rng.hpp"

using namespace plume;
using namespace plume::nn;

namespace {

SurrogateModel make_model(std::uint64_t seed) {
    SurrogateModel m;
    m.params = init_params({4, 30, 30, 30, 30, 1}, seed);
    Rng rng(derive_seed(seed, 1));
    for (double& t : m.params.theta) t += rng.uniform(-1e-3, 1e-3);
    return m;
}

}  // namespace

TEST_CASE("checkpoint round-trips bitwise") {
    const SurrogateModel m = make_model(99);
    std::ostringstream out;
    save_checkpoint(m, out);
    std::istringstream in(out.str());
    const SurrogateModel back = load_checkpoint(in);

    CHECK(back.params.layer_sizes == m.params.layer_sizes);
    REQUIRE(back.params.theta.size() == m.params.theta.size());
    CHECK(back.params.theta == m.params.theta);
    CHECK(back.adf.mu == m.adf.mu);
    CHECK(back.source_box.lo.x == m.source_box.lo.x);
    CHECK(back.source_box.hi.y == m.source_box.hi.y);
    CHECK(back.adf.domain.hi.x == m.adf.domain.hi.x);

    // Re-serialization reproduces the exact same bytes.
    std::ostringstream out2;
    save_checkpoint(back, out2);
    CHECK(out2.str() == out.str());
}

TEST_CASE("checkpoint document carries the documented schema") {
    const SurrogateModel m = make_model(100);
    std::ostringstream out;
    save_checkpoint(m, out);
    const nlohmann::json doc = nlohmann::json::parse(out.str());
    CHECK(doc.at("version").get<int>() == kCheckpointVersion);
    CHECK(doc.at("activation").get<std::string>() == "softplus");
    CHECK(doc.at("adf_mu").get<double>() == 1.0);
    CHECK(doc.at("layer_sizes") == nlohmann::json({4, 30, 30, 30, 30, 1}));
    CHECK(doc.at("domain").at("lo") == nlohmann::json({0.0, 0.0}));
    CHECK(doc.at("p_box").at("hi") == nlohmann::json({0.65, 0.65}));
    REQUIRE(doc.at("layers").size() == 5);
    const auto& first = doc.at("layers").at(0);
    CHECK(first.at("W").size() == 30);       // rows = n_out
    CHECK(first.at("W").at(0).size() == 4);  // cols = n_in
    CHECK(first.at("b").size() == 30);
}

TEST_CASE("loader rejects malformed documents") {
    const SurrogateModel m = make_model(101);
    std::ostringstream out;
    save_checkpoint(m, out);
    const std::string good = out.str();

    auto reject = [&](const std::function<void(nlohmann::json&)>& mutate) {
        nlohmann::json doc = nlohmann::json::parse(good);
        mutate(doc);
        std::istringstream in(doc.dump());
        CHECK_THROWS_AS(load_checkpoint(in), std::invalid_argument);
    };

    reject([](nlohmann::json& d) { d["version"] = 2; });
    reject([](nlohmann::json& d) { d["activation"] = "relu"; });
    reject([](nlohmann::json& d) { d["layers"][1]["b"].erase(0); });
    reject([](nlohmann::json& d) { d["layers"][0]["W"][0][1] = "oops"; });
    reject([](nlohmann::json& d) { d["layer_sizes"] = {4, 30, 1}; });
    reject([](nlohmann::json& d) { d.erase("adf_mu"); });
    reject([](nlohmann::json& d) { d["domain"]["lo"] = {0.0}; });

    std::istringstream not_json("this is not json");
    CHECK_THROWS_AS(load_checkpoint(not_json), std::invalid_argument);
}

TEST_CASE("file-path overloads work") {
    const SurrogateModel m = make_model(102);
    const std::string path = "checkpoint_test_tmp.json";
    save_checkpoint(m, path);
    const SurrogateModel back = load_checkpoint(path);
    CHECK(back.params.theta == m.params.theta);
    std::remove(path.c_str());
}
