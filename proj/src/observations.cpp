#include "plume/observations.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "plume/textio.hpp"

namespace plume {

void validate(const ObservationSet& obs, const Box2& p_box, const Box2& domain) {
    if (obs.points.size() != obs.values.size()) {
        throw std::invalid_argument("observations: points/values length mismatch");
    }
    if (obs.points.empty()) throw std::invalid_argument("observations: need at least one point");
    if (!(obs.noise_sigma >= 0.0) || !std::isfinite(obs.noise_sigma)) {
        throw std::invalid_argument("observations: noise_sigma must be finite and >= 0");
    }
    for (std::size_t j = 0; j < obs.points.size(); ++j) {
        const std::string where = "observation " + std::to_string(j + 1);
        if (!obs.points[j].finite() || !std::isfinite(obs.values[j])) {
            throw std::invalid_argument(where + ": non-finite entry");
        }
        if (!domain.contains(obs.points[j])) {
            throw std::invalid_argument(where + ": point outside the domain");
        }
        if (p_box.contains(obs.points[j])) {
            throw std::invalid_argument(where + ": point inside the source box");
        }
    }
}

void write_observations_csv(const ObservationSet& obs, std::ostream& out) {
    out << "x_km,y_km,value\n";
    for (std::size_t j = 0; j < obs.points.size(); ++j) {
        out << format_double(obs.points[j].x) << ',' << format_double(obs.points[j].y) << ','
            << format_double(obs.values[j]) << '\n';
    }
    if (!out) throw std::runtime_error("observations: write failed");
}

void write_observations_csv(const ObservationSet& obs, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("observations: cannot open for writing: " + path);
    write_observations_csv(obs, f);
}

ObservationSet read_observations_csv(std::istream& in) {
    const auto table_rows = read_csv(in, "x_km,y_km,value");
    ObservationSet obs;
    obs.points.reserve(table_rows.size());
    obs.values.reserve(table_rows.size());
    for (const auto& row : table_rows) {
        obs.points.push_back({parse_double(row[0]), parse_double(row[1])});
        obs.values.push_back(parse_double(row[2]));
    }
    return obs;
}

ObservationSet read_observations_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::invalid_argument("observations: cannot open: " + path);
    return read_observations_csv(f);
}

}  // namespace plume
