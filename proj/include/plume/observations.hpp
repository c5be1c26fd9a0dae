#pragma once

/// Point measurements of the concentration field: positions x_j in the
/// observable region (inside the domain, disjoint from the source box) and
/// measured values y_j, optionally tagged with the noise level used to
/// synthesize them.

#include <iosfwd>
#include <string>
#include <vector>

#include "plume/geometry.hpp"

namespace plume {

struct ObservationSet {
    std::vector<Vec2> points;   ///< x_j, km
    std::vector<double> values;  ///< y_j
    double noise_sigma = 0.0;   ///< sigma used for synthesis; 0 if unknown
};

/// Throws std::invalid_argument unless: sizes match, at least one point,
/// every point lies in `domain`, no point lies in `p_box`, values finite.
void validate(const ObservationSet& obs, const Box2& p_box = kSourceBox,
              const Box2& domain = kDomain);

/// CSV header: x_km,y_km,value. noise_sigma is not part of the file.
void write_observations_csv(const ObservationSet& obs, std::ostream& out);
void write_observations_csv(const ObservationSet& obs, const std::string& path);
ObservationSet read_observations_csv(std::istream& in);
ObservationSet read_observations_csv(const std::string& path);

}  // namespace plume
