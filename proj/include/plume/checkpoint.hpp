#pragma once

/// Checkpoint format: a version-1 JSON document carrying the network weights
/// together with everything needed to re-create the surrogate exactly
/// (layer sizes, activation tag, ADF exponent, domain and source box).
/// Keys are emitted in sorted order and doubles as shortest round-trip
/// decimals, so identical models serialize to identical bytes.

#include <iosfwd>
#include <string>

#include "plume/surrogate.hpp"

namespace plume {

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const SurrogateModel& model, std::ostream& out);
void save_checkpoint(const SurrogateModel& model, const std::string& path);

/// Throws std::invalid_argument on malformed documents (wrong version,
/// unknown activation, inconsistent shapes, non-finite values).
SurrogateModel load_checkpoint(std::istream& in);
SurrogateModel load_checkpoint(const std::string& path);

}  // namespace plume
