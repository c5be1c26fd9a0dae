#pragma once

/// Small self-contained SVG charts for the experiment outputs: a violin/box
/// chart of localization errors per noise level and a log-scale training
/// curve. No external tooling; the files are deterministic for fixed inputs.

#include <string>
#include <vector>

#include "plume/harness.hpp"
#include "plume/trainer.hpp"

namespace plume {

/// Violin (kernel-density) chart of error_m grouped by sigma, with the
/// quartile box and median marked. Failed rows are skipped.
std::string violin_svg(const std::vector<SweepRow>& rows);
void write_violin_svg(const std::vector<SweepRow>& rows, const std::string& path);

/// Training curve: H1 training loss and test MSE per epoch on a log10 axis.
std::string curve_svg(const std::vector<EpochRecord>& curve);
void write_curve_svg(const std::vector<EpochRecord>& curve, const std::string& path);

}  // namespace plume
