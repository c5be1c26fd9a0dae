#include "plume/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "plume/textio.hpp"

namespace plume {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 24.0;
constexpr double kTop = 28.0;
constexpr double kBottom = 48.0;

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void svg_header(std::ostringstream& out) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
}

void svg_footer(std::ostringstream& out) { out << "</g>\n</svg>\n"; }

void axis_line(std::ostringstream& out, double x1, double y1, double x2, double y2) {
    out << "<line x1=\"" << px(x1) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(x2) << "\" y2=\""
        << px(y2) << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
}

/// Gaussian kernel density estimate on a uniform grid; Silverman bandwidth.
std::vector<double> kde(const std::vector<double>& sample, const std::vector<double>& grid) {
    const std::size_t n = sample.size();
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : sample) var += (v - mean) * (v - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
    double bw = 1.06 * std::sqrt(var) * std::pow(static_cast<double>(n), -0.2);
    if (!(bw > 0.0)) bw = 1.0;  // degenerate sample: flat bump
    std::vector<double> density(grid.size(), 0.0);
    const double inv = 1.0 / (bw * std::sqrt(2.0 * std::numbers::pi) * static_cast<double>(n));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (double v : sample) {
            const double t = (grid[g] - v) / bw;
            acc += std::exp(-0.5 * t * t);
        }
        density[g] = acc * inv;
    }
    return density;
}

}  // namespace

std::string violin_svg(const std::vector<SweepRow>& rows) {
    // Errors per sigma, in first-appearance sigma order.
    std::vector<double> sigmas;
    std::map<double, std::vector<double>> groups;
    for (const SweepRow& r : rows) {
        if (!r.ok) continue;
        if (groups.find(r.sigma) == groups.end()) sigmas.push_back(r.sigma);
        groups[r.sigma].push_back(r.error_m);
    }
    if (sigmas.empty()) throw std::invalid_argument("violin_svg: no successful rows");

    double max_err = 0.0;
    for (const auto& [sigma, errs] : groups) {
        for (double e : errs) max_err = std::max(max_err, e);
    }
    if (max_err <= 0.0) max_err = 1.0;
    const double y_max = max_err * 1.08;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto y_of = [&](double err) { return kTop + plot_h * (1.0 - err / y_max); };

    std::ostringstream out;
    svg_header(out);
    out << "<text x=\"" << px(kLeft) << "\" y=\"18\" font-size=\"14\">localization error by "
           "noise level</text>\n";

    // y axis with 6 ticks
    axis_line(out, kLeft, kTop, kLeft, kTop + plot_h);
    axis_line(out, kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h);
    for (int t = 0; t <= 5; ++t) {
        const double err = y_max * t / 5.0;
        const double y = y_of(err);
        axis_line(out, kLeft - 4, y, kLeft, y);
        out << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(y + 4)
            << "\" text-anchor=\"end\">" << label(err) << "</text>\n";
    }
    out << "<text x=\"14\" y=\"" << px(kTop + plot_h / 2)
        << "\" transform=\"rotate(-90 14 " << px(kTop + plot_h / 2)
        << ")\" text-anchor=\"middle\">error (m)</text>\n";

    const double slot_w = plot_w / static_cast<double>(sigmas.size());
    constexpr int kGrid = 64;
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
        std::vector<double> errs = groups[sigmas[k]];
        std::sort(errs.begin(), errs.end());
        const double cx = kLeft + slot_w * (static_cast<double>(k) + 0.5);

        std::vector<double> grid(kGrid);
        for (int g = 0; g < kGrid; ++g) grid[static_cast<std::size_t>(g)] = y_max * g / (kGrid - 1);
        const std::vector<double> density = kde(errs, grid);
        double dmax = 0.0;
        for (double d : density) dmax = std::max(dmax, d);
        const double half_w = slot_w * 0.38;

        // mirrored density outline
        out << "<polygon fill=\"#7aa6c2\" fill-opacity=\"0.55\" stroke=\"#33607f\" "
               "stroke-width=\"1\" points=\"";
        for (int g = 0; g < kGrid; ++g) {
            const double w = dmax > 0.0 ? density[static_cast<std::size_t>(g)] / dmax * half_w : 0.0;
            out << px(cx - w) << ',' << px(y_of(grid[static_cast<std::size_t>(g)])) << ' ';
        }
        for (int g = kGrid - 1; g >= 0; --g) {
            const double w = dmax > 0.0 ? density[static_cast<std::size_t>(g)] / dmax * half_w : 0.0;
            out << px(cx + w) << ',' << px(y_of(grid[static_cast<std::size_t>(g)])) << ' ';
        }
        out << "\"/>\n";

        // quartile box + median
        const auto quant = [&](double q) {
            const double h = static_cast<double>(errs.size() - 1) * q;
            const std::size_t lo = static_cast<std::size_t>(h);
            if (lo + 1 >= errs.size()) return errs.back();
            const double w = h - static_cast<double>(lo);
            return errs[lo] * (1.0 - w) + errs[lo + 1] * w;
        };
        const double q1 = quant(0.25), q2 = quant(0.5), q3 = quant(0.75);
        out << "<rect x=\"" << px(cx - 7) << "\" y=\"" << px(y_of(q3)) << "\" width=\"14\" height=\""
            << px(std::max(0.0, y_of(q1) - y_of(q3))) << "\" fill=\"none\" stroke=\"#1b3a52\"/>\n";
        out << "<line x1=\"" << px(cx - 7) << "\" y1=\"" << px(y_of(q2)) << "\" x2=\"" << px(cx + 7)
            << "\" y2=\"" << px(y_of(q2)) << "\" stroke=\"#1b3a52\" stroke-width=\"2\"/>\n";

        out << "<text x=\"" << px(cx) << "\" y=\"" << px(kTop + plot_h + 18)
            << "\" text-anchor=\"middle\">" << label(sigmas[k]) << "</text>\n";
    }
    out << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kHeight - 10)
        << "\" text-anchor=\"middle\">noise sigma</text>\n";
    svg_footer(out);
    return out.str();
}

void write_violin_svg(const std::vector<SweepRow>& rows, const std::string& path) {
    write_text_file(path, violin_svg(rows));
}

std::string curve_svg(const std::vector<EpochRecord>& curve) {
    if (curve.empty()) throw std::invalid_argument("curve_svg: empty curve");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const EpochRecord& r : curve) {
        for (double v : {r.train_h1_loss, r.test_mse}) {
            if (v > 0.0) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (!(hi > 0.0)) throw std::invalid_argument("curve_svg: no positive values to plot");
    const double floor_log = std::floor(std::log10(lo));
    const double ceil_log = std::ceil(std::log10(hi));
    const double span = std::max(1.0, ceil_log - floor_log);

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const int last_epoch = curve.back().epoch;
    const auto x_of = [&](int epoch) {
        return kLeft + plot_w * (last_epoch > 1
                                     ? static_cast<double>(epoch - 1) / (last_epoch - 1)
                                     : 0.5);
    };
    const auto y_of = [&](double v) {
        const double clipped = std::max(v, std::pow(10.0, floor_log));
        return kTop + plot_h * (1.0 - (std::log10(clipped) - floor_log) / span);
    };

    std::ostringstream out;
    svg_header(out);
    out << "<text x=\"" << px(kLeft) << "\" y=\"18\" font-size=\"14\">training curve</text>\n";
    axis_line(out, kLeft, kTop, kLeft, kTop + plot_h);
    axis_line(out, kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h);

    for (double d = floor_log; d <= ceil_log + 0.5; d += 1.0) {
        const double y = y_of(std::pow(10.0, d));
        out << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(y) << "\" x2=\""
            << px(kLeft + plot_w) << "\" y2=\"" << px(y)
            << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(y + 4)
            << "\" text-anchor=\"end\">1e" << label(d) << "</text>\n";
    }
    for (int t = 0; t <= 5; ++t) {
        const int epoch = 1 + (last_epoch - 1) * t / 5;
        out << "<text x=\"" << px(x_of(epoch)) << "\" y=\"" << px(kTop + plot_h + 18)
            << "\" text-anchor=\"middle\">" << epoch << "</text>\n";
    }
    out << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kHeight - 10)
        << "\" text-anchor=\"middle\">epoch</text>\n";

    const auto polyline = [&](const char* color, auto getter) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const EpochRecord& r : curve) {
            out << px(x_of(r.epoch)) << ',' << px(y_of(getter(r))) << ' ';
        }
        out << "\"/>\n";
    };
    polyline("#33607f", [](const EpochRecord& r) { return r.train_h1_loss; });
    polyline("#c25b21", [](const EpochRecord& r) { return r.test_mse; });

    out << "<rect x=\"" << px(kLeft + plot_w - 170) << "\" y=\"" << px(kTop + 6)
        << "\" width=\"160\" height=\"40\" fill=\"white\" stroke=\"#ccc\"/>\n";
    out << "<line x1=\"" << px(kLeft + plot_w - 160) << "\" y1=\"" << px(kTop + 20) << "\" x2=\""
        << px(kLeft + plot_w - 130) << "\" y2=\"" << px(kTop + 20)
        << "\" stroke=\"#33607f\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << px(kLeft + plot_w - 124) << "\" y=\"" << px(kTop + 24)
        << "\">train H1 loss</text>\n";
    out << "<line x1=\"" << px(kLeft + plot_w - 160) << "\" y1=\"" << px(kTop + 36) << "\" x2=\""
        << px(kLeft + plot_w - 130) << "\" y2=\"" << px(kTop + 36)
        << "\" stroke=\"#c25b21\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << px(kLeft + plot_w - 124) << "\" y=\"" << px(kTop + 40)
        << "\">test MSE</text>\n";
    svg_footer(out);
    return out.str();
}

void write_curve_svg(const std::vector<EpochRecord>& curve, const std::string& path) {
    write_text_file(path, curve_svg(curve));
}

}  // namespace plume
