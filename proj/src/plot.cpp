#include "geneprofile/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace geneprofile {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

VectorXd fitted_relative_profile(const GeneFit& fit, const ValidatedProfile& profile,
                                 const ModelMatrix& model) {
  if (!fit.ok()) throw std::invalid_argument("fitted_relative_profile: gene fit is excluded");
  VectorXd gamma = VectorXd::Zero(profile.n_coefficients());
  for (std::size_t c = 0; c < model.retained.size(); ++c) {
    gamma(model.retained[c]) = fit.gamma_hat(static_cast<Index>(c));
  }
  const VectorXd mu = profile.basis() * gamma;
  VectorXd rel = mu.array() - mu(0);
  rel(0) = 0.0;
  return rel;
}

std::string render_profiles_svg(std::span<const FittedProfilePlot> profiles,
                                std::span<const std::string> conditions, const std::string& title) {
  const auto n_cond = static_cast<Index>(conditions.size());
  double lo = 0.0, hi = 0.0;
  for (const auto& p : profiles) {
    if (p.values.size() != n_cond) {
      throw std::invalid_argument("render_profiles_svg: profile length differs from conditions");
    }
    lo = std::min(lo, p.values.minCoeff());
    hi = std::max(hi, p.values.maxCoeff());
  }
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi - lo < 1.0) hi = lo + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto x_at = [&](Index i) {
    return n_cond == 1 ? kLeft + plot_w / 2 : kLeft + plot_w * static_cast<double>(i) / static_cast<double>(n_cond - 1);
  };
  const auto y_at = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n';
  svg << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << num(kWidth) << R"(" height=")"
      << num(kHeight) << R"(" viewBox="0 0 )" << num(kWidth) << ' ' << num(kHeight) << R"(">)" << '\n';
  svg << R"(<rect x="0" y="0" width=")" << num(kWidth) << R"(" height=")" << num(kHeight)
      << R"(" fill="white"/>)" << '\n';
  svg << R"(<text x=")" << num(kLeft) << R"(" y="24" font-family="sans-serif" font-size="15">)"
      << escape(title) << "</text>\n";

  // axes and grid
  svg << R"(<g stroke="#888888" stroke-width="1" font-family="sans-serif" font-size="11">)" << '\n';
  svg << R"(<line x1=")" << num(kLeft) << R"(" y1=")" << num(kTop) << R"(" x2=")" << num(kLeft)
      << R"(" y2=")" << num(kTop + plot_h) << R"("/>)" << '\n';
  svg << R"(<line x1=")" << num(kLeft) << R"(" y1=")" << num(kTop + plot_h) << R"(" x2=")"
      << num(kLeft + plot_w) << R"(" y2=")" << num(kTop + plot_h) << R"("/>)" << '\n';
  const double step = (hi - lo) > 8 ? 2.0 : 1.0;
  for (double v = lo; v <= hi + 1e-9; v += step) {
    svg << R"(<line x1=")" << num(kLeft - 4) << R"(" y1=")" << num(y_at(v)) << R"(" x2=")"
        << num(kLeft + plot_w) << R"(" y2=")" << num(y_at(v)) << R"(" stroke-opacity=")"
        << (v == 0.0 ? "0.8" : "0.2") << R"("/>)" << '\n';
    svg << R"(<text x=")" << num(kLeft - 8) << R"(" y=")" << num(y_at(v) + 4)
        << R"(" text-anchor="end" stroke="none" fill="#333333">)" << num(v) << "</text>\n";
  }
  for (Index i = 0; i < n_cond; ++i) {
    svg << R"(<text x=")" << num(x_at(i)) << R"(" y=")" << num(kTop + plot_h + 18)
        << R"(" text-anchor="middle" stroke="none" fill="#333333">)"
        << escape(conditions[static_cast<std::size_t>(i)]) << "</text>\n";
  }
  svg << R"(<text x="16" y=")" << num(kTop + plot_h / 2) << R"(" transform="rotate(-90 16 )"
      << num(kTop + plot_h / 2) << ")\" text-anchor=\"middle\" stroke=\"none\" fill=\"#333333\">"
      << "fitted log2 ratio vs " << escape(conditions.empty() ? "" : conditions[0]) << "</text>\n";
  svg << "</g>\n";

  svg << R"(<g fill="none" stroke-width="1.6" font-family="sans-serif" font-size="11">)" << '\n';
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    const auto& prof = profiles[p];
    const char* colour = kPalette[p % std::size(kPalette)];
    svg << R"(<polyline stroke=")" << colour << R"(" points=")";
    for (Index i = 0; i < n_cond; ++i) {
      svg << (i ? " " : "") << num(x_at(i)) << ',' << num(y_at(prof.values(i)));
    }
    svg << R"("><title>)" << prof.rank << ". " << escape(prof.gene_id) << "</title></polyline>\n";
    const double ly = kTop + 12.0 + 14.0 * static_cast<double>(p);
    svg << R"(<text x=")" << num(kLeft + plot_w + 12) << R"(" y=")" << num(ly) << R"(" fill=")"
        << colour << R"(" stroke="none">)" << prof.rank << ". " << escape(prof.gene_id) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace geneprofile
