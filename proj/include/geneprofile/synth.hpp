#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "geneprofile/design.hpp"
#include "geneprofile/fit.hpp"
#include "geneprofile/profile.hpp"

namespace geneprofile {

struct SynthOptions {
  std::size_t n_genes = 20000;
  std::size_t n_planted = 20;
  // Planted positivity coefficients are delta + U(margin_lo, margin_hi).
  double margin_lo = 1.0;
  double margin_hi = 3.0;
  // Planted equivalence coefficients are U(-f, f) * epsilon.
  double equivalence_fraction = 0.25;
  // Gene variances follow a scaled inverse chi-square(d0, s0_2) prior.
  double d0 = 4.0;
  double s0_2 = 0.05;
  // One planted gene gets the strongest signal and a quarter of s0_2.
  bool anchor = true;
  std::uint64_t seed = 1;
};

enum class SynthRole { Background, Planted, Anchor };

std::string to_string(SynthRole role);

struct TruthRow {
  std::string gene_id;
  SynthRole role = SynthRole::Background;
  double sigma2 = 0.0;
  VectorXd gamma;  // every profile coefficient; unestimable ones are zero
};

struct SynthData {
  ExpressionMatrix expression;
  std::vector<TruthRow> truth;
};

/// Simulates y = X gamma + N(0, sigma2 I) per gene. Planted genes satisfy the
/// profile with margin; background genes violate at least one criterion.
/// Throws ValidationError for inconsistent options.
SynthData synthesize(const ModelMatrix& model, const ValidatedProfile& profile,
                     const SynthOptions& options);

void write_truth_csv(const SynthData& data, std::ostream& out);

}  // namespace geneprofile
