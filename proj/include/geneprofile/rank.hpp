#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geneprofile/design.hpp"
#include "geneprofile/fit.hpp"
#include "geneprofile/profile.hpp"

namespace geneprofile {

inline const std::string kCriterionViolated = "criterion violated";
inline const std::string kDegenerateVariance = "degenerate variance";

/// Standardized distances of one gene's estimates to the profile's criterion
/// boundaries, one per test-bearing coefficient.
struct UStatistics {
  std::string gene_id;
  std::vector<Index> coefficients;  // profile coefficient index of each entry of u
  VectorXd u;
  VectorXd se;                      // se of the tested coefficients
  double u_min = std::numeric_limits<double>::quiet_NaN();
  bool included = false;
  std::string exclusion_reason;

  // Fit summary carried for reporting.
  VectorXd gamma_hat;  // retained coefficients
  VectorXd se_all;     // retained coefficients
  double s2 = std::numeric_limits<double>::quiet_NaN();
  double posterior_s2 = std::numeric_limits<double>::quiet_NaN();
  double posterior_df = std::numeric_limits<double>::quiet_NaN();
};

/// U_i = (gamma_i - delta) / se_i for positivity, (epsilon - |gamma_i|) / se_i
/// for equivalence, with se_i = unscaled_se_i * sqrt(posterior s2). The gene
/// is included iff every U_i > 0.
UStatistics u_statistics(std::string gene_id, const GeneFit& fit, ModeratedVariance variance,
                         const ValidatedProfile& profile, const ModelMatrix& model);

std::vector<UStatistics> u_statistics_all(std::span<const std::string> gene_ids,
                                          std::span<const GeneFit> fits,
                                          const ModerationResult& moderation,
                                          const ValidatedProfile& profile,
                                          const ModelMatrix& model, unsigned threads = 1);

struct RankMetadata {
  std::string profile_name;
  std::vector<std::string> coefficient_names;
  std::vector<CoefficientConstraint> constraints;
  std::vector<Index> retained;
  double d0 = 0.0;
  double s0_2 = 0.0;
};

struct RankedGene {
  std::size_t rank = 0;
  UStatistics stats;
};

struct RankedTable {
  std::vector<RankedGene> ranked;      // descending U, ties by ascending gene id
  std::vector<UStatistics> excluded;   // input order
  RankMetadata metadata;
};

RankedTable rank_genes(std::vector<UStatistics> all);

RankMetadata make_metadata(const ValidatedProfile& profile, const ModelMatrix& model,
                           const ModerationResult& moderation);

/// t* with P(T > t*) = alpha at `df`; the normal quantile when df is infinite.
/// Throws ValidationError unless 0 < alpha < 0.5.
double critical_value(double alpha, double df);

struct CiiResult {
  bool reject_null = false;
  double lower = 0.0;
  double upper = 0.0;
};

/// Confidence-interval-inclusion test of one coefficient. Equivalence uses
/// estimate +- t* se and rejects iff it lies inside (-epsilon, epsilon);
/// positivity uses (estimate - t* se, inf) and rejects iff it lies in
/// (delta, inf).
CiiResult cii_decision(double estimate, double se, double df,
                       const CoefficientConstraint& constraint, double alpha);

/// As above for profile coefficient `coefficient` of a fitted gene.
CiiResult cii_decision(const GeneFit& fit, ModeratedVariance variance, const ModelMatrix& model,
                       Index coefficient, const CoefficientConstraint& constraint, double alpha);

/// Intersection-union test at level alpha: every U_i > t*(alpha, df).
bool iut_decision(const UStatistics& u, double posterior_df, double alpha);

struct StabilityRow {
  std::string gene_id;
  std::vector<std::optional<std::size_t>> ranks;  // one per epsilon
};

struct SensitivityResult {
  std::vector<double> epsilons;
  std::vector<RankedTable> tables;
  std::vector<StabilityRow> stability;  // genes included at some epsilon
};

/// Re-ranks with every equivalence margin set to each epsilon in turn; fits
/// and moderation are shared across the grid.
SensitivityResult sensitivity_sweep(std::span<const std::string> gene_ids,
                                    std::span<const GeneFit> fits,
                                    const ModerationResult& moderation,
                                    const ValidatedProfile& profile, const ModelMatrix& model,
                                    std::span<const double> epsilons, unsigned threads = 1);

}  // namespace geneprofile
