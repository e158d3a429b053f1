#pragma once

#include <span>
#include <string>
#include <vector>

#include "geneprofile/design.hpp"
#include "geneprofile/linalg.hpp"

namespace geneprofile {

/// Genes x arrays log2 ratios. Missing entries are NaN.
struct ExpressionMatrix {
  std::vector<std::string> gene_ids;
  std::vector<std::string> array_ids;
  MatrixXd values;
};

/// Reorders the columns of `expr` into the model's array order. Throws
/// DataError when the array sets differ or gene ids repeat.
ExpressionMatrix align_to_model(const ExpressionMatrix& expr, const ModelMatrix& model);

enum class FitStatus { Ok, Excluded };

struct GeneFit {
  VectorXd gamma_hat;    // one entry per retained coefficient
  double s2 = 0.0;       // residual variance RSS / df
  Index df = 0;
  VectorXd unscaled_se;  // sqrt(diag((X'X)^-1)) over the observed rows
  Index n_used = 0;
  FitStatus status = FitStatus::Excluded;
  std::string reason;

  [[nodiscard]] bool ok() const { return status == FitStatus::Ok; }
  /// Perfect fit. Kept and moderated, but left out of the prior estimate.
  [[nodiscard]] bool zero_variance() const { return ok() && s2 == 0.0; }
};

/// Least-squares fit of one gene after dropping missing entries.
GeneFit fit_gene(const Eigen::Ref<const VectorXd>& y, const ModelMatrix& model);

/// fit_gene over every row of `expr`, whose columns must already be in model
/// order. The result does not depend on `threads`.
std::vector<GeneFit> fit_all(const ExpressionMatrix& expr, const ModelMatrix& model,
                             unsigned threads = 1);

/// Posterior variance and degrees of freedom of one gene.
struct ModeratedVariance {
  double s2 = 0.0;
  double df = 0.0;
};

struct ModerationResult {
  double d0 = 0.0;  // +infinity when the sample variances show no excess spread
  double s0_2 = 0.0;
  VectorXd posterior_s2;  // NaN for excluded genes
  VectorXd posterior_df;
  Index n_prior_genes = 0;  // genes used to estimate (d0, s0_2)

  [[nodiscard]] bool d0_infinite() const;
  [[nodiscard]] ModeratedVariance at(Index gene) const {
    return {posterior_s2(gene), posterior_df(gene)};
  }
};

struct PriorEstimate {
  double d0 = 0.0;
  double s0_2 = 0.0;
};

/// Moment estimates of the scaled inverse chi-square prior from sample
/// variances with their degrees of freedom. All variances must be > 0 and at
/// least two must be given.
PriorEstimate estimate_prior(std::span<const double> s2, std::span<const double> df);

/// (d0 s0^2 + df s^2) / (d0 + df), tending to s0^2 as d0 grows without bound.
double posterior_variance(double d0, double s0_2, double s2, double df);

/// Empirical-Bayes moderation across genes. Throws DataError when fewer than
/// two genes have a usable positive variance.
ModerationResult moderate_variances(std::span<const GeneFit> fits);

}  // namespace geneprofile
