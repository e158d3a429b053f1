#include "geneprofile/fit.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "geneprofile/error.hpp"
#include "geneprofile/parallel.hpp"
#include "geneprofile/special.hpp"

namespace geneprofile {

namespace {

GeneFit excluded(std::string reason, Index n_used) {
  GeneFit f;
  f.status = FitStatus::Excluded;
  f.reason = std::move(reason);
  f.n_used = n_used;
  return f;
}

}  // namespace

ExpressionMatrix align_to_model(const ExpressionMatrix& expr, const ModelMatrix& model) {
  if (static_cast<Index>(expr.array_ids.size()) != expr.values.cols() ||
      static_cast<Index>(expr.gene_ids.size()) != expr.values.rows()) {
    throw DataError("expression matrix dimensions do not match its labels");
  }
  std::set<std::string> genes;
  for (const auto& g : expr.gene_ids) {
    if (!genes.insert(g).second) throw DataError("duplicate gene id '" + g + "'");
  }
  std::map<std::string, Index> column;
  for (std::size_t c = 0; c < expr.array_ids.size(); ++c) {
    if (!column.emplace(expr.array_ids[c], static_cast<Index>(c)).second) {
      throw DataError("duplicate array column '" + expr.array_ids[c] + "'");
    }
  }
  if (expr.array_ids.size() != model.array_ids.size()) {
    throw DataError("expression data has " + std::to_string(expr.array_ids.size()) +
                    " arrays but the design has " + std::to_string(model.array_ids.size()));
  }

  ExpressionMatrix out;
  out.gene_ids = expr.gene_ids;
  out.array_ids = model.array_ids;
  out.values.resize(expr.values.rows(), static_cast<Index>(model.array_ids.size()));
  for (std::size_t c = 0; c < model.array_ids.size(); ++c) {
    const auto it = column.find(model.array_ids[c]);
    if (it == column.end()) {
      throw DataError("expression data has no column for array '" + model.array_ids[c] + "'");
    }
    out.values.col(static_cast<Index>(c)) = expr.values.col(it->second);
  }
  return out;
}

GeneFit fit_gene(const Eigen::Ref<const VectorXd>& y, const ModelMatrix& model) {
  const Index n = model.x.rows();
  const Index k = model.x.cols();
  if (y.size() != n) {
    throw DataError("gene has " + std::to_string(y.size()) + " values for " + std::to_string(n) +
                    " arrays");
  }

  std::vector<Index> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Index r = 0; r < n; ++r) {
    if (std::isfinite(y(r))) rows.push_back(r);
  }
  const auto n_used = static_cast<Index>(rows.size());
  if (n_used <= k) return excluded("insufficient data", n_used);

  MatrixXd x_obs(n_used, k);
  VectorXd y_obs(n_used);
  for (Index i = 0; i < n_used; ++i) {
    x_obs.row(i) = model.x.row(rows[static_cast<std::size_t>(i)]);
    y_obs(i) = y(rows[static_cast<std::size_t>(i)]);
  }
  if (n_used < n && numerical_rank(x_obs) < k) return excluded("insufficient data", n_used);

  const auto ls = solve_least_squares(x_obs, y_obs);
  GeneFit f;
  f.status = FitStatus::Ok;
  f.n_used = n_used;
  f.df = n_used - k;
  f.gamma_hat = ls.coef;
  f.unscaled_se = ls.unscaled_se;
  f.s2 = ls.rss / static_cast<double>(f.df);
  return f;
}

std::vector<GeneFit> fit_all(const ExpressionMatrix& expr, const ModelMatrix& model,
                             unsigned threads) {
  if (expr.values.cols() != model.x.rows()) {
    throw DataError("expression data has " + std::to_string(expr.values.cols()) +
                    " arrays but the model has " + std::to_string(model.x.rows()));
  }
  std::vector<GeneFit> fits(static_cast<std::size_t>(expr.values.rows()));
  parallel_for(fits.size(), threads, [&](std::size_t g) {
    fits[g] = fit_gene(expr.values.row(static_cast<Index>(g)).transpose(), model);
  });
  return fits;
}

bool ModerationResult::d0_infinite() const { return std::isinf(d0); }

PriorEstimate estimate_prior(std::span<const double> s2, std::span<const double> df) {
  using special::digamma;
  using special::trigamma;
  if (s2.size() != df.size()) throw std::invalid_argument("estimate_prior: size mismatch");
  const std::size_t n = s2.size();
  if (n < 2) throw DataError("variance moderation needs at least two genes with positive variance");

  // e_g = log s2_g - digamma(df_g/2) + log(df_g/2) has mean log s0^2 +
  // digamma(d0/2) - log(d0/2) and variance trigamma(d0/2) + trigamma(df_g/2).
  std::vector<double> e(n);
  double e_mean = 0.0;
  double trigamma_mean = 0.0;
  for (std::size_t g = 0; g < n; ++g) {
    const double half = df[g] / 2.0;
    e[g] = std::log(s2[g]) - digamma(half) + std::log(half);
    e_mean += e[g];
    trigamma_mean += trigamma(half);
  }
  e_mean /= static_cast<double>(n);
  trigamma_mean /= static_cast<double>(n);

  double e_var = 0.0;
  for (const double v : e) e_var += (v - e_mean) * (v - e_mean);
  e_var = e_var / static_cast<double>(n - 1) - trigamma_mean;

  PriorEstimate out;
  if (e_var > 0.0) {
    out.d0 = 2.0 * special::trigamma_inverse(e_var);
    out.s0_2 = std::exp(e_mean + digamma(out.d0 / 2.0) - std::log(out.d0 / 2.0));
  } else {
    // No excess spread: the prior is a point mass, whose scale MLE is the
    // pooled variance.
    out.d0 = std::numeric_limits<double>::infinity();
    double num = 0.0, den = 0.0;
    for (std::size_t g = 0; g < n; ++g) {
      num += df[g] * s2[g];
      den += df[g];
    }
    out.s0_2 = num / den;
  }
  return out;
}

double posterior_variance(double d0, double s0_2, double s2, double df) {
  if (std::isinf(d0)) return s0_2;
  return (d0 * s0_2 + df * s2) / (d0 + df);
}

ModerationResult moderate_variances(std::span<const GeneFit> fits) {
  std::vector<double> s2, df;
  for (const auto& f : fits) {
    if (f.ok() && f.s2 > 0.0 && std::isfinite(f.s2)) {
      s2.push_back(f.s2);
      df.push_back(static_cast<double>(f.df));
    }
  }
  const auto prior = estimate_prior(s2, df);

  ModerationResult out;
  out.d0 = prior.d0;
  out.s0_2 = prior.s0_2;
  out.n_prior_genes = static_cast<Index>(s2.size());
  const auto n = static_cast<Index>(fits.size());
  out.posterior_s2 = VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  out.posterior_df = VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (Index g = 0; g < n; ++g) {
    const auto& f = fits[static_cast<std::size_t>(g)];
    if (!f.ok()) continue;
    const auto gdf = static_cast<double>(f.df);
    out.posterior_s2(g) = posterior_variance(out.d0, out.s0_2, f.s2, gdf);
    out.posterior_df(g) = out.d0 + gdf;
  }
  return out;
}

}  // namespace geneprofile
