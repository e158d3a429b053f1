#include "geneprofile/rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "geneprofile/error.hpp"
#include "geneprofile/parallel.hpp"
#include "geneprofile/special.hpp"

namespace geneprofile {

UStatistics u_statistics(std::string gene_id, const GeneFit& fit, ModeratedVariance variance,
                         const ValidatedProfile& profile, const ModelMatrix& model) {
  UStatistics out;
  out.gene_id = std::move(gene_id);
  out.coefficients = profile.test_bearing();
  const auto k = static_cast<Index>(out.coefficients.size());
  out.u = VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  out.se = VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  out.s2 = fit.s2;
  out.posterior_s2 = variance.s2;
  out.posterior_df = variance.df;

  if (!fit.ok()) {
    out.exclusion_reason = fit.reason.empty() ? "insufficient data" : fit.reason;
    out.s2 = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const double scale = std::sqrt(variance.s2);
  out.gamma_hat = fit.gamma_hat;
  out.se_all = fit.unscaled_se * scale;

  bool violated = false;
  bool degenerate = false;
  for (Index i = 0; i < k; ++i) {
    const Index coef = out.coefficients[static_cast<std::size_t>(i)];
    const Index col = model.column_of(coef);
    const auto& c = profile.constraint(coef);
    const double estimate = fit.gamma_hat(col);
    const double numerator = c.kind == ConstraintKind::PositiveAbove
                                 ? estimate - c.margin
                                 : c.margin - std::abs(estimate);
    const double se = out.se_all(col);
    out.se(i) = se;
    if (!(se > 0.0) || !std::isfinite(se)) {
      degenerate = true;
      if (!(numerator > 0.0)) violated = true;
      continue;
    }
    out.u(i) = numerator / se;
    if (!(out.u(i) > 0.0)) violated = true;
  }

  if (!degenerate) out.u_min = out.u.minCoeff();
  if (violated) {
    out.exclusion_reason = kCriterionViolated;
  } else if (degenerate) {
    out.exclusion_reason = kDegenerateVariance;
  } else {
    out.included = true;
  }
  return out;
}

std::vector<UStatistics> u_statistics_all(std::span<const std::string> gene_ids,
                                          std::span<const GeneFit> fits,
                                          const ModerationResult& moderation,
                                          const ValidatedProfile& profile,
                                          const ModelMatrix& model, unsigned threads) {
  if (gene_ids.size() != fits.size() ||
      static_cast<Index>(fits.size()) != moderation.posterior_s2.size()) {
    throw std::invalid_argument("u_statistics_all: gene, fit and moderation counts differ");
  }
  std::vector<UStatistics> out(fits.size());
  parallel_for(out.size(), threads, [&](std::size_t g) {
    out[g] = u_statistics(gene_ids[g], fits[g], moderation.at(static_cast<Index>(g)), profile, model);
  });
  return out;
}

RankedTable rank_genes(std::vector<UStatistics> all) {
  RankedTable table;
  for (auto& u : all) {
    if (u.included) {
      table.ranked.push_back({0, std::move(u)});
    } else {
      table.excluded.push_back(std::move(u));
    }
  }
  std::sort(table.ranked.begin(), table.ranked.end(), [](const RankedGene& a, const RankedGene& b) {
    if (a.stats.u_min != b.stats.u_min) return a.stats.u_min > b.stats.u_min;
    return a.stats.gene_id < b.stats.gene_id;
  });
  for (std::size_t i = 0; i < table.ranked.size(); ++i) table.ranked[i].rank = i + 1;
  return table;
}

RankMetadata make_metadata(const ValidatedProfile& profile, const ModelMatrix& model,
                           const ModerationResult& moderation) {
  RankMetadata m;
  m.profile_name = profile.name();
  m.coefficient_names = profile.spec().coefficient_names;
  m.constraints = profile.spec().constraints;
  m.retained = model.retained;
  m.d0 = moderation.d0;
  m.s0_2 = moderation.s0_2;
  return m;
}

double critical_value(double alpha, double df) {
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw ValidationError("alpha must lie in (0, 0.5), got " + std::to_string(alpha));
  }
  return special::student_t_critical(alpha, df);
}

CiiResult cii_decision(double estimate, double se, double df,
                       const CoefficientConstraint& constraint, double alpha) {
  const double t = critical_value(alpha, df);
  CiiResult out;
  switch (constraint.kind) {
    case ConstraintKind::EquivalentZero:
      out.lower = estimate - t * se;
      out.upper = estimate + t * se;
      out.reject_null = out.lower > -constraint.margin && out.upper < constraint.margin;
      break;
    case ConstraintKind::PositiveAbove:
      out.lower = estimate - t * se;
      out.upper = std::numeric_limits<double>::infinity();
      out.reject_null = out.lower > constraint.margin;
      break;
    case ConstraintKind::Unconstrained:
      throw std::invalid_argument("cii_decision: coefficient carries no constraint");
  }
  return out;
}

CiiResult cii_decision(const GeneFit& fit, ModeratedVariance variance, const ModelMatrix& model,
                       Index coefficient, const CoefficientConstraint& constraint, double alpha) {
  if (!fit.ok()) throw std::invalid_argument("cii_decision: gene fit is excluded");
  const Index col = model.column_of(coefficient);
  if (col < 0) throw std::invalid_argument("cii_decision: coefficient is not estimable");
  const double se = fit.unscaled_se(col) * std::sqrt(variance.s2);
  return cii_decision(fit.gamma_hat(col), se, variance.df, constraint, alpha);
}

bool iut_decision(const UStatistics& u, double posterior_df, double alpha) {
  const double t = critical_value(alpha, posterior_df);
  if (u.u.size() == 0) return false;
  return (u.u.array() > t).all();
}

SensitivityResult sensitivity_sweep(std::span<const std::string> gene_ids,
                                    std::span<const GeneFit> fits,
                                    const ModerationResult& moderation,
                                    const ValidatedProfile& profile, const ModelMatrix& model,
                                    std::span<const double> epsilons, unsigned threads) {
  if (epsilons.empty()) throw ValidationError("sensitivity grid is empty");
  for (const double e : epsilons) {
    if (!(e > 0.0)) throw ValidationError("sensitivity grid values must be > 0");
  }

  SensitivityResult out;
  out.epsilons.assign(epsilons.begin(), epsilons.end());
  std::map<std::string, std::vector<std::optional<std::size_t>>> ranks;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    const auto varied = profile.with_equivalence_margin(epsilons[e]);
    auto table = rank_genes(u_statistics_all(gene_ids, fits, moderation, varied, model, threads));
    table.metadata = make_metadata(varied, model, moderation);
    for (const auto& r : table.ranked) {
      auto& slot = ranks[r.stats.gene_id];
      slot.resize(epsilons.size());
      slot[e] = r.rank;
    }
    out.tables.push_back(std::move(table));
  }

  for (auto& [gene, r] : ranks) out.stability.push_back({gene, std::move(r)});
  const auto best = [](const StabilityRow& row) {
    std::size_t b = std::numeric_limits<std::size_t>::max();
    for (const auto& r : row.ranks) {
      if (r) b = std::min(b, *r);
    }
    return b;
  };
  std::stable_sort(out.stability.begin(), out.stability.end(),
                   [&](const StabilityRow& a, const StabilityRow& b) { return best(a) < best(b); });
  return out;
}

}  // namespace geneprofile
