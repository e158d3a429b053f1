#include "geneprofile/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "geneprofile/error.hpp"
#include "geneprofile/io.hpp"

namespace geneprofile {

std::string to_string(SynthRole role) {
  switch (role) {
    case SynthRole::Background: return "background";
    case SynthRole::Planted: return "planted";
    case SynthRole::Anchor: return "anchor";
  }
  return "background";
}

namespace {

void check_options(const SynthOptions& o) {
  if (o.n_genes == 0) throw ValidationError("synth: n_genes must be >= 1");
  if (o.n_planted > o.n_genes) throw ValidationError("synth: n_planted exceeds n_genes");
  if (!(o.margin_lo > 0.0) || !(o.margin_hi > o.margin_lo)) {
    throw ValidationError("synth: need 0 < margin_lo < margin_hi");
  }
  if (!(o.equivalence_fraction >= 0.0 && o.equivalence_fraction < 1.0)) {
    throw ValidationError("synth: equivalence_fraction must lie in [0, 1)");
  }
  if (!(o.d0 > 0.0) || !(o.s0_2 > 0.0)) throw ValidationError("synth: d0 and s0_2 must be > 0");
}

}  // namespace

SynthData synthesize(const ModelMatrix& model, const ValidatedProfile& profile,
                     const SynthOptions& o) {
  check_options(o);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(o.d0);

  const auto n_coef = profile.n_coefficients();
  const auto& tested = profile.test_bearing();

  std::vector<SynthRole> roles(o.n_genes, SynthRole::Background);
  {
    std::vector<std::size_t> order(o.n_genes);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < o.n_planted; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, o.n_genes - 1);
      std::swap(order[i], order[pick(rng)]);
      roles[order[i]] = (i == 0 && o.anchor) ? SynthRole::Anchor : SynthRole::Planted;
    }
  }

  SynthData out;
  out.expression.array_ids = model.array_ids;
  out.expression.values.resize(static_cast<Index>(o.n_genes), model.x.rows());
  const int width = std::max<int>(5, static_cast<int>(std::to_string(o.n_genes).size()));

  for (std::size_t g = 0; g < o.n_genes; ++g) {
    TruthRow row;
    const auto number = std::to_string(g + 1);
    row.gene_id = "gene" + std::string(static_cast<std::size_t>(width) - std::min(number.size(), static_cast<std::size_t>(width)), '0') + number;
    row.role = roles[g];
    row.gamma = VectorXd::Zero(n_coef);

    for (const auto j : model.retained) row.gamma(j) = 0.5 * normal(rng);

    switch (row.role) {
      case SynthRole::Anchor:
        for (const auto j : tested) {
          const auto& c = profile.constraint(j);
          row.gamma(j) = c.kind == ConstraintKind::PositiveAbove ? c.margin + 1.25 * o.margin_hi : 0.0;
        }
        row.sigma2 = o.s0_2 / 4.0;
        break;
      case SynthRole::Planted:
        for (const auto j : tested) {
          const auto& c = profile.constraint(j);
          const double u = unit(rng);
          row.gamma(j) = c.kind == ConstraintKind::PositiveAbove
                             ? c.margin + o.margin_lo + u * (o.margin_hi - o.margin_lo)
                             : (2.0 * u - 1.0) * o.equivalence_fraction * c.margin;
        }
        row.sigma2 = o.d0 * o.s0_2 / chi2(rng);
        break;
      case SynthRole::Background: {
        std::uniform_int_distribution<std::size_t> pick(0, tested.size() - 1);
        const auto j = tested[pick(rng)];
        const auto& c = profile.constraint(j);
        const double excess = std::abs(0.5 * normal(rng));
        if (c.kind == ConstraintKind::PositiveAbove) {
          row.gamma(j) = c.margin - excess;
        } else {
          row.gamma(j) = (unit(rng) < 0.5 ? -1.0 : 1.0) * (c.margin + excess);
        }
        row.sigma2 = o.d0 * o.s0_2 / chi2(rng);
        break;
      }
    }

    VectorXd gamma_retained(static_cast<Index>(model.retained.size()));
    for (std::size_t c = 0; c < model.retained.size(); ++c) {
      gamma_retained(static_cast<Index>(c)) = row.gamma(model.retained[c]);
    }
    const double sigma = std::sqrt(row.sigma2);
    VectorXd y = model.x * gamma_retained;
    for (Index r = 0; r < y.size(); ++r) y(r) += sigma * normal(rng);
    out.expression.values.row(static_cast<Index>(g)) = y.transpose();
    out.expression.gene_ids.push_back(row.gene_id);
    out.truth.push_back(std::move(row));
  }
  return out;
}

void write_truth_csv(const SynthData& data, std::ostream& out) {
  out << "gene_id,role,sigma2";
  const Index n_coef = data.truth.empty() ? 0 : data.truth.front().gamma.size();
  for (Index j = 0; j < n_coef; ++j) out << ",gamma_" << j;
  out << '\n';
  for (const auto& t : data.truth) {
    out << t.gene_id << ',' << to_string(t.role) << ',' << format_number(t.sigma2);
    for (Index j = 0; j < t.gamma.size(); ++j) out << ',' << format_number(t.gamma(j));
    out << '\n';
  }
}

}  // namespace geneprofile
