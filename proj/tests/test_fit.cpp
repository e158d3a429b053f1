#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "geneprofile/design.hpp"
#include "geneprofile/error.hpp"
#include "geneprofile/fit.hpp"
#include "oracles.hpp"

using namespace geneprofile;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ModelMatrix one_column_model(Index n) {
  ModelMatrix m;
  m.x = MatrixXd::Ones(n, 1);
  m.retained = {0};
  m.n_coefficients = 1;
  m.rank = 1;
  m.residual_df = n - 1;
  for (Index i = 0; i < n; ++i) m.array_ids.push_back("a" + std::to_string(i));
  return m;
}

ModelMatrix stem_cell_model() {
  return compose_model_matrix(build_comparison_matrix(fixtures::stem_cell_design()), fixtures::pluripotent());
}

GeneFit ok_fit(double s2, Index df) {
  GeneFit f;
  f.status = FitStatus::Ok;
  f.s2 = s2;
  f.df = df;
  f.gamma_hat = VectorXd::Zero(1);
  f.unscaled_se = VectorXd::Ones(1);
  f.n_used = df + 1;
  return f;
}

}  // namespace

TEST_CASE("two-point mean") {
  VectorXd y(2);
  y << 1, 3;
  const auto f = fit_gene(y, one_column_model(2));
  REQUIRE(f.ok());
  CHECK(f.gamma_hat(0) == doctest::Approx(2.0));
  CHECK(f.s2 == doctest::Approx(2.0));
  CHECK(f.df == 1);
  CHECK(f.unscaled_se(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(f.n_used == 2);
}

TEST_CASE("all missing and too few observations are excluded") {
  const auto model = stem_cell_model();
  const VectorXd all_missing = VectorXd::Constant(20, kNaN);
  const auto f = fit_gene(all_missing, model);
  CHECK_FALSE(f.ok());
  CHECK(f.reason == "insufficient data");
  CHECK(f.n_used == 0);

  VectorXd three = VectorXd::Constant(20, kNaN);
  three.head(3).setOnes();
  CHECK_FALSE(fit_gene(three, model).ok());  // df would be 0
}

TEST_CASE("missing rows that leave the design rank-deficient exclude the gene") {
  const auto model = stem_cell_model();
  // keep only day0/day3 comparisons (rows 0 and 10, 5 and 15): gamma1 and gamma2 vanish
  VectorXd y = VectorXd::Constant(20, kNaN);
  for (const Index r : {0, 5, 10, 15}) y(r) = 0.3;
  const auto f = fit_gene(y, model);
  CHECK_FALSE(f.ok());
  CHECK(f.reason == "insufficient data");
}

TEST_CASE("missing values drop rows before fitting") {
  const auto model = stem_cell_model();
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 1.0);
  VectorXd y(20);
  for (Index i = 0; i < 20; ++i) y(i) = noise(rng);
  y(4) = kNaN;
  y(13) = kNaN;
  const auto f = fit_gene(y, model);
  REQUIRE(f.ok());
  CHECK(f.n_used == 18);
  CHECK(f.df == 15);

  MatrixXd x_obs(18, 3);
  VectorXd y_obs(18);
  for (Index i = 0, r = 0; i < 20; ++i) {
    if (std::isnan(y(i))) continue;
    x_obs.row(r) = model.x.row(i);
    y_obs(r++) = y(i);
  }
  const auto ref = oracle::normal_equations(x_obs, y_obs);
  for (Index j = 0; j < 3; ++j) {
    CHECK(f.gamma_hat(j) == doctest::Approx(static_cast<double>(ref.gamma[j])).epsilon(1e-10));
    CHECK(f.unscaled_se(j) == doctest::Approx(static_cast<double>(ref.unscaled_se[j])).epsilon(1e-10));
  }
  CHECK(f.s2 == doctest::Approx(static_cast<double>(ref.s2)).epsilon(1e-10));
}

TEST_CASE("stem cell design fit matches the normal-equations oracle") {
  const auto model = stem_cell_model();
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    VectorXd y(20);
    for (Index i = 0; i < 20; ++i) y(i) = noise(rng);
    const auto f = fit_gene(y, model);
    const auto ref = oracle::normal_equations(model.x, y);
    for (Index j = 0; j < 3; ++j) {
      CHECK(std::abs(f.gamma_hat(j) - static_cast<double>(ref.gamma[j])) <=
            1e-10 * std::max(1.0, std::abs(static_cast<double>(ref.gamma[j]))));
    }
    CHECK(std::abs(f.s2 - static_cast<double>(ref.s2)) <= 1e-10 * static_cast<double>(ref.s2));
    CHECK(f.df == 17);
  }
}

TEST_CASE("property: residuals are orthogonal to the design") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> dims(1, 4);
  for (int trial = 0; trial < 500; ++trial) {
    const Index k = dims(rng);
    const Index n = k + 1 + trial % 20;
    ModelMatrix m;
    m.x = MatrixXd::NullaryExpr(n, k, [&] { return noise(rng); });
    VectorXd y = VectorXd::NullaryExpr(n, [&] { return 3.0 * noise(rng); });
    const auto f = fit_gene(y, m);
    REQUIRE(f.ok());
    const VectorXd r = y - m.x * f.gamma_hat;
    CHECK((m.x.transpose() * r).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(f.s2 >= 0.0);
  }
}

TEST_CASE("property: scaling y scales gamma by c and s2 by c^2") {
  const auto model = stem_cell_model();
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (const double c : {-3.0, 0.001, 0.5, 7.25, 1e4}) {
    VectorXd y(20);
    for (Index i = 0; i < 20; ++i) y(i) = noise(rng);
    const auto f = fit_gene(y, model);
    const auto g = fit_gene(c * y, model);
    CHECK(g.gamma_hat.isApprox(c * f.gamma_hat, 1e-12));
    CHECK(g.s2 == doctest::Approx(c * c * f.s2).epsilon(1e-12));
    CHECK(g.unscaled_se == f.unscaled_se);
  }
}

TEST_CASE("fit_all keeps order, handles an all-missing gene and is thread independent") {
  const auto model = stem_cell_model();
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 1.0);
  ExpressionMatrix expr;
  expr.array_ids = model.array_ids;
  expr.values = MatrixXd::NullaryExpr(257, 20, [&] { return noise(rng); });
  for (Index g = 0; g < 257; ++g) expr.gene_ids.push_back("g" + std::to_string(g));
  expr.values.row(3).setConstant(kNaN);
  expr.values.row(7) = expr.values.row(6);

  const auto fits = fit_all(expr, model, 1);
  REQUIRE(fits.size() == 257);
  CHECK_FALSE(fits[3].ok());
  CHECK(fits[6].gamma_hat == fits[7].gamma_hat);
  CHECK(fits[6].s2 == fits[7].s2);
  for (std::size_t g = 0; g < fits.size(); ++g) {
    if (g == 3) continue;
    const auto single = fit_gene(expr.values.row(static_cast<Index>(g)).transpose(), model);
    CHECK(single.gamma_hat == fits[g].gamma_hat);
  }

  for (const unsigned threads : {2u, 3u, 8u, 64u}) {
    const auto again = fit_all(expr, model, threads);
    for (std::size_t g = 0; g < fits.size(); ++g) {
      CHECK(again[g].ok() == fits[g].ok());
      if (!fits[g].ok()) continue;
      CHECK(again[g].gamma_hat == fits[g].gamma_hat);
      CHECK(again[g].s2 == fits[g].s2);
    }
  }

  ExpressionMatrix wrong = expr;
  wrong.values.conservativeResize(257, 19);
  CHECK_THROWS_AS(fit_all(wrong, model), DataError);
}

TEST_CASE("align_to_model reorders columns and rejects mismatches") {
  const auto model = stem_cell_model();
  ExpressionMatrix expr;
  expr.gene_ids = {"g1", "g2"};
  expr.array_ids = model.array_ids;
  std::reverse(expr.array_ids.begin(), expr.array_ids.end());
  expr.values.resize(2, 20);
  for (Index i = 0; i < 40; ++i) expr.values(i % 2, i / 2) = static_cast<double>(i);
  const auto aligned = align_to_model(expr, model);
  CHECK(aligned.array_ids == model.array_ids);
  CHECK(aligned.values(0, 0) == expr.values(0, 19));

  auto dup_gene = expr;
  dup_gene.gene_ids[1] = "g1";
  CHECK_THROWS_WITH_AS(align_to_model(dup_gene, model), doctest::Contains("duplicate gene"), DataError);

  auto unknown = expr;
  unknown.array_ids[0] = "nope";
  CHECK_THROWS_WITH_AS(align_to_model(unknown, model), doctest::Contains("p24_a5"), DataError);
}

TEST_CASE("identical variances give an infinite prior df") {
  std::vector<GeneFit> fits(50, ok_fit(0.2, 17));
  const auto m = moderate_variances(fits);
  CHECK(m.d0_infinite());
  CHECK(m.s0_2 == doctest::Approx(0.2).epsilon(1e-14));
  for (Index g = 0; g < 50; ++g) {
    CHECK(m.posterior_s2(g) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(std::isinf(m.posterior_df(g)));
  }
}

TEST_CASE("posterior variance formula") {
  CHECK(posterior_variance(17.0, 0.05, 0.25, 17.0) == doctest::Approx((0.05 + 0.25) / 2));
  CHECK(posterior_variance(4.0, 0.05, 0.0, 17.0) == doctest::Approx(4.0 * 0.05 / 21.0));
  CHECK(posterior_variance(std::numeric_limits<double>::infinity(), 0.05, 9.0, 17.0) == 0.05);
  CHECK(posterior_variance(0.0, 0.05, 0.3, 17.0) == doctest::Approx(0.3));
}

TEST_CASE("moderation needs two usable genes") {
  std::vector<GeneFit> fits{ok_fit(0.1, 5), ok_fit(0.0, 5), GeneFit{}};
  CHECK_THROWS_AS(moderate_variances(fits), DataError);
  CHECK_THROWS_AS(moderate_variances(std::vector<GeneFit>{}), DataError);
}

namespace {

std::vector<GeneFit> simulated_fits(std::uint64_t seed, std::size_t n, double d0, double s0_2, Index df) {
  std::mt19937_64 rng(seed);
  std::chi_squared_distribution<double> prior(d0);
  std::chi_squared_distribution<double> sample(static_cast<double>(df));
  std::vector<GeneFit> fits;
  for (std::size_t g = 0; g < n; ++g) {
    const double sigma2 = d0 * s0_2 / prior(rng);
    fits.push_back(ok_fit(sigma2 * sample(rng) / static_cast<double>(df), df));
  }
  return fits;
}

}  // namespace

TEST_CASE("zero-variance genes are moderated but do not inform the prior") {
  auto fits = simulated_fits(1, 2000, 4.0, 0.05, 17);
  const auto base = moderate_variances(fits);
  fits.push_back(ok_fit(0.0, 17));
  fits.push_back(GeneFit{});
  const auto m = moderate_variances(fits);
  CHECK(m.n_prior_genes == 2000);
  CHECK(m.d0 == base.d0);
  CHECK(m.s0_2 == base.s0_2);
  CHECK(m.posterior_s2(2000) == doctest::Approx(m.d0 * m.s0_2 / (m.d0 + 17)));
  CHECK(std::isnan(m.posterior_s2(2001)));
}

TEST_CASE("moderation recovers the simulated prior") {
  double d0 = 0.0, s0 = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto m = moderate_variances(simulated_fits(seed, 10000, 4.0, 0.05, 17));
    d0 += m.d0 / 5;
    s0 += m.s0_2 / 5;
  }
  CHECK(d0 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(s0 == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("property: shrinkage bound and monotonicity") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto fits = simulated_fits(seed, 3000, 2.0 + static_cast<double>(seed), 0.1, 3 + static_cast<Index>(seed));
    const auto m = moderate_variances(fits);
    REQUIRE_FALSE(m.d0_infinite());
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t g = 0; g < fits.size(); ++g) {
      const double p = m.posterior_s2(static_cast<Index>(g));
      CHECK(p >= std::min(m.s0_2, fits[g].s2));
      CHECK(p <= std::max(m.s0_2, fits[g].s2));
      CHECK(m.posterior_df(static_cast<Index>(g)) == m.d0 + static_cast<double>(fits[g].df));
      pairs.emplace_back(fits[g].s2, p);
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i - 1].second <= pairs[i].second);
  }
}

TEST_CASE("prior estimate with mixed residual df") {
  std::vector<double> s2, df;
  std::mt19937_64 rng(4);
  std::chi_squared_distribution<double> prior(6.0);
  for (int g = 0; g < 20000; ++g) {
    const double d = (g % 2) ? 17.0 : 9.0;
    std::chi_squared_distribution<double> sample(d);
    const double sigma2 = 6.0 * 0.2 / prior(rng);
    s2.push_back(sigma2 * sample(rng) / d);
    df.push_back(d);
  }
  const auto p = estimate_prior(s2, df);
  CHECK(p.d0 == doctest::Approx(6.0).epsilon(0.2));
  CHECK(p.s0_2 == doctest::Approx(0.2).epsilon(0.05));
}
