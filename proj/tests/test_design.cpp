#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "geneprofile/design.hpp"
#include "geneprofile/error.hpp"
#include "geneprofile/fit.hpp"
#include "geneprofile/profile.hpp"
#include "oracles.hpp"

using namespace geneprofile;

namespace {

ProfileSpec make_profile(const std::vector<std::string>& conditions, const MatrixXd& basis,
                         std::vector<CoefficientConstraint> constraints) {
  ProfileSpec p;
  p.name = "random";
  p.conditions = conditions;
  for (Index j = 0; j < basis.cols(); ++j) {
    p.coefficient_names.push_back("c" + std::to_string(j));
    std::vector<Decimal> col;
    for (Index i = 0; i < basis.rows(); ++i) col.push_back(Decimal::from_double(basis(i, j)));
    p.columns.push_back(std::move(col));
  }
  p.constraints = std::move(constraints);
  return p;
}

ComparisonDesign random_design(std::mt19937_64& rng, int n_conditions, int n_arrays) {
  ComparisonDesign d;
  for (int c = 0; c < n_conditions; ++c) d.conditions.push_back("t" + std::to_string(c));
  std::uniform_int_distribution<int> pick(0, n_conditions - 1);
  for (int a = 0; a < n_arrays; ++a) {
    const int i = pick(rng);
    int j = pick(rng);
    while (j == i) j = pick(rng);
    d.arrays.push_back({"a" + std::to_string(a), d.conditions[i], d.conditions[j], "g"});
  }
  return d;
}

}  // namespace

TEST_CASE("comparison row encodes cy5 minus cy3") {
  ComparisonDesign d{{"d0", "d3", "d6", "d9"}, {{"a1", "d0", "d3", "p1"}}};
  const auto xs = build_comparison_matrix(d);
  REQUIRE(xs.values.rows() == 1);
  CHECK(xs.values.row(0) == Eigen::RowVector4d(-1, 1, 0, 0));
}

TEST_CASE("stem cell design gives a 20 x 4 comparison matrix with zero row sums") {
  const auto xs = build_comparison_matrix(fixtures::stem_cell_design());
  CHECK(xs.values.rows() == 20);
  CHECK(xs.values.cols() == 4);
  for (Index r = 0; r < xs.values.rows(); ++r) {
    CHECK(xs.values.row(r).sum() == 0.0);
    CHECK((xs.values.row(r).array() == 1.0).count() == 1);
    CHECK((xs.values.row(r).array() == -1.0).count() == 1);
  }
  // each comparison appears twice per direction
  CHECK(xs.values.colwise().sum().isZero());
}

TEST_CASE("design validation errors") {
  ComparisonDesign empty{{"a", "b"}, {}};
  CHECK_THROWS_AS(build_comparison_matrix(empty), ValidationError);

  ComparisonDesign unknown{{"a", "b"}, {{"x1", "a", "zz", ""}}};
  CHECK_THROWS_WITH_AS(build_comparison_matrix(unknown), doctest::Contains("unknown condition"),
                       ValidationError);

  ComparisonDesign self{{"a", "b"}, {{"x1", "a", "a", ""}}};
  CHECK_THROWS_AS(build_comparison_matrix(self), ValidationError);

  ComparisonDesign dup{{"a", "b"}, {{"x1", "a", "b", ""}, {"x1", "b", "a", ""}}};
  CHECK_THROWS_WITH_AS(build_comparison_matrix(dup), doctest::Contains("duplicate array"),
                       ValidationError);
}

TEST_CASE("stem cell design with the pluripotency basis") {
  const auto xs = build_comparison_matrix(fixtures::stem_cell_design());
  const auto model = compose_model_matrix(xs, fixtures::pluripotent());
  CHECK(model.x.rows() == 20);
  CHECK(model.x.cols() == 3);
  CHECK(model.rank == 3);
  CHECK(model.residual_df == 17);
  CHECK(model.dropped == std::vector<Index>{0});
  CHECK(model.retained == std::vector<Index>{1, 2, 3});

  // oracle: naive product and elimination rank
  const MatrixXd full = oracle::naive_product(xs.values, fixtures::pluripotent().basis_matrix());
  CHECK(full.col(0).isZero(0.0));
  CHECK(model.x == full.rightCols(3));
  CHECK(oracle::gauss_rank(model.x) == 3);

  // p23_a1 is day0 (cy3) -> day3 (cy5)
  CHECK(model.array_ids[10] == "p23_a1");
  CHECK(model.x.row(10) == Eigen::RowVector3d(0, 0, -1));
}

TEST_CASE("model row per comparison pattern") {
  const auto plur = fixtures::pluripotent();
  const auto row_for = [&](const char* cy3, const char* cy5) {
    ComparisonDesign d{{"day0", "day3", "day6", "day9"}, {{"a", cy3, cy5, ""}}};
    const MatrixXd full = build_comparison_matrix(d).values * plur.basis_matrix();
    return Eigen::RowVector3d(full.row(0).tail(3));
  };
  // gamma1 = (mu0+mu3)/2 - mu6, gamma2 = mu6 - mu9, gamma3 = mu0 - mu3
  CHECK(row_for("day0", "day3") == Eigen::RowVector3d(0, 0, -1));
  CHECK(row_for("day9", "day0") == Eigen::RowVector3d(1, 1, 0.5));
  CHECK(row_for("day6", "day3") == Eigen::RowVector3d(1, 0, -0.5));
  CHECK(row_for("day9", "day3") == Eigen::RowVector3d(1, 1, -0.5));
  CHECK(row_for("day9", "day6") == Eigen::RowVector3d(0, 1, 0));
}

TEST_CASE("constrained coefficient with a zero column is an error") {
  ComparisonDesign d{{"a", "b"}, {{"x1", "a", "b", ""}}};
  MatrixXd basis(2, 2);
  basis << 1, 1, 0, 1;
  const auto p = make_profile(d.conditions, basis,
                              {CoefficientConstraint::positive_above(), CoefficientConstraint::positive_above()});
  CHECK_THROWS_WITH_AS(compose_model_matrix(build_comparison_matrix(d), p),
                       doctest::Contains("constrained coefficient unestimable"), ValidationError);
}

TEST_CASE("rank-deficient retained columns are not identifiable") {
  ComparisonDesign d{{"a", "b", "c"},
                     {{"x1", "a", "b", ""}, {"x2", "b", "a", ""}, {"x3", "a", "b", ""}}};
  const MatrixXd basis = MatrixXd::Identity(3, 3);
  const auto p = make_profile(d.conditions, basis,
                              {CoefficientConstraint::positive_above(), CoefficientConstraint::free(),
                               CoefficientConstraint::free()});
  CHECK_THROWS_WITH_AS(compose_model_matrix(build_comparison_matrix(d), p),
                       doctest::Contains("not identifiable"), ValidationError);
}

TEST_CASE("profile conditions are matched by label") {
  auto p = fixtures::pluripotent();
  // reverse the profile's condition order and its basis rows
  std::reverse(p.conditions.begin(), p.conditions.end());
  for (auto& col : p.columns) std::reverse(col.begin(), col.end());
  const auto xs = build_comparison_matrix(fixtures::stem_cell_design());
  CHECK(compose_model_matrix(xs, p).x == compose_model_matrix(xs, fixtures::pluripotent()).x);

  p.conditions[0] = "day12";
  CHECK_THROWS_AS(compose_model_matrix(xs, p), ValidationError);
}

TEST_CASE("property: composition equals the naive product, ones column dropped") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> entry(-2, 2);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n_cond = 3 + trial % 4;
    const auto d = random_design(rng, n_cond, n_cond + 3 + trial % 9);
    const auto xs = build_comparison_matrix(d);
    for (Index r = 0; r < xs.values.rows(); ++r) REQUIRE(xs.values.row(r).sum() == 0.0);

    const int k = std::min(n_cond, 1 + trial % 4);
    MatrixXd basis(n_cond, k);
    basis.col(0).setOnes();
    for (int j = 1; j < k; ++j) {
      for (int i = 0; i < n_cond; ++i) basis(i, j) = 0.5 * entry(rng);
    }
    std::vector<CoefficientConstraint> cons(static_cast<std::size_t>(k), CoefficientConstraint::positive_above());
    cons[0] = CoefficientConstraint::free();
    if (k == 1) continue;
    const auto p = make_profile(d.conditions, basis, cons);
    ModelMatrix model;
    try {
      model = compose_model_matrix(xs, p);
    } catch (const ValidationError&) {
      continue;
    }
    ++checked;
    CHECK(std::find(model.dropped.begin(), model.dropped.end(), 0) != model.dropped.end());
    const MatrixXd full = oracle::naive_product(xs.values, basis);
    for (std::size_t c = 0; c < model.retained.size(); ++c) {
      CHECK(model.x.col(static_cast<Index>(c)).isApprox(full.col(model.retained[c]), 1e-15));
    }
    CHECK(oracle::gauss_rank(model.x) == model.x.cols());
  }
  CHECK(checked > 50);
}

TEST_CASE("property: permuting arrays permutes rows and leaves estimates unchanged") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto d = fixtures::stem_cell_design();
  const auto model = compose_model_matrix(build_comparison_matrix(d), fixtures::pluripotent());
  VectorXd y(20);
  for (Index i = 0; i < 20; ++i) y(i) = noise(rng);
  const auto fit = fit_gene(y, model);

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> perm(d.arrays.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ComparisonDesign shuffled{d.conditions, {}};
    VectorXd y_perm(20);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled.arrays.push_back(d.arrays[perm[i]]);
      y_perm(static_cast<Index>(i)) = y(static_cast<Index>(perm[i]));
    }
    const auto m2 = compose_model_matrix(build_comparison_matrix(shuffled), fixtures::pluripotent());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      CHECK(m2.x.row(static_cast<Index>(i)) == model.x.row(static_cast<Index>(perm[i])));
    }
    const auto f2 = fit_gene(y_perm, m2);
    CHECK(f2.gamma_hat.isApprox(fit.gamma_hat, 1e-12));
    CHECK(f2.s2 == doctest::Approx(fit.s2).epsilon(1e-12));
  }
}
