#include <doctest.h>

#include <set>
#include <sstream>

#include "geneprofile/error.hpp"
#include "geneprofile/io.hpp"
#include "geneprofile/pipeline.hpp"
#include "geneprofile/synth.hpp"
#include "oracles.hpp"

using namespace geneprofile;

namespace {

ModelMatrix model_for(const ProfileSpec& p) {
  return compose_model_matrix(build_comparison_matrix(fixtures::stem_cell_design()), p);
}

std::string dump(const SynthData& d) {
  std::ostringstream out;
  write_expression(d.expression, out);
  write_truth_csv(d, out);
  return out.str();
}

}  // namespace

TEST_CASE("fixed seed is reproducible, different seeds differ") {
  const auto profile = validate_profile(fixtures::pluripotent());
  const auto model = model_for(profile.spec());
  SynthOptions o;
  o.n_genes = 500;
  o.seed = 99;
  const auto a = dump(synthesize(model, profile, o));
  CHECK(a == dump(synthesize(model, profile, o)));
  o.seed = 100;
  CHECK(a != dump(synthesize(model, profile, o)));
}

TEST_CASE("no planted genes") {
  const auto profile = validate_profile(fixtures::pluripotent());
  SynthOptions o;
  o.n_genes = 200;
  o.n_planted = 0;
  const auto d = synthesize(model_for(profile.spec()), profile, o);
  for (const auto& t : d.truth) CHECK(t.role == SynthRole::Background);
  std::ostringstream out;
  write_truth_csv(d, out);
  CHECK(out.str().find("planted") == std::string::npos);
  CHECK(out.str().find("anchor") == std::string::npos);
}

TEST_CASE("true coefficients satisfy or violate the profile by role") {
  for (const auto& spec : {fixtures::pluripotent(), fixtures::pluripotent(1.0, 1.5), fixtures::sox2(0.5)}) {
    const auto profile = validate_profile(spec);
    SynthOptions o;
    o.n_genes = 3000;
    o.n_planted = 40;
    o.seed = 5;
    const auto d = synthesize(model_for(spec), profile, o);
    std::size_t planted = 0, anchors = 0;
    std::set<std::string> ids;
    for (const auto& t : d.truth) {
      ids.insert(t.gene_id);
      bool satisfies = true;
      for (const auto j : profile.test_bearing()) {
        const auto& c = profile.constraint(j);
        satisfies = satisfies && (c.kind == ConstraintKind::PositiveAbove ? t.gamma(j) > c.margin
                                                                          : std::abs(t.gamma(j)) < c.margin);
      }
      CHECK(satisfies == (t.role != SynthRole::Background));
      CHECK(t.sigma2 > 0.0);
      planted += t.role == SynthRole::Planted ? 1 : 0;
      anchors += t.role == SynthRole::Anchor ? 1 : 0;
    }
    CHECK(planted == 39);
    CHECK(anchors == 1);
    CHECK(ids.size() == 3000);
    CHECK(d.truth.front().gene_id == "gene00001");
  }
}

TEST_CASE("residual variance is unbiased for the simulated sigma2") {
  const auto profile = validate_profile(fixtures::pluripotent());
  const auto model = model_for(profile.spec());
  SynthOptions o;
  o.n_genes = 4000;
  o.seed = 17;
  const auto d = synthesize(model, profile, o);
  const auto fits = fit_all(d.expression, model);
  // mean of s2 / sigma2 is 1 for unbiased residual variance
  double ratio = 0.0;
  for (std::size_t g = 0; g < fits.size(); ++g) ratio += fits[g].s2 / d.truth[g].sigma2;
  CHECK(ratio / static_cast<double>(fits.size()) == doctest::Approx(1.0).epsilon(0.03));
  const auto m = moderate_variances(fits);
  CHECK(m.d0 == doctest::Approx(4.0).epsilon(0.25));
  CHECK(m.s0_2 == doctest::Approx(0.05).epsilon(0.08));
}

TEST_CASE("planted genes are recovered and the anchor ranks first") {
  const auto profile = validate_profile(fixtures::pluripotent());
  const auto model = model_for(profile.spec());
  SynthOptions o;  // 20,000 genes, 20 planted
  o.seed = 2024;
  const auto d = synthesize(model, profile, o);
  const auto a = analyze(d.expression, fixtures::stem_cell_design(), profile, 4);
  std::set<std::string> included;
  for (const auto& r : a.table.ranked) included.insert(r.stats.gene_id);
  std::size_t found = 0;
  std::string anchor;
  for (const auto& t : d.truth) {
    if (t.role == SynthRole::Background) continue;
    found += included.contains(t.gene_id) ? 1 : 0;
    if (t.role == SynthRole::Anchor) anchor = t.gene_id;
  }
  CHECK(found >= 18);
  CHECK(a.table.ranked.front().stats.gene_id == anchor);
}

TEST_CASE("invalid options") {
  const auto profile = validate_profile(fixtures::pluripotent());
  const auto model = model_for(profile.spec());
  SynthOptions o;
  o.n_genes = 10;
  o.n_planted = 11;
  CHECK_THROWS_AS(synthesize(model, profile, o), ValidationError);
  o = SynthOptions{};
  o.margin_lo = 2;
  o.margin_hi = 1;
  CHECK_THROWS_AS(synthesize(model, profile, o), ValidationError);
  o = SynthOptions{};
  o.equivalence_fraction = 1.0;
  CHECK_THROWS_AS(synthesize(model, profile, o), ValidationError);
  o = SynthOptions{};
  o.n_genes = 0;
  CHECK_THROWS_AS(synthesize(model, profile, o), ValidationError);
}
