#include "geneprofile/design.hpp"

#include <algorithm>
#include <set>

#include "geneprofile/error.hpp"
#include "geneprofile/profile.hpp"

namespace geneprofile {

Index ComparisonDesign::condition_index(const std::string& label) const {
  const auto it = std::find(conditions.begin(), conditions.end(), label);
  return it == conditions.end() ? -1 : static_cast<Index>(it - conditions.begin());
}

Index ModelMatrix::column_of(Index coefficient) const {
  const auto it = std::find(retained.begin(), retained.end(), coefficient);
  return it == retained.end() ? -1 : static_cast<Index>(it - retained.begin());
}

void validate_design(const ComparisonDesign& design) {
  if (design.conditions.empty()) throw ValidationError("design has no conditions");
  std::set<std::string> seen_conditions;
  for (const auto& c : design.conditions) {
    if (!seen_conditions.insert(c).second) {
      throw ValidationError("duplicate condition label '" + c + "'");
    }
  }
  if (design.arrays.empty()) throw ValidationError("design has no arrays");

  std::set<std::string> seen_ids;
  for (const auto& a : design.arrays) {
    if (!seen_ids.insert(a.array_id).second) {
      throw ValidationError("duplicate array id '" + a.array_id + "'");
    }
    for (const auto* label : {&a.cy3, &a.cy5}) {
      if (!seen_conditions.count(*label)) {
        throw ValidationError("array '" + a.array_id + "' uses unknown condition '" + *label + "'");
      }
    }
    if (a.cy3 == a.cy5) {
      throw ValidationError("array '" + a.array_id + "' compares condition '" + a.cy3 +
                            "' with itself");
    }
  }
}

ComparisonMatrix build_comparison_matrix(const ComparisonDesign& design) {
  validate_design(design);
  ComparisonMatrix out;
  out.conditions = design.conditions;
  out.values = MatrixXd::Zero(static_cast<Index>(design.arrays.size()),
                              static_cast<Index>(design.conditions.size()));
  for (Index r = 0; r < out.values.rows(); ++r) {
    const auto& a = design.arrays[static_cast<std::size_t>(r)];
    out.array_ids.push_back(a.array_id);
    out.values(r, design.condition_index(a.cy5)) = 1.0;
    out.values(r, design.condition_index(a.cy3)) = -1.0;
  }
  return out;
}

ModelMatrix compose_model_matrix(const ComparisonMatrix& xstar, const ProfileSpec& profile) {
  const MatrixXd basis = profile.basis_matrix();
  if (basis.rows() != static_cast<Index>(xstar.conditions.size())) {
    throw ValidationError("profile '" + profile.name + "' has " + std::to_string(basis.rows()) +
                          " conditions but the design has " +
                          std::to_string(xstar.conditions.size()));
  }
  if (static_cast<Index>(profile.constraints.size()) != basis.cols()) {
    throw ValidationError("profile '" + profile.name + "' has " +
                          std::to_string(profile.constraints.size()) + " constraints for " +
                          std::to_string(basis.cols()) + " coefficients");
  }

  // Reorder basis rows into the design's condition order.
  MatrixXd aligned(basis.rows(), basis.cols());
  for (std::size_t c = 0; c < xstar.conditions.size(); ++c) {
    const auto it =
        std::find(profile.conditions.begin(), profile.conditions.end(), xstar.conditions[c]);
    if (it == profile.conditions.end()) {
      throw ValidationError("profile '" + profile.name + "' has no condition '" +
                            xstar.conditions[c] + "'");
    }
    aligned.row(static_cast<Index>(c)) = basis.row(it - profile.conditions.begin());
  }

  const MatrixXd full = xstar.values * aligned;

  ModelMatrix out;
  out.n_coefficients = full.cols();
  out.array_ids = xstar.array_ids;
  for (Index j = 0; j < full.cols(); ++j) {
    // Exact test: X* is 0/+-1 and B holds the user's decimals.
    if ((full.col(j).array() == 0.0).all()) {
      const auto& constraint = profile.constraints[static_cast<std::size_t>(j)];
      if (constraint.test_bearing()) {
        throw ValidationError("constrained coefficient unestimable: coefficient '" +
                              profile.coefficient_names[static_cast<std::size_t>(j)] +
                              "' has an all-zero design column");
      }
      out.dropped.push_back(j);
    } else {
      out.retained.push_back(j);
    }
  }

  out.x.resize(full.rows(), static_cast<Index>(out.retained.size()));
  for (std::size_t c = 0; c < out.retained.size(); ++c) {
    out.x.col(static_cast<Index>(c)) = full.col(out.retained[c]);
  }
  out.rank = numerical_rank(out.x);
  if (out.rank < out.x.cols()) {
    throw ValidationError("profile not identifiable under this design: model matrix rank " +
                          std::to_string(out.rank) + " < " + std::to_string(out.x.cols()) +
                          " coefficients");
  }
  out.residual_df = out.x.rows() - out.rank;
  if (out.residual_df < 1) {
    throw ValidationError("profile not identifiable under this design: no residual degrees of "
                          "freedom (" + std::to_string(out.x.rows()) + " arrays, " +
                          std::to_string(out.rank) + " coefficients)");
  }
  return out;
}

}  // namespace geneprofile
