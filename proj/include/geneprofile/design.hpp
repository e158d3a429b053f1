#pragma once

#include <string>
#include <vector>

#include "geneprofile/linalg.hpp"

namespace geneprofile {

struct ProfileSpec;

/// One two-colour array: log ratio is cy5 over cy3.
struct ArrayRecord {
  std::string array_id;
  std::string cy3;
  std::string cy5;
  std::string replicate_group;  // metadata only, e.g. passage

  friend bool operator==(const ArrayRecord&, const ArrayRecord&) = default;
};

struct ComparisonDesign {
  std::vector<std::string> conditions;
  std::vector<ArrayRecord> arrays;

  [[nodiscard]] Index condition_index(const std::string& label) const;
};

/// Throws ValidationError unless every label is known, cy3 != cy5, array ids
/// are unique and there is at least one array.
void validate_design(const ComparisonDesign& design);

/// Arrays x conditions, +1 at the cy5 condition and -1 at cy3.
struct ComparisonMatrix {
  std::vector<std::string> conditions;
  std::vector<std::string> array_ids;
  MatrixXd values;
};

struct ModelMatrix {
  MatrixXd x;                          // arrays x retained coefficients
  std::vector<Index> retained;         // profile coefficient index of each column of x
  std::vector<Index> dropped;          // unconstrained coefficients with a zero column
  Index n_coefficients = 0;            // basis columns before dropping
  Index rank = 0;
  Index residual_df = 0;
  std::vector<std::string> array_ids;

  /// Column of x holding profile coefficient `coefficient`, or -1 if dropped.
  [[nodiscard]] Index column_of(Index coefficient) const;
};

ComparisonMatrix build_comparison_matrix(const ComparisonDesign& design);

/// X = X* B with unestimable unconstrained coefficients removed. Profile rows
/// are matched to design columns by condition label.
ModelMatrix compose_model_matrix(const ComparisonMatrix& xstar, const ProfileSpec& profile);

}  // namespace geneprofile
