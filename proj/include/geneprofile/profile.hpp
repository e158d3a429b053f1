#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "geneprofile/linalg.hpp"

namespace geneprofile {

enum class ConstraintKind { Unconstrained, PositiveAbove, EquivalentZero };

/// What a coefficient must satisfy for a gene to match the profile. The
/// margin is delta (PositiveAbove) or epsilon (EquivalentZero), in log2-ratio
/// units.
struct CoefficientConstraint {
  ConstraintKind kind = ConstraintKind::Unconstrained;
  double margin = 0.0;

  static CoefficientConstraint free() { return {}; }
  static CoefficientConstraint positive_above(double delta = 0.0) {
    return {ConstraintKind::PositiveAbove, delta};
  }
  static CoefficientConstraint equivalent_zero(double epsilon) {
    return {ConstraintKind::EquivalentZero, epsilon};
  }

  [[nodiscard]] bool test_bearing() const { return kind != ConstraintKind::Unconstrained; }

  friend bool operator==(const CoefficientConstraint&, const CoefficientConstraint&) = default;
};

/// A basis entry kept as the decimal text it was written with, plus its
/// binary value.
struct Decimal {
  std::string text;
  double value = 0.0;

  /// Throws ValidationError on anything but a plain decimal literal.
  static Decimal parse(std::string_view text);
  static Decimal from_double(double value);

  friend bool operator==(const Decimal& a, const Decimal& b) { return a.text == b.text; }
};

/// A pre-specified expression profile: mu = B gamma over the conditions, one
/// constraint per coefficient.
struct ProfileSpec {
  std::string name;
  std::vector<std::string> conditions;
  std::vector<std::string> coefficient_names;
  std::vector<std::vector<Decimal>> columns;  // one basis column per coefficient
  std::vector<CoefficientConstraint> constraints;

  /// conditions x coefficients; throws ValidationError on ragged columns.
  [[nodiscard]] MatrixXd basis_matrix() const;
  [[nodiscard]] Index coefficient_index(std::string_view name) const;

  friend bool operator==(const ProfileSpec&, const ProfileSpec&) = default;
};

/// A profile whose basis has been certified linearly independent.
class ValidatedProfile {
 public:
  [[nodiscard]] const ProfileSpec& spec() const { return spec_; }
  [[nodiscard]] const MatrixXd& basis() const { return basis_; }
  [[nodiscard]] const std::string& name() const { return spec_.name; }
  [[nodiscard]] Index n_coefficients() const { return basis_.cols(); }
  /// Indices of the coefficients that carry a positivity or equivalence test.
  [[nodiscard]] const std::vector<Index>& test_bearing() const { return test_bearing_; }
  /// Singular values of the basis, the independence certificate.
  [[nodiscard]] const VectorXd& singular_values() const { return singular_values_; }
  [[nodiscard]] const CoefficientConstraint& constraint(Index j) const {
    return spec_.constraints[static_cast<std::size_t>(j)];
  }

  /// Same basis with every equivalence margin replaced by `epsilon`.
  [[nodiscard]] ValidatedProfile with_equivalence_margin(double epsilon) const;

 private:
  friend ValidatedProfile validate_profile(ProfileSpec spec);
  ValidatedProfile() = default;

  ProfileSpec spec_;
  MatrixXd basis_;
  std::vector<Index> test_bearing_;
  VectorXd singular_values_;
};

/// Throws ValidationError for dependent columns, a constraint-count mismatch,
/// non-positive epsilon, negative delta, or a profile with nothing to test.
ValidatedProfile validate_profile(ProfileSpec spec);

/// Replace every EquivalentZero margin.
ProfileSpec with_epsilon(ProfileSpec spec, double epsilon);
/// Replace the threshold of one PositiveAbove coefficient, addressed by name
/// or by numeric index.
ProfileSpec with_delta(ProfileSpec spec, std::string_view coefficient, double delta);

ProfileSpec parse_profile(std::string_view text, const std::string& source = "<profile>");
std::string format_profile(const ProfileSpec& spec);
ProfileSpec profile_from_file(const std::filesystem::path& path);
void profile_to_file(const ProfileSpec& spec, const std::filesystem::path& path);

std::string format_constraint(const CoefficientConstraint& c);

}  // namespace geneprofile
