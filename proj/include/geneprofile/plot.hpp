#pragma once

#include <span>
#include <string>
#include <vector>

#include "geneprofile/design.hpp"
#include "geneprofile/fit.hpp"
#include "geneprofile/profile.hpp"

namespace geneprofile {

/// Fitted log ratios of one gene relative to the first profile condition.
struct FittedProfilePlot {
  std::string gene_id;
  std::size_t rank = 0;
  VectorXd values;  // values(0) == 0
};

/// mu = B gamma with dropped coefficients set to zero, minus mu(0).
VectorXd fitted_relative_profile(const GeneFit& fit, const ValidatedProfile& profile,
                                 const ModelMatrix& model);

/// One polyline per entry on shared axes.
std::string render_profiles_svg(std::span<const FittedProfilePlot> profiles,
                                std::span<const std::string> conditions, const std::string& title);

}  // namespace geneprofile
