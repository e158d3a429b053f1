#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "geneprofile/design.hpp"
#include "geneprofile/fit.hpp"
#include "geneprofile/rank.hpp"

namespace geneprofile {

/// Ordered condition labels, one per line. A first line reading `condition`
/// is taken as a header.
std::vector<std::string> read_conditions(const std::filesystem::path& path);

/// Array records from a CSV with header `array_id,cy3,cy5,replicate_group`.
std::vector<ArrayRecord> read_arrays(const std::filesystem::path& path);

/// Reads and validates both design files.
ComparisonDesign read_design(const std::filesystem::path& design_csv,
                             const std::filesystem::path& conditions_csv);

/// Expression CSV: `gene_id,<array ids...>`, `NA` or empty for missing.
/// Syntax problems raise DataError with file and line.
ExpressionMatrix read_expression(const std::filesystem::path& path);
ExpressionMatrix parse_expression(std::istream& in, const std::string& source);

void write_conditions(const ComparisonDesign& design, std::ostream& out);
void write_arrays(const ComparisonDesign& design, std::ostream& out);
void write_expression(const ExpressionMatrix& expr, std::ostream& out);

/// Six significant digits; NA for NaN.
std::string format_number(double v);

void write_ranked_csv(const RankedTable& table, std::ostream& out);
void write_excluded_csv(const RankedTable& table, std::ostream& out);
void write_sensitivity_csv(const SensitivityResult& result, std::ostream& out);

struct RunSummary {
  double alpha = 0.05;
  std::size_t n_genes = 0;
  std::size_t n_included = 0;
  std::size_t n_iut_significant = 0;
  std::size_t n_zero_variance = 0;
};

/// Prior estimate and run summary as JSON, doubles at full precision.
std::string moderation_json(const ModerationResult& moderation, const RankMetadata& metadata,
                            const RunSummary& summary);

}  // namespace geneprofile
