#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geneprofile/design.hpp"
#include "geneprofile/fit.hpp"
#include "geneprofile/plot.hpp"
#include "geneprofile/profile.hpp"
#include "geneprofile/rank.hpp"
#include "geneprofile/synth.hpp"

namespace geneprofile {

/// Everything computed for one expression matrix under one profile.
struct Analysis {
  ComparisonDesign design;
  ModelMatrix model;
  ValidatedProfile profile;
  ExpressionMatrix expression;  // columns in design order
  std::vector<GeneFit> fits;
  ModerationResult moderation;
  RankedTable table;
};

Analysis analyze(const ExpressionMatrix& expr, const ComparisonDesign& design,
                 const ValidatedProfile& profile, unsigned threads = 1);

/// Fits once, then ranks under each equivalence margin in `epsilons`.
SensitivityResult sensitivity_sweep(const ExpressionMatrix& expr, const ComparisonDesign& design,
                                    const ValidatedProfile& profile,
                                    std::span<const double> epsilons, unsigned threads = 1);

/// Relative fitted profiles of the first `top_n` ranked genes.
std::vector<FittedProfilePlot> top_profiles(const Analysis& analysis, std::size_t top_n);

struct RunConfig {
  std::filesystem::path data_path;
  std::filesystem::path design_path;
  std::filesystem::path conditions_path;
  std::filesystem::path profile_path;
  std::optional<double> epsilon_override;
  std::vector<std::pair<std::string, double>> delta_overrides;
  double alpha = 0.05;
  std::vector<double> sensitivity_grid;
  std::size_t top_n = 15;
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
};

/// Parses a comma-separated list of positive numbers such as "0.5,1,1.5,2".
std::vector<double> parse_grid(const std::string& text);
/// Parses "<coef>=<value>".
std::pair<std::string, double> parse_delta(const std::string& text);

/// Reads the profile and applies the epsilon/delta overrides.
ValidatedProfile load_profile(const RunConfig& config);

/// rank subcommand: ranked.csv, excluded.csv, moderation.json, profiles.svg,
/// and sensitivity.csv when a grid is given.
void run_rank(const RunConfig& config, std::ostream& log);
/// sensitivity subcommand: sensitivity.csv plus ranked_eps_<v>.csv per margin.
void run_sensitivity(const RunConfig& config, std::ostream& log);
/// validate subcommand: parses inputs and reports the model shape.
void run_validate(const RunConfig& config, std::ostream& log);

struct SynthConfig {
  std::filesystem::path design_path;
  std::filesystem::path conditions_path;
  std::filesystem::path profile_path;
  std::optional<double> epsilon_override;
  std::vector<std::pair<std::string, double>> delta_overrides;
  SynthOptions options;
  std::filesystem::path out_dir = ".";
};

/// synth subcommand: expression.csv and truth.csv.
void run_synth(const SynthConfig& config, std::ostream& log);

/// 2 for ValidationError, 3 for DataError, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace geneprofile
