#include "geneprofile/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "geneprofile/error.hpp"
#include "geneprofile/io.hpp"

namespace geneprofile {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  return out;
}

void prepare_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string eps_label(double e) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", e);
  return buf;
}

double parse_number(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ValidationError("bad " + what + " '" + std::string(s) + "'");
  }
  return v;
}

RunSummary summarize(const Analysis& a, double alpha) {
  RunSummary s;
  s.alpha = alpha;
  s.n_genes = a.fits.size();
  s.n_included = a.table.ranked.size();
  for (const auto& f : a.fits) s.n_zero_variance += f.zero_variance() ? 1 : 0;
  for (const auto& r : a.table.ranked) {
    s.n_iut_significant += iut_decision(r.stats, r.stats.posterior_df, alpha) ? 1 : 0;
  }
  return s;
}

Analysis analyze_config(const RunConfig& config, unsigned threads) {
  const auto design = read_design(config.design_path, config.conditions_path);
  const auto profile = load_profile(config);
  const auto expr = read_expression(config.data_path);
  return analyze(expr, design, profile, threads);
}

}  // namespace

Analysis analyze(const ExpressionMatrix& expr, const ComparisonDesign& design,
                 const ValidatedProfile& profile, unsigned threads) {
  auto model = compose_model_matrix(build_comparison_matrix(design), profile.spec());
  auto aligned = align_to_model(expr, model);
  auto fits = fit_all(aligned, model, threads);
  auto moderation = moderate_variances(fits);
  auto table = rank_genes(
      u_statistics_all(aligned.gene_ids, fits, moderation, profile, model, threads));
  table.metadata = make_metadata(profile, model, moderation);
  return Analysis{design,          std::move(model), profile,         std::move(aligned),
                  std::move(fits), std::move(moderation), std::move(table)};
}

SensitivityResult sensitivity_sweep(const ExpressionMatrix& expr, const ComparisonDesign& design,
                                    const ValidatedProfile& profile,
                                    std::span<const double> epsilons, unsigned threads) {
  if (epsilons.empty()) throw ValidationError("sensitivity grid is empty");
  const auto model = compose_model_matrix(build_comparison_matrix(design), profile.spec());
  const auto aligned = align_to_model(expr, model);
  const auto fits = fit_all(aligned, model, threads);
  const auto moderation = moderate_variances(fits);
  return sensitivity_sweep(aligned.gene_ids, fits, moderation, profile, model, epsilons, threads);
}

std::vector<FittedProfilePlot> top_profiles(const Analysis& analysis, std::size_t top_n) {
  std::vector<FittedProfilePlot> out;
  std::map<std::string, std::size_t> row;
  for (std::size_t g = 0; g < analysis.expression.gene_ids.size(); ++g) {
    row.emplace(analysis.expression.gene_ids[g], g);
  }
  for (const auto& r : analysis.table.ranked) {
    if (out.size() >= top_n) break;
    const auto& fit = analysis.fits[row.at(r.stats.gene_id)];
    out.push_back({r.stats.gene_id, r.rank,
                   fitted_relative_profile(fit, analysis.profile, analysis.model)});
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    const auto piece = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    const double v = parse_number(piece, "grid value");
    if (!(v > 0.0)) throw ValidationError("grid values must be > 0, got '" + piece + "'");
    out.push_back(v);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (out.empty()) throw ValidationError("empty grid");
  return out;
}

std::pair<std::string, double> parse_delta(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("bad --delta '" + text + "', expected <coef>=<value>");
  }
  return {text.substr(0, eq), parse_number(std::string_view(text).substr(eq + 1), "delta")};
}

ValidatedProfile load_profile(const RunConfig& config) {
  auto spec = profile_from_file(config.profile_path);
  if (config.epsilon_override) {
    if (!(*config.epsilon_override > 0.0)) throw ValidationError("--epsilon must be > 0");
    spec = with_epsilon(std::move(spec), *config.epsilon_override);
  }
  for (const auto& [coef, delta] : config.delta_overrides) {
    spec = with_delta(std::move(spec), coef, delta);
  }
  return validate_profile(std::move(spec));
}

void run_rank(const RunConfig& config, std::ostream& log) {
  if (config.top_n < 1) throw ValidationError("--top-n must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 0.5)) throw ValidationError("--alpha must lie in (0, 0.5)");
  const auto analysis = analyze_config(config, config.threads);
  prepare_out_dir(config.out_dir);

  {
    auto out = open_output(config.out_dir / "ranked.csv");
    write_ranked_csv(analysis.table, out);
  }
  {
    auto out = open_output(config.out_dir / "excluded.csv");
    write_excluded_csv(analysis.table, out);
  }
  {
    auto out = open_output(config.out_dir / "moderation.json");
    out << moderation_json(analysis.moderation, analysis.table.metadata,
                           summarize(analysis, config.alpha));
  }
  {
    const auto plots = top_profiles(analysis, config.top_n);
    auto out = open_output(config.out_dir / "profiles.svg");
    out << render_profiles_svg(plots, analysis.profile.spec().conditions,
                               "Top " + std::to_string(plots.size()) + " genes, profile '" +
                                   analysis.profile.name() + "'");
  }
  if (!config.sensitivity_grid.empty()) {
    const auto sweep = sensitivity_sweep(analysis.expression.gene_ids, analysis.fits,
                                         analysis.moderation, analysis.profile, analysis.model,
                                         config.sensitivity_grid, config.threads);
    auto out = open_output(config.out_dir / "sensitivity.csv");
    write_sensitivity_csv(sweep, out);
  }
  log << "ranked " << analysis.table.ranked.size() << " of " << analysis.fits.size()
      << " genes; wrote " << (config.out_dir / "ranked.csv").string() << '\n';
}

void run_sensitivity(const RunConfig& config, std::ostream& log) {
  if (config.sensitivity_grid.empty()) throw ValidationError("sensitivity needs --grid");
  const auto analysis = analyze_config(config, config.threads);
  prepare_out_dir(config.out_dir);
  const auto sweep = sensitivity_sweep(analysis.expression.gene_ids, analysis.fits,
                                       analysis.moderation, analysis.profile, analysis.model,
                                       config.sensitivity_grid, config.threads);
  {
    auto out = open_output(config.out_dir / "sensitivity.csv");
    write_sensitivity_csv(sweep, out);
  }
  for (std::size_t e = 0; e < sweep.epsilons.size(); ++e) {
    auto out = open_output(config.out_dir / ("ranked_eps_" + eps_label(sweep.epsilons[e]) + ".csv"));
    write_ranked_csv(sweep.tables[e], out);
    log << "epsilon " << eps_label(sweep.epsilons[e]) << ": " << sweep.tables[e].ranked.size()
        << " genes included\n";
  }
}

void run_validate(const RunConfig& config, std::ostream& log) {
  const auto design = read_design(config.design_path, config.conditions_path);
  const auto profile = load_profile(config);
  const auto model = compose_model_matrix(build_comparison_matrix(design), profile.spec());
  log << "design: " << design.arrays.size() << " arrays, " << design.conditions.size()
      << " conditions\n";
  log << "profile '" << profile.name() << "': " << profile.n_coefficients() << " coefficients, "
      << profile.test_bearing().size() << " tested\n";
  log << "model matrix: " << model.x.rows() << " x " << model.x.cols() << ", rank " << model.rank
      << ", residual df " << model.residual_df;
  if (!model.dropped.empty()) {
    log << ", dropped";
    for (const auto j : model.dropped) log << ' ' << profile.spec().coefficient_names[static_cast<std::size_t>(j)];
  }
  log << '\n';
  if (!config.data_path.empty()) {
    const auto aligned = align_to_model(read_expression(config.data_path), model);
    std::size_t missing = 0;
    for (Index g = 0; g < aligned.values.rows(); ++g) {
      for (Index c = 0; c < aligned.values.cols(); ++c) missing += std::isnan(aligned.values(g, c)) ? 1 : 0;
    }
    log << "expression: " << aligned.gene_ids.size() << " genes, " << missing << " missing values\n";
  }
}

void run_synth(const SynthConfig& config, std::ostream& log) {
  const auto design = read_design(config.design_path, config.conditions_path);
  RunConfig rc;
  rc.profile_path = config.profile_path;
  rc.epsilon_override = config.epsilon_override;
  rc.delta_overrides = config.delta_overrides;
  const auto profile = load_profile(rc);
  const auto model = compose_model_matrix(build_comparison_matrix(design), profile.spec());
  const auto data = synthesize(model, profile, config.options);
  prepare_out_dir(config.out_dir);
  {
    auto out = open_output(config.out_dir / "expression.csv");
    write_expression(data.expression, out);
  }
  {
    auto out = open_output(config.out_dir / "truth.csv");
    write_truth_csv(data, out);
  }
  log << "wrote " << data.truth.size() << " genes (" << config.options.n_planted << " planted) to "
      << config.out_dir.string() << '\n';
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  return 1;
}

}  // namespace geneprofile
