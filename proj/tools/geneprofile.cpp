// Command-line front end: rank, sensitivity, synth and validate.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geneprofile/error.hpp"
#include "geneprofile/pipeline.hpp"

namespace gp = geneprofile;

namespace {

struct InputFlags {
  std::string data, design, conditions, profile;
  double epsilon = 0.0;
  std::vector<std::string> deltas;
};

void add_model_flags(CLI::App* cmd, InputFlags& f, bool need_data) {
  auto* data = cmd->add_option("--data", f.data, "Expression CSV (gene_id,<array ids>)");
  if (need_data) data->required();
  cmd->add_option("--design", f.design, "Design CSV (array_id,cy3,cy5,replicate_group)")->required();
  cmd->add_option("--conditions", f.conditions, "Ordered condition labels, one per line")->required();
  cmd->add_option("--profile", f.profile, "Profile file")->required();
  cmd->add_option("--epsilon", f.epsilon, "Override every equivalence margin");
  cmd->add_option("--delta", f.deltas, "Positivity threshold override <coef>=<value> (repeatable)");
}

gp::RunConfig to_config(const CLI::App* cmd, const InputFlags& f) {
  gp::RunConfig c;
  c.data_path = f.data;
  c.design_path = f.design;
  c.conditions_path = f.conditions;
  c.profile_path = f.profile;
  if (cmd->count("--epsilon")) c.epsilon_override = f.epsilon;
  for (const auto& d : f.deltas) c.delta_overrides.push_back(gp::parse_delta(d));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank genes of a two-colour time-course experiment against a pre-specified profile"};
  app.require_subcommand(1);

  InputFlags rank_in, sens_in, val_in, synth_in;
  double alpha = 0.05;
  std::string grid, sens_grid = "0.5,1,1.5,2";
  std::size_t top_n = 15;
  std::string rank_out = ".", sens_out = ".", synth_out = ".";
  unsigned rank_threads = 1, sens_threads = 1;

  auto* rank = app.add_subcommand("rank", "Fit, moderate, rank and plot");
  add_model_flags(rank, rank_in, true);
  rank->add_option("--alpha", alpha, "Level of the intersection-union decision")->capture_default_str();
  rank->add_option("--grid", grid, "Also write sensitivity.csv for these margins, e.g. 0.5,1,1.5,2");
  rank->add_option("--top-n", top_n, "Genes drawn in profiles.svg")->capture_default_str();
  rank->add_option("--out", rank_out, "Output directory")->capture_default_str();
  rank->add_option("--threads", rank_threads, "Worker threads")->capture_default_str();

  auto* sens = app.add_subcommand("sensitivity", "Rank under a grid of equivalence margins");
  add_model_flags(sens, sens_in, true);
  sens->add_option("--grid", sens_grid, "Equivalence margins")->capture_default_str();
  sens->add_option("--out", sens_out, "Output directory")->capture_default_str();
  sens->add_option("--threads", sens_threads, "Worker threads")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Parse and validate inputs only");
  add_model_flags(validate, val_in, false);

  gp::SynthOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Simulate a benchmark with planted profile genes");
  add_model_flags(synth, synth_in, false);
  synth->add_option("--n-genes", synth_opts.n_genes, "Number of genes")->capture_default_str();
  synth->add_option("--n-planted", synth_opts.n_planted, "Genes matching the profile")->capture_default_str();
  synth->add_option("--margin-lo", synth_opts.margin_lo, "Lower planted margin above delta")->capture_default_str();
  synth->add_option("--margin-hi", synth_opts.margin_hi, "Upper planted margin above delta")->capture_default_str();
  synth->add_option("--equiv-fraction", synth_opts.equivalence_fraction,
                    "Planted |gamma| bound as a fraction of epsilon")->capture_default_str();
  synth->add_option("--d0", synth_opts.d0, "Prior degrees of freedom")->capture_default_str();
  synth->add_option("--s0-2", synth_opts.s0_2, "Prior variance")->capture_default_str();
  synth->add_flag("!--no-anchor", synth_opts.anchor, "Do not plant a strongest anchor gene");
  synth->add_option("--seed", synth_opts.seed, "Random seed")->required();
  synth->add_option("--out", synth_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*rank) {
      auto c = to_config(rank, rank_in);
      c.alpha = alpha;
      if (!grid.empty()) c.sensitivity_grid = gp::parse_grid(grid);
      c.top_n = top_n;
      c.out_dir = rank_out;
      c.threads = rank_threads;
      gp::run_rank(c, std::cerr);
    } else if (*sens) {
      auto c = to_config(sens, sens_in);
      c.sensitivity_grid = gp::parse_grid(sens_grid);
      c.out_dir = sens_out;
      c.threads = sens_threads;
      gp::run_sensitivity(c, std::cerr);
    } else if (*validate) {
      gp::run_validate(to_config(validate, val_in), std::cout);
    } else if (*synth) {
      const auto rc = to_config(synth, synth_in);
      gp::SynthConfig c;
      c.design_path = rc.design_path;
      c.conditions_path = rc.conditions_path;
      c.profile_path = rc.profile_path;
      c.epsilon_override = rc.epsilon_override;
      c.delta_overrides = rc.delta_overrides;
      c.options = synth_opts;
      c.out_dir = synth_out;
      gp::run_synth(c, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gp::exit_code_for(e);
  }
  return 0;
}
