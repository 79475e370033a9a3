#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "../src/cli_commands.hpp"
#include "psp/csv.hpp"

// psp: selective classification with group-wise false decision rate control.
//
// Subcommands:
//   simulate   replicated Gaussian-mixture experiments with summary tables
//   decide     run the p-value pipeline on user-supplied score files
//   edecide    run the e-value pipeline on user-supplied score files
//   select     subject selection with FDR control over a label region
//   infosets   informative prediction sets of bounded size with FCR control
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

namespace {

int run(int argc, char** argv) {
  CLI::App app{"selective classification with group-wise error rate control"};
  app.require_subcommand(1);

  psp::cli::SimulateConfig sim;
  std::string sim_alphas = "0.05,0.1,0.15,0.2";
  CLI::App* simulate = app.add_subcommand("simulate", "run a replicated synthetic experiment");
  simulate->add_option("--preset", sim.preset, "partition preset: overall|classwise");
  simulate->add_option("--K", sim.K, "number of classes");
  simulate->add_option("--d", sim.d, "feature dimension");
  simulate->add_option("--n0", sim.n0, "per-class size unit (m=n=n_train=K*n0)");
  simulate->add_option("--alphas", sim_alphas, "comma-separated target error levels");
  simulate->add_option("--reps", sim.reps, "number of replications");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--scores", sim.scores, "score source: oracle|softmax");
  simulate->add_option("--threads", sim.threads, "worker threads for replications");
  simulate->add_flag("--freeze-priors", sim.freeze_priors, "draw class priors once instead of per replication");
  simulate->add_flag("--epsp", sim.with_epsp, "also run the e-value pipeline (alpha'=alpha)");
  simulate->add_flag("--oracle-rule", sim.with_oracle_rule,
                     "also run the population-optimal rule (needs --freeze-priors and oracle scores)");
  simulate->add_option("--design", sim.design_file, "key=value design file overriding the flags");
  simulate->add_option("--out", sim.out_dir, "output directory")->required();

  psp::cli::DecideConfig dec;
  std::string dec_alphas = "0.1";
  std::string dec_alpha_prime;
  auto add_decide_options = [&](CLI::App* cmd, bool with_prime) {
    cmd->add_option("--target-scores", dec.target_scores, "m x K score matrix CSV")->required();
    cmd->add_option("--holdout-scores", dec.holdout_scores, "n x K score matrix CSV")->required();
    cmd->add_option("--holdout-labels", dec.holdout_labels, "n hold-out labels CSV")->required();
    cmd->add_option("--partition", dec.partition, "overall|classwise|groups like 1,2|3,4");
    cmd->add_option("--alphas", dec_alphas, "per-group target levels (scalar broadcasts)");
    cmd->add_option("--seed", dec.seed, "tie-randomization seed for the argmax pre-labels");
    cmd->add_option("--out", dec.out_dir, "output directory")->required();
    if (with_prime)
      cmd->add_option("--alpha-prime", dec_alpha_prime, "per-group cutoff levels (defaults to --alphas)");
  };
  CLI::App* decide = app.add_subcommand("decide", "p-value decisions from score files");
  add_decide_options(decide, false);
  CLI::App* edecide = app.add_subcommand("edecide", "e-value decisions from score files");
  add_decide_options(edecide, true);

  psp::cli::SelectConfig sel;
  std::string sel_region;
  CLI::App* select = app.add_subcommand("select", "subject selection for a label region");
  select->add_option("--target-scores", sel.target_scores, "score CSV (1 column, or K columns summed over the region)")->required();
  select->add_option("--holdout-scores", sel.holdout_scores, "hold-out score CSV")->required();
  select->add_option("--holdout-labels", sel.holdout_labels, "hold-out labels CSV")->required();
  select->add_option("--region", sel_region, "comma-separated labels of interest")->required();
  select->add_option("--alpha", sel.alpha, "target false selection level");
  select->add_option("--out", sel.out_dir, "output directory")->required();

  psp::cli::InfosetsConfig info;
  CLI::App* infosets = app.add_subcommand("infosets", "informative prediction sets of size <= L");
  infosets->add_option("--target-scores", info.target_scores, "m x K posterior-style score CSV")->required();
  infosets->add_option("--holdout-scores", info.holdout_scores, "n x K score CSV")->required();
  infosets->add_option("--holdout-labels", info.holdout_labels, "n hold-out labels CSV")->required();
  infosets->add_option("--L", info.L, "maximal prediction set size")->required();
  infosets->add_option("--alpha", info.alpha, "target false coverage level");
  infosets->add_option("--out", info.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) {
      sim.alphas = psp::io::parse_doubles(sim_alphas, "--alphas");
      psp::cli::cmd_simulate(sim);
    } else if (decide->parsed() || edecide->parsed()) {
      dec.alphas = psp::io::parse_doubles(dec_alphas, "--alphas");
      if (!dec_alpha_prime.empty())
        dec.alpha_prime = psp::io::parse_doubles(dec_alpha_prime, "--alpha-prime");
      if (decide->parsed())
        psp::cli::cmd_decide(dec);
      else
        psp::cli::cmd_edecide(dec);
    } else if (select->parsed()) {
      sel.region = psp::io::parse_ints(sel_region, "--region");
      psp::cli::cmd_select(sel);
    } else if (infosets->parsed()) {
      psp::cli::cmd_infosets(info);
    }
  } catch (const psp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_config() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
