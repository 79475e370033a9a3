#include "cli_commands.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "psp/csv.hpp"
#include "psp/engine.hpp"
#include "psp/evalues.hpp"
#include "psp/extensions.hpp"
#include "psp/models.hpp"
#include "psp/rng.hpp"
#include "psp/simlab.hpp"

namespace psp::cli {

namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw Error(Errc::BadConfig, "output directory must be given");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::BadData, "cannot create output directory '" + dir + "'");
}

std::string join_ints(const std::vector<int>& xs, char sep) {
  std::ostringstream os;
  for (size_t i = 0; i < xs.size(); ++i) os << (i ? std::string(1, sep) : "") << xs[i];
  return os.str();
}

std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

}  // namespace

GroupPartition make_partition(const std::string& spec, std::vector<double> alphas, int K) {
  std::vector<std::vector<int>> groups;
  if (spec == "overall") {
    std::vector<int> all;
    for (int k = 1; k <= K; ++k) all.push_back(k);
    groups.push_back(all);
  } else if (spec == "classwise") {
    for (int k = 1; k <= K; ++k) groups.push_back({k});
  } else {
    for (const std::string& part : io::split(spec, '|'))
      groups.push_back(io::parse_ints(part, "partition"));
  }
  if (alphas.size() == 1 && groups.size() > 1) alphas.assign(groups.size(), alphas[0]);
  return validate_partition(groups, alphas, K);
}

// ---------------------------------------------------------------------------
// simulate

namespace {

SimulateConfig apply_design_file(SimulateConfig config) {
  if (config.design_file.empty()) return config;
  for (const auto& [key, value] : io::parse_kv_file(config.design_file)) {
    if (key == "preset" || key == "partition")
      config.preset = value;
    else if (key == "K")
      config.K = io::parse_ints(value, "K").at(0);
    else if (key == "d")
      config.d = io::parse_ints(value, "d").at(0);
    else if (key == "n0")
      config.n0 = io::parse_ints(value, "n0").at(0);
    else if (key == "reps")
      config.reps = io::parse_ints(value, "reps").at(0);
    else if (key == "seed")
      config.seed = static_cast<std::uint64_t>(io::parse_doubles(value, "seed").at(0));
    else if (key == "alphas")
      config.alphas = io::parse_doubles(value, "alphas");
    else if (key == "scores")
      config.scores = value;
    else if (key == "threads")
      config.threads = io::parse_ints(value, "threads").at(0);
    else if (key == "freeze_priors")
      config.freeze_priors = io::parse_ints(value, "freeze_priors").at(0) != 0;
    else if (key == "epsp")
      config.with_epsp = io::parse_ints(value, "epsp").at(0) != 0;
    else if (key == "oracle_rule")
      config.with_oracle_rule = io::parse_ints(value, "oracle_rule").at(0) != 0;
    else
      throw Error(Errc::BadConfig, "unknown design key '" + key + "'");
  }
  return config;
}

std::string config_echo(const SimulateConfig& c) {
  std::ostringstream os;
  os << "preset=" << c.preset << " K=" << c.K << " d=" << c.d << " n0=" << c.n0
     << " reps=" << c.reps << " seed=" << c.seed << " scores=" << c.scores
     << " alphas=";
  for (size_t i = 0; i < c.alphas.size(); ++i) os << (i ? "," : "") << io::fmt(c.alphas[i]);
  os << " freeze_priors=" << (c.freeze_priors ? 1 : 0) << " epsp=" << (c.with_epsp ? 1 : 0)
     << " oracle_rule=" << (c.with_oracle_rule ? 1 : 0);
  return os.str();
}

}  // namespace

void cmd_simulate(SimulateConfig config) {
  config = apply_design_file(config);
  SimDesign design;
  if (config.preset == "overall")
    design.preset = PartitionPreset::Overall;
  else if (config.preset == "classwise")
    design.preset = PartitionPreset::Classwise;
  else
    throw Error(Errc::BadConfig, "unknown preset '" + config.preset + "' (overall|classwise)");
  if (config.scores == "oracle")
    design.scores = SimScores::Oracle;
  else if (config.scores == "softmax")
    design.scores = SimScores::Softmax;
  else
    throw Error(Errc::BadConfig, "unknown score source '" + config.scores + "' (oracle|softmax)");
  design.K = config.K;
  design.d = config.d;
  design.n0 = config.n0;
  design.reps = config.reps;
  design.seed = config.seed;
  design.alphas = config.alphas;
  design.threads = config.threads;
  design.redraw_priors = !config.freeze_priors;
  design.with_epsp = config.with_epsp;
  design.with_oracle_rule = config.with_oracle_rule;

  const ExperimentSummary summary = run_experiment(design);
  ensure_out_dir(config.out_dir);
  const int G = design.partition(design.alphas.front()).num_groups();
  const std::string echo = config_echo(config);

  io::Table table;
  table.comments = {"psp simulate summary", "config: " + echo,
                    "seed: " + fmt_u64(config.seed),
                    "nondegradation_violations: " + std::to_string(summary.nondegradation_violations)};
  table.columns = {"method", "alpha",   "group", "fdr",  "fdr_se",
                   "power",  "power_se", "mfdr",  "mean_decisions"};
  io::Table series;
  series.comments = {"psp simulate long-format series", "config: " + echo};
  series.columns = {"metric", "method", "alpha", "group", "value", "se"};

  for (size_t row = 0; row < summary.rows.size(); ++row) {
    const SummaryRow& sr = summary.rows[row];
    const std::string alpha = io::fmt(sr.alpha);
    for (int g = 0; g < G; ++g) {
      const GroupAggregate& ga = sr.stats.groups[static_cast<size_t>(g)];
      const std::string group = std::to_string(g + 1);
      table.rows.push_back({sr.method, alpha, group, io::fmt(ga.fdr.mean), io::fmt(ga.fdr.se),
                            io::fmt(ga.power.mean), io::fmt(ga.power.se), io::fmt(ga.mfdr),
                            io::fmt(ga.mean_decisions)});
      series.rows.push_back({"fdr", sr.method, alpha, group, io::fmt(ga.fdr.mean), io::fmt(ga.fdr.se)});
      series.rows.push_back(
          {"power", sr.method, alpha, group, io::fmt(ga.power.mean), io::fmt(ga.power.se)});
    }
    if (G > 1) {
      table.rows.push_back({sr.method, alpha, "overall", io::fmt(sr.stats.overall_fdr.mean),
                            io::fmt(sr.stats.overall_fdr.se), io::fmt(sr.stats.overall_power.mean),
                            io::fmt(sr.stats.overall_power.se), io::fmt(sr.stats.overall_mfdr), ""});
      series.rows.push_back({"fdr", sr.method, alpha, "overall", io::fmt(sr.stats.overall_fdr.mean),
                             io::fmt(sr.stats.overall_fdr.se)});
      series.rows.push_back({"power", sr.method, alpha, "overall",
                             io::fmt(sr.stats.overall_power.mean), io::fmt(sr.stats.overall_power.se)});
    }
  }
  io::write_table(join_path(config.out_dir, "summary.csv"), table);
  io::write_table(join_path(config.out_dir, "series.csv"), series);

  io::Table raw;
  raw.comments = {"psp simulate per-replication metrics", "config: " + echo,
                  "rows: " + std::to_string(summary.rows.size() * static_cast<size_t>(design.reps) *
                                            static_cast<size_t>(G))};
  raw.columns = {"method",     "alpha", "group",           "replication", "fdp",
                 "decisions",  "false_decisions", "power", "theta_hat",   "threshold"};
  for (size_t row = 0; row < summary.rows.size(); ++row) {
    const SummaryRow& sr = summary.rows[row];
    for (size_t rep = 0; rep < summary.raw[row].size(); ++rep) {
      const ReplicationMetrics& rm = summary.raw[row][rep];
      for (int g = 0; g < G; ++g) {
        const GroupOutcome& go = rm.groups[static_cast<size_t>(g)];
        raw.rows.push_back({sr.method, io::fmt(sr.alpha), std::to_string(g + 1),
                            std::to_string(rep), io::fmt(go.fdp), std::to_string(go.decisions),
                            std::to_string(go.false_decisions), io::fmt(go.power),
                            io::fmt(summary.theta_hats[row][rep][static_cast<size_t>(g)]),
                            io::fmt(summary.thresholds[row][rep][static_cast<size_t>(g)])});
      }
    }
  }
  io::write_table(join_path(config.out_dir, "replications.csv"), raw);
}

// ---------------------------------------------------------------------------
// decide / edecide

namespace {

struct DecideInputs {
  ScoreMatrix target_scores;
  ScoreMatrix holdout_scores;
  std::vector<int> holdout_labels;
  GroupPartition partition;
  std::vector<int> pre_target;
  std::vector<int> pre_holdout;
};

DecideInputs load_decide_inputs(const DecideConfig& config) {
  DecideInputs in;
  in.target_scores = io::read_matrix(config.target_scores);
  const int K = static_cast<int>(in.target_scores.cols());
  if (K < 2) throw Error(Errc::BadData, config.target_scores + ": need at least two score columns");
  in.holdout_scores = io::read_matrix(config.holdout_scores, K);
  if (in.holdout_scores.rows() == 0)
    throw Error(Errc::ZeroCalibration, config.holdout_scores + ": hold-out scores are empty");
  in.holdout_labels = io::read_labels(config.holdout_labels);
  if (static_cast<size_t>(in.holdout_scores.rows()) != in.holdout_labels.size())
    throw Error(Errc::LengthMismatch,
                "hold-out scores (" + std::to_string(in.holdout_scores.rows()) + " rows) vs labels (" +
                    std::to_string(in.holdout_labels.size()) + ")");
  detail::check_labels(in.holdout_labels, K, "hold-out labels");
  in.partition = make_partition(config.partition, config.alphas, K);
  in.pre_target = argmax_preclassify(in.target_scores, config.seed);
  in.pre_holdout = argmax_preclassify(in.holdout_scores, rng::substream(config.seed, 0x401dULL));
  return in;
}

std::string decide_echo(const DecideConfig& c) {
  std::ostringstream os;
  os << "partition=" << c.partition << " alphas=";
  for (size_t i = 0; i < c.alphas.size(); ++i) os << (i ? "," : "") << io::fmt(c.alphas[i]);
  if (!c.alpha_prime.empty()) {
    os << " alpha_prime=";
    for (size_t i = 0; i < c.alpha_prime.size(); ++i) os << (i ? "," : "") << io::fmt(c.alpha_prime[i]);
  }
  os << " seed=" << c.seed;
  return os.str();
}

void write_decisions(const std::string& path, const DecisionReport& report, const std::string& echo,
                     std::uint64_t seed) {
  io::Table t;
  t.comments = {"psp decisions", "config: " + echo, "seed: " + fmt_u64(seed),
                "rows: " + std::to_string(report.decisions.size())};
  t.columns = {"subject_index", "pre_label", "p_or_e_value", "group", "decision"};
  for (size_t j = 0; j < report.decisions.size(); ++j)
    t.rows.push_back({std::to_string(j), std::to_string(report.pre_labels[j]),
                      io::fmt(report.values[j]), std::to_string(report.group_of[j] + 1),
                      std::to_string(report.decisions[j])});
  io::write_table(path, t);
}

}  // namespace

void cmd_decide(const DecideConfig& config) {
  const DecideInputs in = load_decide_inputs(config);
  const DecisionReport report = psp_run(in.target_scores, in.holdout_scores, in.pre_target,
                                        in.pre_holdout, in.holdout_labels, in.partition);
  ensure_out_dir(config.out_dir);
  const std::string echo = decide_echo(config);
  write_decisions(join_path(config.out_dir, "decisions.csv"), report, echo, config.seed);

  const CalibrationState calib =
      build_calibration(in.pre_target, in.pre_holdout, in.holdout_labels, in.partition);
  io::Table g;
  g.comments = {"psp per-group calibration and thresholds", "config: " + echo};
  g.columns = {"group",      "labels",    "alpha",     "n_targets", "n_holdout",
               "n_residual", "theta_hat", "threshold", "l_hat"};
  for (int gi = 0; gi < in.partition.num_groups(); ++gi) {
    const auto& th = report.thresholds[static_cast<size_t>(gi)];
    g.rows.push_back({std::to_string(gi + 1), join_ints(in.partition.labels(gi), '|'),
                      io::fmt(in.partition.alpha(gi)),
                      std::to_string(calib.target_total[static_cast<size_t>(gi)]),
                      std::to_string(calib.holdout_total[static_cast<size_t>(gi)]),
                      std::to_string(calib.residual_total[static_cast<size_t>(gi)]),
                      io::fmt(calib.theta_hat[static_cast<size_t>(gi)].value()),
                      io::fmt(th.threshold.value()), th.l_hat ? std::to_string(*th.l_hat) : ""});
  }
  io::write_table(join_path(config.out_dir, "groups.csv"), g);
}

void cmd_edecide(const DecideConfig& config) {
  const DecideInputs in = load_decide_inputs(config);
  std::vector<double> alpha_prime = config.alpha_prime;
  if (alpha_prime.empty()) alpha_prime = in.partition.alphas();
  if (alpha_prime.size() == 1 && in.partition.num_groups() > 1)
    alpha_prime.assign(static_cast<size_t>(in.partition.num_groups()), alpha_prime[0]);
  if (alpha_prime.size() != static_cast<size_t>(in.partition.num_groups()))
    throw Error(Errc::BadConfig, "edecide: " + std::to_string(alpha_prime.size()) +
                                     " alpha-prime values for " +
                                     std::to_string(in.partition.num_groups()) + " groups");
  const EDecisionReport ereport = epsp_run(in.target_scores, in.holdout_scores, in.pre_target,
                                           in.pre_holdout, in.holdout_labels, in.partition, alpha_prime);
  ensure_out_dir(config.out_dir);
  const std::string echo = decide_echo(config);
  write_decisions(join_path(config.out_dir, "decisions.csv"), ereport.report, echo, config.seed);

  const CalibrationState calib =
      build_calibration(in.pre_target, in.pre_holdout, in.holdout_labels, in.partition);
  io::Table g;
  g.comments = {"psp per-group e-value thresholds", "config: " + echo};
  g.columns = {"group",      "labels",    "alpha",        "alpha_prime", "n_targets", "n_holdout",
               "n_residual", "theta_hat", "score_cutoff", "ebh_threshold", "l_hat"};
  for (int gi = 0; gi < in.partition.num_groups(); ++gi) {
    const auto& th = ereport.ethresholds[static_cast<size_t>(gi)];
    g.rows.push_back({std::to_string(gi + 1), join_ints(in.partition.labels(gi), '|'),
                      io::fmt(in.partition.alpha(gi)), io::fmt(alpha_prime[static_cast<size_t>(gi)]),
                      std::to_string(calib.target_total[static_cast<size_t>(gi)]),
                      std::to_string(calib.holdout_total[static_cast<size_t>(gi)]),
                      std::to_string(calib.residual_total[static_cast<size_t>(gi)]),
                      io::fmt(calib.theta_hat[static_cast<size_t>(gi)].value()),
                      io::fmt(ereport.score_cutoffs[static_cast<size_t>(gi)]),
                      th.value ? io::fmt(th.value->value()) : "inf",
                      th.l_hat ? std::to_string(*th.l_hat) : ""});
  }
  io::write_table(join_path(config.out_dir, "groups.csv"), g);
}

// ---------------------------------------------------------------------------
// select / infosets

void cmd_select(const SelectConfig& config) {
  if (config.region.empty()) throw Error(Errc::BadConfig, "select: region must name at least one label");
  const Eigen::MatrixXd target = io::read_matrix(config.target_scores);
  const Eigen::MatrixXd holdout = io::read_matrix(config.holdout_scores, static_cast<int>(target.cols()));
  if (holdout.rows() == 0) throw Error(Errc::ZeroCalibration, "select: hold-out scores are empty");
  const std::vector<int> labels = io::read_labels(config.holdout_labels);
  if (static_cast<size_t>(holdout.rows()) != labels.size())
    throw Error(Errc::LengthMismatch, "select: hold-out scores vs labels");

  // single-column files are used as the selection score directly; otherwise
  // the region columns of a K-column matrix are summed
  const int K = static_cast<int>(target.cols());
  auto to_mu = [&](const Eigen::MatrixXd& m) {
    std::vector<double> mu(static_cast<size_t>(m.rows()), 0.0);
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
      if (K == 1) {
        mu[static_cast<size_t>(j)] = m(j, 0);
      } else {
        double s = 0.0;
        for (int k : config.region) {
          if (k < 1 || k > K) throw Error(Errc::BadConfig, "select: region label outside score columns");
          s += m(j, k - 1);
        }
        mu[static_cast<size_t>(j)] = s;
      }
    }
    return mu;
  };
  std::vector<uint8_t> in_region(labels.size());
  for (size_t i = 0; i < labels.size(); ++i)
    in_region[i] = std::find(config.region.begin(), config.region.end(), labels[i]) != config.region.end();

  SelectionTask task{config.region, config.alpha};
  const SelectionResult res = select_subjects(task, to_mu(target), to_mu(holdout), in_region);

  ensure_out_dir(config.out_dir);
  std::ostringstream echo;
  echo << "region=" << join_ints(config.region, ',') << " alpha=" << io::fmt(config.alpha);
  io::Table t;
  t.comments = {"psp subject selection", "config: " + echo.str(),
                "theta_hat: " + io::fmt(res.theta_hat.value()),
                "threshold: " + io::fmt(res.threshold.value()),
                "selected: " + std::to_string(res.selected.size())};
  t.columns = {"subject_index", "p_value", "selected"};
  std::vector<uint8_t> is_selected(static_cast<size_t>(target.rows()), 0);
  for (int j : res.selected) is_selected[static_cast<size_t>(j)] = 1;
  for (size_t i = 0; i < res.pre_selected.size(); ++i) {
    const int j = res.pre_selected[i];
    t.rows.push_back({std::to_string(j), io::fmt(res.pvalues[i].value()),
                      std::to_string(static_cast<int>(is_selected[static_cast<size_t>(j)]))});
  }
  io::write_table(join_path(config.out_dir, "selection.csv"), t);
}

void cmd_infosets(const InfosetsConfig& config) {
  const Eigen::MatrixXd target = io::read_matrix(config.target_scores);
  const int K = static_cast<int>(target.cols());
  const Eigen::MatrixXd holdout = io::read_matrix(config.holdout_scores, K);
  if (holdout.rows() == 0) throw Error(Errc::ZeroCalibration, "infosets: hold-out scores are empty");
  const std::vector<int> labels = io::read_labels(config.holdout_labels);

  InformativeSetTask task{K, config.L, config.alpha};
  const InformativeSetsResult res = informative_sets(task, target, holdout, labels);

  ensure_out_dir(config.out_dir);
  std::ostringstream echo;
  echo << "K=" << K << " L=" << config.L << " alpha=" << io::fmt(config.alpha);
  io::Table t;
  t.comments = {"psp informative prediction sets", "config: " + echo.str(),
                "theta_hat: " + io::fmt(res.theta_hat.value()),
                "threshold: " + io::fmt(res.threshold.value()),
                "selected: " + std::to_string(res.selected.size())};
  t.columns = {"subject_index", "p_value", "selected", "prediction_set"};
  std::vector<uint8_t> is_selected(static_cast<size_t>(target.rows()), 0);
  for (int j : res.selected) is_selected[static_cast<size_t>(j)] = 1;
  for (size_t i = 0; i < res.pre_selected.size(); ++i) {
    const int j = res.pre_selected[i];
    t.rows.push_back({std::to_string(j), io::fmt(res.pvalues[i].value()),
                      std::to_string(static_cast<int>(is_selected[static_cast<size_t>(j)])),
                      join_ints(res.sets[static_cast<size_t>(j)], '|')});
  }
  io::write_table(join_path(config.out_dir, "sets.csv"), t);
}

}  // namespace psp::cli
