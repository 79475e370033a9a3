#include "psp/simlab.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "psp/engine.hpp"
#include "psp/evalues.hpp"
#include "psp/oracle.hpp"
#include "psp/rng.hpp"

namespace psp {

GroupPartition SimDesign::partition(double alpha) const {
  return preset == PartitionPreset::Overall ? GroupPartition::overall(K, alpha)
                                            : GroupPartition::classwise(K, alpha);
}

std::vector<double> priors_from_draws(const std::vector<double>& z) {
  if (z.empty()) throw Error(Errc::EmptyInput, "priors_from_draws: no draws");
  double sum = 0.0;
  for (double v : z) {
    if (!(v > 0.0)) throw Error(Errc::BadData, "priors_from_draws: draws must be positive");
    sum += v;
  }
  std::vector<double> priors(z.size());
  for (size_t k = 0; k < z.size(); ++k) priors[k] = z[k] / sum;
  return priors;
}

std::vector<double> sample_priors(int K, std::mt19937_64& rng) {
  if (K < 2) throw Error(Errc::BadConfig, "sample_priors: need K >= 2");
  std::uniform_real_distribution<double> unif(1.0, 2.0);
  std::vector<double> z(static_cast<size_t>(K));
  for (auto& v : z) v = unif(rng);
  return priors_from_draws(z);
}

Dataset sample_dataset(const GmmSpec& spec, long long size, std::uint64_t seed) {
  spec.validate();
  if (size < 1) throw Error(Errc::BadConfig, "sample_dataset: size must be positive");
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> cum(spec.priors.size());
  double acc = 0.0;
  for (size_t k = 0; k < spec.priors.size(); ++k) {
    acc += spec.priors[k];
    cum[k] = acc;
  }
  cum.back() = 1.0;

  Dataset data;
  data.X.resize(size, spec.d);
  data.y.resize(static_cast<size_t>(size));
  for (long long i = 0; i < size; ++i) {
    const double u = unif(eng);
    int label = spec.K;
    for (size_t k = 0; k < cum.size(); ++k) {
      if (u <= cum[k]) {
        label = static_cast<int>(k) + 1;
        break;
      }
    }
    data.y[static_cast<size_t>(i)] = label;
    for (int c = 0; c < spec.d; ++c) data.X(i, c) = spec.means(label - 1, c) + normal(eng);
  }
  return data;
}

GmmSpec design_gmm(int K, int d, std::vector<double> priors) {
  GmmSpec spec;
  spec.K = K;
  spec.d = d;
  spec.priors = std::move(priors);
  spec.means.resize(K, d);
  const double scale = std::pow(static_cast<double>(d), 0.25);
  for (int k = 1; k <= K; ++k) spec.means.row(k - 1).setConstant(static_cast<double>(k) / scale);
  spec.validate();
  return spec;
}

namespace {

// per-replication output for every (alpha, method) row
struct RepOutcome {
  std::vector<ReplicationMetrics> per_row;
  std::vector<std::vector<double>> theta;      // [row][group]
  std::vector<std::vector<double>> threshold;  // [row][group]
  long long violations = 0;
};

std::vector<int> merge_oracle_decisions(const std::vector<OracleRule>& rules,
                                        const ScoreMatrix& posteriors,
                                        const std::vector<int>& pre_labels) {
  std::vector<int> decisions(pre_labels.size(), 0);
  for (const auto& rule : rules) {
    const std::vector<int> part = oracle_decide(rule, posteriors, pre_labels);
    for (size_t j = 0; j < part.size(); ++j)
      if (part[j] != 0) decisions[j] = part[j];
  }
  return decisions;
}

}  // namespace

ExperimentSummary run_experiment(const SimDesign& design) {
  if (design.reps < 1) throw Error(Errc::BadConfig, "run_experiment: reps must be >= 1");
  if (design.alphas.empty()) throw Error(Errc::BadConfig, "run_experiment: empty alpha grid");
  for (double a : design.alphas)
    if (!(a > 0.0 && a < 1.0)) throw Error(Errc::AlphaOutOfRange, "run_experiment: alpha outside (0,1)");
  if (design.scores == SimScores::External)
    throw Error(Errc::BadConfig,
                "run_experiment: external scores are file-based; use the decide command instead");
  if (design.with_oracle_rule && design.redraw_priors)
    throw Error(Errc::BadConfig,
                "run_experiment: the oracle rule needs a fixed data law; set redraw_priors=false");
  if (design.with_oracle_rule && design.scores != SimScores::Oracle)
    throw Error(Errc::BadConfig, "run_experiment: the oracle rule requires oracle scores");

  std::vector<std::string> methods = {"psp"};
  if (design.with_epsp) methods.push_back("epsp");
  if (design.with_oracle_rule) methods.push_back("oracle");

  // group structure is the same for every grid level; only alpha varies
  std::vector<GroupPartition> partitions;
  partitions.reserve(design.alphas.size());
  for (double a : design.alphas) partitions.push_back(design.partition(a));
  const int G = partitions.front().num_groups();
  const size_t n_rows = design.alphas.size() * methods.size();

  // frozen priors (and oracle rules) are derived from dedicated sub-streams
  std::vector<double> frozen_priors;
  if (!design.redraw_priors) {
    auto eng = rng::engine(design.seed, 0x9'0000'0001ULL);
    frozen_priors = sample_priors(design.K, eng);
  }
  std::vector<std::vector<OracleRule>> oracle_rules;  // [alpha][group]
  if (design.with_oracle_rule) {
    const GmmSpec spec = design_gmm(design.K, design.d, frozen_priors);
    const PreClassifier rule = argmax_rule(gmm_posterior(spec));
    std::vector<PopulationCurves> curves;
    curves.reserve(static_cast<size_t>(G));
    for (int g = 0; g < G; ++g)
      curves.push_back(estimate_curves(spec, rule, partitions.front().labels(g), design.oracle_n_mc,
                                       rng::substream(design.seed, 0x9'0000'0002ULL + static_cast<std::uint64_t>(g))));
    for (size_t a = 0; a < design.alphas.size(); ++a) {
      std::vector<OracleRule> per_group;
      for (int g = 0; g < G; ++g)
        per_group.push_back(oracle_threshold(curves[static_cast<size_t>(g)],
                                             partitions[a].labels(g), partitions[a].alpha(g)));
      oracle_rules.push_back(std::move(per_group));
    }
  }

  std::vector<RepOutcome> outcomes(static_cast<size_t>(design.reps));

  auto run_replication = [&](int rep) {
    const std::uint64_t base = rng::substream(design.seed, static_cast<std::uint64_t>(rep));
    std::vector<double> priors = frozen_priors;
    if (design.redraw_priors) {
      auto eng = rng::engine(base, 0);
      priors = sample_priors(design.K, eng);
    }
    const GmmSpec spec = design_gmm(design.K, design.d, priors);
    const Dataset holdout = sample_dataset(spec, design.n(), rng::substream(base, 2));
    const Dataset target = sample_dataset(spec, design.m(), rng::substream(base, 3));

    ScoreMatrix pre_target_scores, pre_holdout_scores;  // drive pre-classification
    ScoreMatrix target_scores, holdout_scores;          // drive p-/e-values
    if (design.scores == SimScores::Oracle) {
      target_scores = gmm_posterior_matrix(spec, target.X);
      holdout_scores = gmm_posterior_matrix(spec, holdout.X);
      pre_target_scores = target_scores;
      pre_holdout_scores = holdout_scores;
    } else {
      const Dataset train = sample_dataset(spec, design.n_train(), rng::substream(base, 1));
      if (design.split_classifier) {
        const Eigen::Index half = train.size() / 2;
        Dataset first{train.X.topRows(half),
                      std::vector<int>(train.y.begin(), train.y.begin() + half)};
        Dataset second{train.X.bottomRows(train.size() - half),
                       std::vector<int>(train.y.begin() + half, train.y.end())};
        const SoftmaxModel pre_model = train_softmax(first, design.K, design.trainer);
        const SoftmaxModel score_model = train_softmax(second, design.K, design.trainer);
        pre_target_scores = pre_model.scores(target.X);
        pre_holdout_scores = pre_model.scores(holdout.X);
        target_scores = score_model.scores(target.X);
        holdout_scores = score_model.scores(holdout.X);
      } else {
        const SoftmaxModel model = train_softmax(train, design.K, design.trainer);
        target_scores = model.scores(target.X);
        holdout_scores = model.scores(holdout.X);
        pre_target_scores = target_scores;
        pre_holdout_scores = holdout_scores;
      }
    }

    const std::vector<int> pre_target = argmax_preclassify(pre_target_scores, rng::substream(base, 4));
    const std::vector<int> pre_holdout = argmax_preclassify(pre_holdout_scores, rng::substream(base, 5));

    const GroupPartition& structure = partitions.front();
    const CalibrationState calib = build_calibration(pre_target, pre_holdout, holdout.y, structure);
    const std::vector<GroupPValues> pvs =
        selective_pvalues(target_scores, holdout_scores, calib, structure);
    std::vector<GroupScores> group_scores;
    if (design.with_epsp) {
      group_scores.reserve(static_cast<size_t>(G));
      for (int g = 0; g < G; ++g)
        group_scores.push_back(collect_group_scores(target_scores, holdout_scores, calib, structure, g));
    }

    RepOutcome& out = outcomes[static_cast<size_t>(rep)];
    out.per_row.resize(n_rows);
    out.theta.assign(n_rows, std::vector<double>(static_cast<size_t>(G), 0.0));
    out.threshold.assign(n_rows, std::vector<double>(static_cast<size_t>(G), 0.0));

    size_t row = 0;
    for (size_t a = 0; a < design.alphas.size(); ++a) {
      const GroupPartition& part = partitions[a];
      for (const std::string& method : methods) {
        std::vector<int> decisions;
        std::vector<double> thr(static_cast<size_t>(G), 0.0);
        if (method == "psp") {
          std::vector<GroupThreshold> ths;
          ths.reserve(static_cast<size_t>(G));
          for (int g = 0; g < G; ++g)
            ths.push_back(bh_threshold(pvs[static_cast<size_t>(g)], calib.theta_hat[static_cast<size_t>(g)],
                                       part.alpha(g), calib.target_total[static_cast<size_t>(g)]));
          const DecisionReport report = psp_decide(pre_target, pvs, ths, part);
          decisions = report.decisions;
          for (int g = 0; g < G; ++g) thr[static_cast<size_t>(g)] = ths[static_cast<size_t>(g)].threshold.value();
          // theta_hat <= alpha must imply a full-decision group
          for (int g = 0; g < G; ++g) {
            const Frac& th = calib.theta_hat[static_cast<size_t>(g)];
            const bool powerful = static_cast<double>(th.num) <= part.alpha(g) * static_cast<double>(th.den);
            if (!powerful) continue;
            for (size_t j = 0; j < decisions.size(); ++j)
              if (part.group_of(pre_target[j]) == g && decisions[j] == 0) {
                ++out.violations;
                break;
              }
          }
        } else if (method == "epsp") {
          decisions.assign(pre_target.size(), 0);
          for (int g = 0; g < G; ++g) {
            const double t_hat =
                score_threshold(group_scores[static_cast<size_t>(g)], calib, g, part.alpha(g));
            const GroupEValues ev =
                selective_evalues(group_scores[static_cast<size_t>(g)], calib, g, t_hat);
            const EDecisionFragment frag =
                ebh_decide(ev, part.alpha(g), calib.target_total[static_cast<size_t>(g)]);
            for (int j : frag.decided_subjects)
              decisions[static_cast<size_t>(j)] = pre_target[static_cast<size_t>(j)];
            thr[static_cast<size_t>(g)] = t_hat;
          }
        } else {  // oracle
          decisions = merge_oracle_decisions(oracle_rules[a], target_scores, pre_target);
          for (int g = 0; g < G; ++g) thr[static_cast<size_t>(g)] = oracle_rules[a][static_cast<size_t>(g)].t_star;
        }
        out.per_row[row] = compute_replication_metrics(decisions, target.y, part);
        for (int g = 0; g < G; ++g)
          out.theta[row][static_cast<size_t>(g)] = calib.theta_hat[static_cast<size_t>(g)].value();
        out.threshold[row] = thr;
        ++row;
      }
    }
  };

  const int n_threads = std::max(1, design.threads);
  if (n_threads == 1) {
    for (int rep = 0; rep < design.reps; ++rep) {
      try {
        run_replication(rep);
      } catch (const Error& e) {
        throw Error(e.code(), "replication " + std::to_string(rep) + ": " + e.what());
      }
    }
  } else {
    std::atomic<int> next{0};
    std::atomic<int> failed_rep{-1};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const int rep = next.fetch_add(1);
        if (rep >= design.reps || failed_rep.load() >= 0) return;
        try {
          run_replication(rep);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) {
            first_error = std::current_exception();
            failed_rep.store(rep);
          }
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) {
      try {
        std::rethrow_exception(first_error);
      } catch (const Error& e) {
        throw Error(e.code(), "replication " + std::to_string(failed_rep.load()) + ": " + e.what());
      }
    }
  }

  ExperimentSummary summary;
  summary.design = design;
  summary.raw.resize(n_rows);
  summary.theta_hats.resize(n_rows);
  summary.thresholds.resize(n_rows);
  for (size_t row = 0; row < n_rows; ++row) {
    summary.raw[row].reserve(static_cast<size_t>(design.reps));
    for (const auto& rep : outcomes) {
      summary.raw[row].push_back(rep.per_row[row]);
      summary.theta_hats[row].push_back(rep.theta[row]);
      summary.thresholds[row].push_back(rep.threshold[row]);
    }
  }
  for (const auto& rep : outcomes) summary.nondegradation_violations += rep.violations;

  size_t row = 0;
  for (size_t a = 0; a < design.alphas.size(); ++a) {
    for (const std::string& method : methods) {
      SummaryRow sr;
      sr.alpha = design.alphas[a];
      sr.method = method;
      sr.stats = aggregate(summary.raw[row]);
      summary.rows.push_back(std::move(sr));
      ++row;
    }
  }
  return summary;
}

}  // namespace psp
