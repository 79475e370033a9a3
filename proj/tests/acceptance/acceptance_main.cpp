// Acceptance suite: every guarantee the library advertises, executed at the
// design scale of the simulation study. Prints one PASS/FAIL line per
// criterion and exits nonzero if any fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../common/instances.hpp"
#include "../common/reference.hpp"
#include "psp/engine.hpp"
#include "psp/evalues.hpp"
#include "psp/extensions.hpp"
#include "psp/metrics.hpp"
#include "psp/models.hpp"
#include "psp/oracle.hpp"
#include "psp/rng.hpp"
#include "psp/simlab.hpp"

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Harness {
 public:
  void criterion(int index, const std::string& name, const std::function<Outcome()>& fn) {
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s%s%s\n", out.pass ? "PASS" : "FAIL", index, name.c_str(),
                out.detail.empty() ? "" : " -- ", out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures_;
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// shared experiment grid for the error-control criteria

struct GridRun {
  std::string label;
  psp::SimDesign design;
  psp::ExperimentSummary summary;
};

std::vector<GridRun> run_error_control_grid() {
  std::vector<GridRun> runs;
  const std::vector<double> overall_grid = {0.05, 0.1, 0.15, 0.2};
  const std::vector<double> classwise_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  for (const auto scores : {psp::SimScores::Oracle, psp::SimScores::Softmax}) {
    const std::string tag = scores == psp::SimScores::Oracle ? "oracle" : "softmax";
    for (int K : {2, 4, 6}) {
      psp::SimDesign d;
      d.K = K;
      d.reps = 500;
      d.seed = 20240000ULL + static_cast<std::uint64_t>(K);
      d.alphas = overall_grid;
      d.preset = psp::PartitionPreset::Overall;
      d.scores = scores;
      d.threads = 2;
      runs.push_back({"overall K=" + std::to_string(K) + " " + tag, d, {}});
    }
    psp::SimDesign cw;
    cw.K = 4;
    cw.reps = 500;
    cw.seed = 20250004ULL;
    cw.alphas = classwise_grid;
    cw.preset = psp::PartitionPreset::Classwise;
    cw.scores = scores;
    cw.threads = 2;
    runs.push_back({"classwise K=4 " + tag, cw, {}});
  }
  for (auto& run : runs) run.summary = psp::run_experiment(run.design);
  return runs;
}

}  // namespace

int main() {
  Harness h;
  std::printf("running acceptance suite (replicated experiments; a minute or two)\n");
  std::fflush(stdout);

  const std::vector<GridRun> grid = run_error_control_grid();

  h.criterion(1, "group-wise FDR stays within alpha + 3se across the design grid", [&]() -> Outcome {
    std::ostringstream detail;
    double worst_margin = 1e9;
    std::string worst;
    for (const auto& run : grid) {
      for (const auto& row : run.summary.rows) {
        for (size_t g = 0; g < row.stats.groups.size(); ++g) {
          const auto& ga = row.stats.groups[g];
          const double bound = row.alpha + 3.0 * ga.fdr.se;
          const double margin = bound - ga.fdr.mean;
          if (margin < worst_margin) {
            worst_margin = margin;
            worst = run.label + " alpha=" + fmt3(row.alpha) + " group=" + std::to_string(g + 1) +
                    " fdr=" + fmt3(ga.fdr.mean) + " bound=" + fmt3(bound);
          }
          if (margin < 0.0) {
            return {false, run.label + " alpha=" + fmt3(row.alpha) + " group=" +
                               std::to_string(g + 1) + " fdr=" + fmt3(ga.fdr.mean) +
                               " exceeds bound=" + fmt3(bound)};
          }
        }
      }
    }
    detail << grid.size() << " experiments x 500 reps; tightest cell: " << worst;
    return {true, detail.str()};
  });

  h.criterion(2, "calibration meeting the target level never triggers abstention", [&]() -> Outcome {
    long long violations = 0;
    for (const auto& run : grid) violations += run.summary.nondegradation_violations;
    if (violations != 0)
      return {false, std::to_string(violations) + " replications abstained despite theta_hat <= alpha"};
    return {true, "0 violations across all replications"};
  });

  h.criterion(3, "e-value pipeline at alpha'=alpha equals the p-value pipeline", [&]() -> Outcome {
    for (int i = 0; i < 100; ++i) {
      const auto inst = testgen::random_instance(30000 + static_cast<std::uint64_t>(i));
      const auto p = psp::psp_run(inst.target_scores, inst.holdout_scores, inst.pre_target,
                                  inst.pre_holdout, inst.holdout_truth, inst.partition);
      const auto e = psp::epsp_run(inst.target_scores, inst.holdout_scores, inst.pre_target,
                                   inst.pre_holdout, inst.holdout_truth, inst.partition, inst.alphas);
      if (p.decisions != e.report.decisions)
        return {false, "decision mismatch on instance " + std::to_string(i)};
    }
    return {true, "100 instances, decision-for-decision"};
  });

  h.criterion(4, "e-value pipeline never decides more than the p-value pipeline", [&]() -> Outcome {
    for (int i = 0; i < 100; ++i) {
      const auto inst = testgen::random_instance(30000 + static_cast<std::uint64_t>(i));
      const auto p = psp::psp_run(inst.target_scores, inst.holdout_scores, inst.pre_target,
                                  inst.pre_holdout, inst.holdout_truth, inst.partition);
      for (double scale : {0.5, 1.0, 2.0}) {
        std::vector<double> prime = inst.alphas;
        for (auto& a : prime) a = std::min(0.99, a * scale);
        const auto e = psp::epsp_run(inst.target_scores, inst.holdout_scores, inst.pre_target,
                                     inst.pre_holdout, inst.holdout_truth, inst.partition, prime);
        for (int g = 0; g < inst.partition.num_groups(); ++g) {
          long long pc = 0, ec = 0;
          for (size_t j = 0; j < p.decisions.size(); ++j) {
            if (inst.partition.group_of(inst.pre_target[j]) != g) continue;
            if (p.decisions[j] != 0) ++pc;
            if (e.report.decisions[j] != 0) ++ec;
          }
          if (ec > pc)
            return {false, "instance " + std::to_string(i) + " group " + std::to_string(g + 1) +
                               " scale " + fmt3(scale) + ": " + std::to_string(ec) + " > " +
                               std::to_string(pc)};
        }
      }
    }
    return {true, "100 instances x 3 alpha' scales"};
  });

  h.criterion(5, "threshold searches equal exhaustive scans in exact arithmetic", [&]() -> Outcome {
    std::mt19937_64 rng(50001);
    for (int trial = 0; trial < 1000; ++trial) {
      // step-up over p-values
      const long long m_g = std::uniform_int_distribution<long long>(1, 50)(rng);
      const long long R = std::uniform_int_distribution<long long>(0, 40)(rng);
      psp::GroupPValues pv;
      pv.group = 0;
      pv.residual_total = R;
      std::uniform_int_distribution<long long> count(0, R);
      for (long long j = 0; j < m_g; ++j) {
        pv.subjects.push_back(static_cast<int>(j));
        pv.pvalues.push_back(psp::Frac{1 + count(rng), 1 + R});
      }
      const long long sbar = std::uniform_int_distribution<long long>(R, R + 80)(rng);
      const psp::Frac theta{1 + R, 1 + sbar};
      const double alpha = std::uniform_real_distribution<double>(0.01, 0.6)(rng);
      const auto got = psp::bh_threshold(pv, theta, alpha, m_g);
      const auto want = ref::bh_scan(pv.pvalues, theta, alpha, m_g);
      if (got.l_hat != want.l_hat || (want.l_hat && !(got.threshold == want.threshold)))
        return {false, "bh_threshold mismatch at trial " + std::to_string(trial)};

      // score cutoff and eBH
      const int mt = std::uniform_int_distribution<int>(1, 50)(rng);
      const int nr = std::uniform_int_distribution<int>(0, 40)(rng);
      const bool discrete = trial % 2 == 0;
      auto draw = [&]() {
        if (discrete) return std::uniform_int_distribution<int>(0, 8)(rng) / 8.0;
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      };
      std::vector<double> targets(static_cast<size_t>(mt)), residuals(static_cast<size_t>(nr));
      for (auto& v : targets) v = draw();
      for (auto& v : residuals) v = draw();
      const long long holdout_total = nr + std::uniform_int_distribution<int>(0, 60)(rng);

      psp::GroupScores gs;
      gs.group = 0;
      gs.target = targets;
      gs.residual = residuals;
      for (int j = 0; j < mt; ++j) gs.subjects.push_back(j);
      psp::CalibrationState calib;
      calib.holdout_total = {holdout_total};
      calib.residual_total = {static_cast<long long>(nr)};
      calib.target_total = {static_cast<long long>(mt)};
      calib.theta_hat = {psp::Frac{1 + nr, 1 + holdout_total}};

      const double aprime = std::uniform_real_distribution<double>(0.01, 0.6)(rng);
      const double got_t = psp::score_threshold(gs, calib, 0, aprime);
      const double want_t = ref::score_threshold_scan(targets, residuals, holdout_total, aprime);
      if (!(got_t == want_t || (std::isinf(got_t) && std::isinf(want_t))))
        return {false, "score_threshold mismatch at trial " + std::to_string(trial)};

      const auto ev = psp::selective_evalues(gs, calib, 0, got_t);
      const double alpha_e = std::uniform_real_distribution<double>(0.01, 0.6)(rng);
      const auto frag = psp::ebh_decide(ev, alpha_e, mt);
      const auto want_e = ref::ebh_scan(ev.evalues, alpha_e, mt);
      if (frag.threshold.l_hat != want_e.l_hat)
        return {false, "ebh mismatch at trial " + std::to_string(trial)};
      if (want_e.threshold && !(*frag.threshold.value == *want_e.threshold))
        return {false, "ebh threshold mismatch at trial " + std::to_string(trial)};
    }
    return {true, "1000 instances for each of the three searches"};
  });

  h.criterion(6, "strictly increasing score maps leave all outputs unchanged", [&]() -> Outcome {
    for (int i = 0; i < 100; ++i) {
      const auto inst = testgen::random_instance(60000 + static_cast<std::uint64_t>(i));
      const auto base = psp::psp_run(inst.target_scores, inst.holdout_scores, inst.pre_target,
                                     inst.pre_holdout, inst.holdout_truth, inst.partition);
      const psp::ScoreMatrix ts = inst.target_scores.array().pow(3) + inst.target_scores.array();
      const psp::ScoreMatrix hs = inst.holdout_scores.array().pow(3) + inst.holdout_scores.array();
      const auto mapped =
          psp::psp_run(ts, hs, inst.pre_target, inst.pre_holdout, inst.holdout_truth, inst.partition);
      if (mapped.decisions != base.decisions)
        return {false, "decision drift on instance " + std::to_string(i)};
      for (size_t j = 0; j < base.values_exact.size(); ++j)
        if (!(mapped.values_exact[j] == base.values_exact[j]))
          return {false, "p-value drift on instance " + std::to_string(i)};
      for (size_t g = 0; g < base.thresholds.size(); ++g)
        if (mapped.thresholds[g].l_hat != base.thresholds[g].l_hat ||
            !(mapped.thresholds[g].threshold == base.thresholds[g].threshold))
          return {false, "threshold drift on instance " + std::to_string(i)};
    }
    return {true, "100 instances under x -> x^3 + x"};
  });

  h.criterion(7, "oracle scores dominate learned scores and power grows with alpha",
              [&]() -> Outcome {
                const GridRun* oracle_run = nullptr;
                const GridRun* softmax_run = nullptr;
                for (const auto& run : grid) {
                  if (run.label == "overall K=4 oracle") oracle_run = &run;
                  if (run.label == "overall K=4 softmax") softmax_run = &run;
                }
                if (!oracle_run || !softmax_run) return {false, "grid runs missing"};
                std::ostringstream detail;
                for (size_t a = 0; a < oracle_run->summary.rows.size(); ++a) {
                  const auto& orow = oracle_run->summary.rows[a];
                  const auto& srow = softmax_run->summary.rows[a];
                  const double op = orow.stats.overall_power.mean;
                  const double sp = srow.stats.overall_power.mean;
                  const double se = std::max(orow.stats.overall_power.se, srow.stats.overall_power.se);
                  if (op < sp - 2.0 * se)
                    return {false, "alpha=" + fmt3(orow.alpha) + ": oracle power " + fmt3(op) +
                                       " < softmax power " + fmt3(sp) + " - 2se"};
                  if (a > 0) {
                    const auto& prev_o = oracle_run->summary.rows[a - 1];
                    const auto& prev_s = softmax_run->summary.rows[a - 1];
                    if (op < prev_o.stats.overall_power.mean - 2.0 * orow.stats.overall_power.se)
                      return {false, "oracle power not monotone at alpha=" + fmt3(orow.alpha)};
                    if (sp < prev_s.stats.overall_power.mean - 2.0 * srow.stats.overall_power.se)
                      return {false, "softmax power not monotone at alpha=" + fmt3(srow.alpha)};
                  }
                  if (a + 1 == oracle_run->summary.rows.size())
                    detail << "at alpha=0.2: oracle " << fmt3(op) << " vs softmax " << fmt3(sp);
                }
                return {true, detail.str()};
              });

  h.criterion(8, "the population-optimal rule controls its marginal error", [&]() -> Outcome {
    psp::SimDesign d;
    d.K = 4;
    d.reps = 500;
    d.seed = 20260008ULL;
    d.alphas = {0.1};
    d.preset = psp::PartitionPreset::Overall;
    d.scores = psp::SimScores::Oracle;
    d.redraw_priors = false;
    d.with_oracle_rule = true;
    d.oracle_n_mc = 100000;
    d.threads = 2;
    const auto summary = psp::run_experiment(d);
    const auto* oracle_row = &summary.rows.back();
    if (oracle_row->method != "oracle") return {false, "oracle row missing"};
    const auto& ga = oracle_row->stats.groups[0];
    const double bound = 0.1 + 3.0 * ga.fdr.se;
    if (!(ga.mfdr <= bound))
      return {false, "mfdr " + fmt3(ga.mfdr) + " above bound " + fmt3(bound)};

    // the estimated rejection ratio at zero reduces to theta exactly
    auto eng = psp::rng::engine(5150, 0);
    const auto priors = psp::sample_priors(4, eng);
    const auto spec = psp::design_gmm(4, 10, priors);
    const auto curves = psp::estimate_curves(spec, psp::argmax_rule(psp::gmm_posterior(spec)),
                                             {1, 2, 3, 4}, 100000, 7);
    if (curves.grid.front() != 0.0 || curves.F0.front() != 1.0 || curves.F1.front() != 1.0)
      return {false, "curves do not anchor at zero"};
    if (curves.theta_R * curves.F0.front() / curves.F1.front() != curves.theta_R)
      return {false, "rejection ratio at zero differs from theta"};
    return {true, "mfdr " + fmt3(ga.mfdr) + " <= " + fmt3(bound) + "; ratio anchored at theta"};
  });

  h.criterion(9, "trivial pre-selection recovers clipped-score conformal selection",
              [&]() -> Outcome {
                std::mt19937_64 rng(90001);
                for (int i = 0; i < 100; ++i) {
                  const int m = std::uniform_int_distribution<int>(5, 200)(rng);
                  const int n = std::uniform_int_distribution<int>(5, 200)(rng);
                  const bool discrete = i % 2 == 0;
                  auto draw = [&]() {
                    if (discrete) return std::uniform_int_distribution<int>(0, 8)(rng) / 8.0;
                    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
                  };
                  std::vector<double> tmu(static_cast<size_t>(m)), hmu(static_cast<size_t>(n));
                  std::vector<uint8_t> in_region(static_cast<size_t>(n));
                  for (auto& v : tmu) v = draw();
                  for (auto& v : hmu) v = draw();
                  for (auto& v : in_region) v = std::uniform_int_distribution<int>(0, 1)(rng);
                  const double alpha = std::uniform_real_distribution<double>(0.02, 0.4)(rng);
                  psp::SelectionTask task;
                  task.alpha = alpha;
                  const auto res = psp::select_subjects(task, tmu, hmu, in_region);
                  const auto want = ref::clipped_selection(tmu, hmu, in_region, alpha);
                  if (res.selected != want)
                    return {false, "selection mismatch on instance " + std::to_string(i)};
                }
                return {true, "100 instances, identical selections"};
              });

  h.criterion(10, "bounded prediction sets control false coverage and reduce at L=1",
              [&]() -> Outcome {
                const int K = 6, reps = 500;
                std::vector<double> fcps;
                fcps.reserve(reps);
                for (int rep = 0; rep < reps; ++rep) {
                  const std::uint64_t base = psp::rng::substream(10100, static_cast<std::uint64_t>(rep));
                  auto eng = psp::rng::engine(base, 0);
                  const auto priors = psp::sample_priors(K, eng);
                  const auto spec = psp::design_gmm(K, 10, priors);
                  const auto holdout = psp::sample_dataset(spec, 600, psp::rng::substream(base, 1));
                  const auto target = psp::sample_dataset(spec, 600, psp::rng::substream(base, 2));
                  psp::InformativeSetTask task;
                  task.K = K;
                  task.L = 3;
                  task.alpha = 0.1;
                  const auto res =
                      psp::informative_sets(task, psp::gmm_posterior_matrix(spec, target.X),
                                            psp::gmm_posterior_matrix(spec, holdout.X), holdout.y);
                  for (const auto& set : res.sets)
                    if (static_cast<int>(set.size()) > 3)
                      return {false, "set larger than L at replication " + std::to_string(rep)};
                  fcps.push_back(psp::false_coverage_proportion(res.selected, res.sets, target.y));
                }
                const auto stats = psp::mean_se(fcps);
                const double bound = 0.1 + 3.0 * stats.se;
                if (!(stats.mean <= bound))
                  return {false, "fcr " + fmt3(stats.mean) + " above bound " + fmt3(bound)};

                // L=1 against overall classification on shared scalar scores
                for (int rep = 0; rep < 10; ++rep) {
                  const std::uint64_t base = psp::rng::substream(10200, static_cast<std::uint64_t>(rep));
                  auto eng = psp::rng::engine(base, 0);
                  const auto priors = psp::sample_priors(K, eng);
                  const auto spec = psp::design_gmm(K, 10, priors);
                  const auto holdout = psp::sample_dataset(spec, 600, psp::rng::substream(base, 1));
                  const auto target = psp::sample_dataset(spec, 600, psp::rng::substream(base, 2));
                  const psp::ScoreMatrix ts = psp::gmm_posterior_matrix(spec, target.X);
                  const psp::ScoreMatrix hs = psp::gmm_posterior_matrix(spec, holdout.X);
                  psp::InformativeSetTask task;
                  task.K = K;
                  task.L = 1;
                  task.alpha = 0.1;
                  const auto sets = psp::informative_sets(task, ts, hs, holdout.y);

                  auto pivot = [&](const psp::ScoreMatrix& mat, Eigen::Index row) {
                    const Eigen::RowVectorXd r = mat.row(row);
                    std::vector<double> sorted(r.data(), r.data() + K);
                    std::sort(sorted.begin(), sorted.end());
                    return 1.0 - sorted[static_cast<size_t>(K) - 2];
                  };
                  psp::ScoreMatrix ts2(ts.rows(), K), hs2(hs.rows(), K);
                  for (Eigen::Index j = 0; j < ts.rows(); ++j) ts2.row(j).setConstant(pivot(ts, j));
                  for (Eigen::Index i = 0; i < hs.rows(); ++i) hs2.row(i).setConstant(pivot(hs, i));
                  const auto pre_t = psp::argmax_preclassify(ts, 1);
                  const auto pre_h = psp::argmax_preclassify(hs, 2);
                  const auto part = psp::GroupPartition::overall(K, 0.1);
                  const auto report = psp::psp_run(ts2, hs2, pre_t, pre_h, holdout.y, part);
                  std::vector<int> decided;
                  for (size_t j = 0; j < report.decisions.size(); ++j)
                    if (report.decisions[j] != 0) decided.push_back(static_cast<int>(j));
                  if (decided != sets.selected)
                    return {false, "L=1 selections differ at replication " + std::to_string(rep)};
                }
                return {true, "fcr " + fmt3(stats.mean) + " <= " + fmt3(bound) +
                                  "; L=1 matches overall decisions on 10 runs"};
              });

  h.criterion(11, "numerical hygiene of the trainer gradient and posterior rows", [&]() -> Outcome {
    std::mt19937_64 rng(110001);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = 60, d = 4, K = 3;
    Eigen::MatrixXd X(n, d);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < d; ++c) X(i, c) = normal(rng);
      y[static_cast<size_t>(i)] = std::uniform_int_distribution<int>(1, K)(rng);
    }
    Eigen::MatrixXd W(d + 1, K);
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = 0.25 * normal(rng);
    const double l2 = 1e-3;
    const auto loss = [&](const Eigen::MatrixXd& weights) {
      return psp::softmax_loss(weights, X, y, K, l2);
    };
    const Eigen::MatrixXd grad = psp::softmax_gradient(W, X, y, K, l2);
    double worst = 0.0;
    for (int probe = 0; probe < 5; ++probe) {
      const auto r = std::uniform_int_distribution<Eigen::Index>(0, W.rows() - 1)(rng);
      const auto c = std::uniform_int_distribution<Eigen::Index>(0, W.cols() - 1)(rng);
      worst = std::max(worst, std::abs(ref::fd_partial(loss, W, r, c, 1e-4) - grad(r, c)));
    }
    if (worst > 1e-5) return {false, "gradient error " + fmt3(worst)};

    psp::GmmSpec spec;
    spec.K = 5;
    spec.d = 6;
    spec.priors = {0.1, 0.15, 0.2, 0.25, 0.3};
    spec.means = Eigen::MatrixXd::Random(5, 6) * 4.0;
    Eigen::MatrixXd pts(500, 6);
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
      for (Eigen::Index c = 0; c < pts.cols(); ++c) pts(i, c) = 30.0 * normal(rng);
    const psp::ScoreMatrix post = psp::gmm_posterior_matrix(spec, pts);
    for (Eigen::Index i = 0; i < post.rows(); ++i)
      if (std::abs(post.row(i).sum() - 1.0) > 1e-12)
        return {false, "posterior row sum off by more than 1e-12"};
    return {true, "max gradient error " + fmt3(worst) + "; 500 posterior rows within 1e-12"};
  });

  if (h.failures() == 0) {
    std::printf("acceptance suite: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance suite: %d criterion(s) failed\n", h.failures());
  return 1;
}
