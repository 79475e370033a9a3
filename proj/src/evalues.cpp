#include "psp/evalues.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "psp/models.hpp"

namespace psp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double score_threshold(const GroupScores& scores, const CalibrationState& calib, int group,
                       double alpha_prime) {
  if (!(alpha_prime > 0.0 && alpha_prime < 1.0))
    throw Error(Errc::AlphaOutOfRange, "score_threshold: alpha_prime must lie in (0,1)");

  std::vector<double> targets = scores.target;
  std::vector<double> residuals = scores.residual;
  std::sort(targets.begin(), targets.end());
  std::sort(residuals.begin(), residuals.end());

  std::vector<double> candidates;
  candidates.reserve(targets.size() + residuals.size());
  candidates.insert(candidates.end(), targets.begin(), targets.end());
  candidates.insert(candidates.end(), residuals.begin(), residuals.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const long long m_g = static_cast<long long>(targets.size());
  const long long holdout_total = calib.holdout_total[static_cast<size_t>(group)];

  // ascending sweep: counts at-or-above shrink monotonically, so two cursors
  // walk each sorted list once
  size_t ti = 0, ri = 0;
  for (double t : candidates) {
    while (ti < targets.size() && targets[ti] < t) ++ti;
    while (ri < residuals.size() && residuals[ri] < t) ++ri;
    const long long tc = static_cast<long long>(targets.size() - ti);
    const long long rc = static_cast<long long>(residuals.size() - ri);
    if (tc == 0) continue;  // zero-denominator candidates fail the criterion
    // m_g*(1+rc) <= alpha' * (1+holdout_total) * tc; the (1+R) factor of the
    // ratio cancels exactly; integer side exact, single rounding on alpha'
    const double lhs = static_cast<double>(m_g * (1 + rc));
    const double rhs = alpha_prime * static_cast<double>((1 + holdout_total) * tc);
    if (lhs <= rhs) return t;
  }
  return kInf;
}

GroupEValues selective_evalues(const GroupScores& scores, const CalibrationState& calib, int group,
                               double t_hat) {
  GroupEValues ev;
  ev.group = group;
  ev.subjects = scores.subjects;
  ev.t_hat = t_hat;

  long long rc = 0;
  for (double r : scores.residual)
    if (r >= t_hat) ++rc;
  // (1+R)/theta_hat * 1/(1+rc) reduces to (1+holdout_total)/(1+rc)
  const long long num = 1 + calib.holdout_total[static_cast<size_t>(group)];
  const long long den = 1 + rc;
  ev.evalues.reserve(scores.target.size());
  for (double s : scores.target) ev.evalues.push_back(Frac{s >= t_hat ? num : 0, den});
  return ev;
}

EDecisionFragment ebh_decide(const GroupEValues& evals, double alpha, long long m_g) {
  if (static_cast<long long>(evals.evalues.size()) != m_g)
    throw Error(Errc::LengthMismatch, "ebh_decide: m_g does not match the number of e-values");
  EDecisionFragment frag;
  frag.threshold.group = evals.group;
  if (m_g == 0) return frag;

  std::vector<Frac> sorted = evals.evalues;
  std::sort(sorted.begin(), sorted.end(), [](const Frac& a, const Frac& b) { return b < a; });

  for (long long l = m_g; l >= 1; --l) {
    const Frac e = sorted[static_cast<size_t>(l - 1)];
    if (e.num == 0) continue;
    // e_(l) >= m_g/(l*alpha): alpha*(e.num*l) >= m_g*e.den
    const double lhs = alpha * static_cast<double>(e.num * l);
    const double rhs = static_cast<double>(m_g * e.den);
    if (lhs >= rhs) {
      frag.threshold.l_hat = l;
      frag.threshold.value = e;
      break;
    }
  }
  if (frag.threshold.value) {
    for (size_t i = 0; i < evals.evalues.size(); ++i)
      if (evals.evalues[i] >= *frag.threshold.value) frag.decided_subjects.push_back(evals.subjects[i]);
  }
  return frag;
}

EDecisionReport epsp_run(const ScoreMatrix& target_scores, const ScoreMatrix& holdout_scores,
                         const std::vector<int>& pre_target, const std::vector<int>& pre_holdout,
                         const std::vector<int>& holdout_truth, const GroupPartition& partition,
                         const std::vector<double>& alpha_prime) {
  if (static_cast<size_t>(partition.num_groups()) != alpha_prime.size())
    throw Error(Errc::LengthMismatch, "epsp_run: one alpha_prime per group required");
  for (double a : alpha_prime)
    if (!(a > 0.0 && a < 1.0))
      throw Error(Errc::AlphaOutOfRange, "epsp_run: alpha_prime must lie in (0,1)");
  if (static_cast<size_t>(target_scores.rows()) != pre_target.size())
    throw Error(Errc::LengthMismatch, "epsp_run: target scores vs pre-labels");
  if (static_cast<size_t>(holdout_scores.rows()) != pre_holdout.size())
    throw Error(Errc::LengthMismatch, "epsp_run: hold-out scores vs pre-labels");
  detail::check_scores(target_scores, partition.num_classes(), "epsp_run target scores");
  detail::check_scores(holdout_scores, partition.num_classes(), "epsp_run hold-out scores");

  const CalibrationState calib = build_calibration(pre_target, pre_holdout, holdout_truth, partition);

  EDecisionReport out;
  const size_t m = pre_target.size();
  out.report.decisions.assign(m, 0);
  out.report.pre_labels = pre_target;
  out.report.group_of.resize(m);
  for (size_t j = 0; j < m; ++j) out.report.group_of[j] = partition.group_of(pre_target[j]);
  out.report.values.assign(m, 0.0);
  out.report.values_exact.assign(m, Frac{0, 1});

  for (int g = 0; g < partition.num_groups(); ++g) {
    const GroupScores gs = collect_group_scores(target_scores, holdout_scores, calib, partition, g);
    const double t_hat = score_threshold(gs, calib, g, alpha_prime[static_cast<size_t>(g)]);
    GroupEValues ev = selective_evalues(gs, calib, g, t_hat);
    ev.alpha_prime = alpha_prime[static_cast<size_t>(g)];
    const EDecisionFragment frag =
        ebh_decide(ev, partition.alpha(g), calib.target_total[static_cast<size_t>(g)]);

    for (size_t i = 0; i < ev.subjects.size(); ++i) {
      const auto j = static_cast<size_t>(ev.subjects[i]);
      out.report.values[j] = ev.evalues[i].value();
      out.report.values_exact[j] = ev.evalues[i];
    }
    for (int j : frag.decided_subjects)
      out.report.decisions[static_cast<size_t>(j)] = pre_target[static_cast<size_t>(j)];
    out.ethresholds.push_back(frag.threshold);
    out.score_cutoffs.push_back(t_hat);

    // keep the p-engine threshold slot empty but aligned by group
    GroupThreshold th;
    th.group = g;
    out.report.thresholds.push_back(th);
  }
  return out;
}

}  // namespace psp
