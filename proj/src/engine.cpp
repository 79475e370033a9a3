#include "psp/engine.hpp"

#include <algorithm>

#include "psp/models.hpp"

namespace psp {

GroupScores collect_group_scores(const ScoreMatrix& target_scores, const ScoreMatrix& holdout_scores,
                                 const CalibrationState& calib, const GroupPartition& partition, int group) {
  GroupScores gs;
  gs.group = group;
  std::vector<std::pair<int, double>> entries;
  for (int label : partition.labels(group)) {
    const size_t k = static_cast<size_t>(label) - 1;
    for (int j : calib.target_sets[k]) {
      if (j < 0 || j >= target_scores.rows())
        throw Error(Errc::IndexOutOfRange, "target index " + std::to_string(j) + " outside score matrix");
      entries.emplace_back(j, target_scores(j, label - 1));
    }
    for (int i : calib.residual_sets[k]) {
      if (i < 0 || i >= holdout_scores.rows())
        throw Error(Errc::IndexOutOfRange, "hold-out index " + std::to_string(i) + " outside score matrix");
      gs.residual.push_back(holdout_scores(i, label - 1));
    }
  }
  std::sort(entries.begin(), entries.end());
  gs.subjects.reserve(entries.size());
  gs.target.reserve(entries.size());
  for (const auto& [j, s] : entries) {
    gs.subjects.push_back(j);
    gs.target.push_back(s);
  }
  return gs;
}

std::vector<GroupPValues> selective_pvalues(const ScoreMatrix& target_scores,
                                            const ScoreMatrix& holdout_scores,
                                            const CalibrationState& calib,
                                            const GroupPartition& partition) {
  detail::check_scores(target_scores, partition.num_classes(), "selective_pvalues target scores");
  detail::check_scores(holdout_scores, partition.num_classes(), "selective_pvalues hold-out scores");

  std::vector<GroupPValues> out;
  out.reserve(static_cast<size_t>(partition.num_groups()));
  for (int g = 0; g < partition.num_groups(); ++g) {
    GroupScores gs = collect_group_scores(target_scores, holdout_scores, calib, partition, g);
    GroupPValues pv;
    pv.group = g;
    pv.subjects = std::move(gs.subjects);
    pv.residual_total = static_cast<long long>(gs.residual.size());
    std::sort(gs.residual.begin(), gs.residual.end());
    pv.pvalues.reserve(pv.subjects.size());
    for (double s : gs.target) {
      // #{residual >= s}: ties count against the subject
      const auto it = std::lower_bound(gs.residual.begin(), gs.residual.end(), s);
      const long long count = static_cast<long long>(gs.residual.end() - it);
      pv.pvalues.push_back(Frac{1 + count, 1 + pv.residual_total});
    }
    out.push_back(std::move(pv));
  }
  return out;
}

GroupThreshold bh_threshold(const GroupPValues& pvals, const Frac& theta_hat, double alpha,
                            long long m_g) {
  if (static_cast<long long>(pvals.pvalues.size()) != m_g)
    throw Error(Errc::LengthMismatch, "bh_threshold: m_g does not match the number of p-values");
  GroupThreshold th;
  th.group = pvals.group;
  if (m_g == 0) return th;  // empty group: threshold 0, nothing to decide

  // deterministic total order: exact p-value, then subject index
  std::vector<std::pair<Frac, int>> order(pvals.pvalues.size());
  for (size_t i = 0; i < pvals.pvalues.size(); ++i)
    order[i] = {pvals.pvalues[i], pvals.subjects[i]};
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first < b.first) return true;
    if (b.first < a.first) return false;
    return a.second < b.second;
  });

  for (long long l = m_g; l >= 1; --l) {
    const Frac p = order[static_cast<size_t>(l - 1)].first;
    // p <= l*alpha/(theta*m_g), cross-multiplied; integer side exact,
    // single rounding on the alpha side
    const double lhs = static_cast<double>(p.num * theta_hat.num * m_g);
    const double rhs = alpha * static_cast<double>(l * theta_hat.den * p.den);
    if (lhs <= rhs) {
      th.l_hat = l;
      th.threshold = p;
      break;
    }
  }
  return th;
}

DecisionReport psp_decide(const std::vector<int>& pre_labels,
                          const std::vector<GroupPValues>& pvalue_groups,
                          const std::vector<GroupThreshold>& thresholds,
                          const GroupPartition& partition) {
  if (pvalue_groups.size() != thresholds.size())
    throw Error(Errc::LengthMismatch, "psp_decide: one threshold per p-value group required");
  DecisionReport report;
  const size_t m = pre_labels.size();
  report.decisions.assign(m, 0);
  report.pre_labels = pre_labels;
  report.group_of.resize(m);
  for (size_t j = 0; j < m; ++j) report.group_of[j] = partition.group_of(pre_labels[j]);
  report.values.assign(m, 1.0);
  report.values_exact.assign(m, Frac{1, 1});
  report.thresholds = thresholds;

  for (size_t gi = 0; gi < pvalue_groups.size(); ++gi) {
    const GroupPValues& pv = pvalue_groups[gi];
    const GroupThreshold& th = thresholds[gi];
    if (pv.group != th.group)
      throw Error(Errc::LengthMismatch, "psp_decide: group order mismatch between p-values and thresholds");
    for (size_t i = 0; i < pv.subjects.size(); ++i) {
      const auto j = static_cast<size_t>(pv.subjects[i]);
      if (j >= m) throw Error(Errc::IndexOutOfRange, "psp_decide: subject index outside pre-label vector");
      report.values[j] = pv.pvalues[i].value();
      report.values_exact[j] = pv.pvalues[i];
      if (th.l_hat && pv.pvalues[i] <= th.threshold) report.decisions[j] = pre_labels[j];
    }
  }
  return report;
}

DecisionReport psp_run(const ScoreMatrix& target_scores, const ScoreMatrix& holdout_scores,
                       const std::vector<int>& pre_target, const std::vector<int>& pre_holdout,
                       const std::vector<int>& holdout_truth, const GroupPartition& partition) {
  if (static_cast<size_t>(target_scores.rows()) != pre_target.size())
    throw Error(Errc::LengthMismatch, "psp_run: target scores vs pre-labels");
  if (static_cast<size_t>(holdout_scores.rows()) != pre_holdout.size())
    throw Error(Errc::LengthMismatch, "psp_run: hold-out scores vs pre-labels");

  const CalibrationState calib = build_calibration(pre_target, pre_holdout, holdout_truth, partition);
  const std::vector<GroupPValues> pvs = selective_pvalues(target_scores, holdout_scores, calib, partition);
  std::vector<GroupThreshold> ths;
  ths.reserve(pvs.size());
  for (int g = 0; g < partition.num_groups(); ++g)
    ths.push_back(bh_threshold(pvs[static_cast<size_t>(g)], calib.theta_hat[static_cast<size_t>(g)],
                               partition.alpha(g), calib.target_total[static_cast<size_t>(g)]));
  return psp_decide(pre_target, pvs, ths, partition);
}

}  // namespace psp
