#include "psp/extensions.hpp"

#include <algorithm>

#include "psp/engine.hpp"

namespace psp {

namespace {

std::vector<uint8_t> ones_if_empty(const std::vector<uint8_t>& mask, size_t n, const char* what) {
  if (mask.empty()) return std::vector<uint8_t>(n, 1);
  if (mask.size() != n)
    throw Error(Errc::LengthMismatch, std::string(what) + ": pre-selection mask length mismatch");
  return mask;
}

// shared tail of both extensions: rank pre-selected target scores against the
// residual scores, then run the adjusted step-up search
struct RankedSelection {
  std::vector<int> pre_selected;
  std::vector<Frac> pvalues;
  std::vector<int> selected;
  Frac theta_hat;
  Frac threshold;
  std::optional<long long> l_hat;
};

RankedSelection rank_and_select(const std::vector<int>& pre_selected, const std::vector<double>& scores,
                                std::vector<double> residual_scores, long long holdout_pre_count,
                                double alpha) {
  RankedSelection out;
  out.pre_selected = pre_selected;
  std::sort(residual_scores.begin(), residual_scores.end());
  const long long R = static_cast<long long>(residual_scores.size());
  out.theta_hat = Frac{1 + R, 1 + holdout_pre_count};

  GroupPValues pv;
  pv.group = 0;
  pv.subjects = pre_selected;
  pv.residual_total = R;
  pv.pvalues.reserve(pre_selected.size());
  for (int j : pre_selected) {
    const double s = scores[static_cast<size_t>(j)];
    const auto it = std::lower_bound(residual_scores.begin(), residual_scores.end(), s);
    pv.pvalues.push_back(Frac{1 + static_cast<long long>(residual_scores.end() - it), 1 + R});
  }

  const GroupThreshold th =
      bh_threshold(pv, out.theta_hat, alpha, static_cast<long long>(pre_selected.size()));
  out.threshold = th.threshold;
  out.l_hat = th.l_hat;
  out.pvalues = std::move(pv.pvalues);
  if (th.l_hat) {
    for (size_t i = 0; i < out.pre_selected.size(); ++i)
      if (out.pvalues[i] <= th.threshold) out.selected.push_back(out.pre_selected[i]);
  }
  return out;
}

}  // namespace

SelectionResult select_subjects(const SelectionTask& task, const std::vector<double>& target_mu,
                                const std::vector<double>& holdout_mu,
                                const std::vector<uint8_t>& holdout_in_region,
                                const std::vector<uint8_t>& pre_target,
                                const std::vector<uint8_t>& pre_holdout) {
  if (!(task.alpha > 0.0 && task.alpha < 1.0))
    throw Error(Errc::AlphaOutOfRange, "select_subjects: alpha must lie in (0,1)");
  if (holdout_mu.size() != holdout_in_region.size())
    throw Error(Errc::LengthMismatch, "select_subjects: hold-out scores vs region indicators");
  const std::vector<uint8_t> pt = ones_if_empty(pre_target, target_mu.size(), "select_subjects targets");
  const std::vector<uint8_t> ph = ones_if_empty(pre_holdout, holdout_mu.size(), "select_subjects hold-out");

  std::vector<int> pre_selected;
  for (size_t j = 0; j < target_mu.size(); ++j)
    if (pt[j]) pre_selected.push_back(static_cast<int>(j));
  long long holdout_pre_count = 0;
  std::vector<double> residual_scores;
  for (size_t i = 0; i < holdout_mu.size(); ++i) {
    if (!ph[i]) continue;
    ++holdout_pre_count;
    if (!holdout_in_region[i]) residual_scores.push_back(holdout_mu[i]);
  }

  RankedSelection ranked =
      rank_and_select(pre_selected, target_mu, std::move(residual_scores), holdout_pre_count, task.alpha);
  SelectionResult res;
  res.pre_selected = std::move(ranked.pre_selected);
  res.pvalues = std::move(ranked.pvalues);
  res.selected = std::move(ranked.selected);
  res.theta_hat = ranked.theta_hat;
  res.threshold = ranked.threshold;
  res.l_hat = ranked.l_hat;
  return res;
}

namespace {

// labels whose score strictly exceeds the (K-L)-th smallest entry of the
// row; the pivot doubles as the set-construction score via s = 1 - pivot
struct RowCandidates {
  std::vector<int> set;
  double pivot = 0.0;
};

RowCandidates candidate_set(const Eigen::RowVectorXd& row, int L) {
  const int K = static_cast<int>(row.size());
  std::vector<double> sorted(row.data(), row.data() + K);
  std::sort(sorted.begin(), sorted.end());
  RowCandidates rc;
  rc.pivot = sorted[static_cast<size_t>(K - L) - 1];
  for (int k = 0; k < K; ++k)
    if (row(k) > rc.pivot) rc.set.push_back(k + 1);
  return rc;
}

}  // namespace

InformativeSetsResult informative_sets(const InformativeSetTask& task,
                                       const ScoreMatrix& target_scores,
                                       const ScoreMatrix& holdout_scores,
                                       const std::vector<int>& holdout_labels,
                                       const std::vector<uint8_t>& pre_target,
                                       const std::vector<uint8_t>& pre_holdout) {
  if (task.L < 1 || task.L > task.K - 1)
    throw Error(Errc::InvalidL, "informative_sets: L must satisfy 1 <= L <= K-1");
  if (!(task.alpha > 0.0 && task.alpha < 1.0))
    throw Error(Errc::AlphaOutOfRange, "informative_sets: alpha must lie in (0,1)");
  detail::check_scores(target_scores, task.K, "informative_sets target scores");
  detail::check_scores(holdout_scores, task.K, "informative_sets hold-out scores");
  if (static_cast<size_t>(holdout_scores.rows()) != holdout_labels.size())
    throw Error(Errc::LengthMismatch, "informative_sets: hold-out scores vs labels");
  detail::check_labels(holdout_labels, task.K, "informative_sets hold-out labels");
  const std::vector<uint8_t> pt =
      ones_if_empty(pre_target, static_cast<size_t>(target_scores.rows()), "informative_sets targets");
  const std::vector<uint8_t> ph =
      ones_if_empty(pre_holdout, static_cast<size_t>(holdout_scores.rows()), "informative_sets hold-out");

  InformativeSetsResult res;
  res.sets.reserve(static_cast<size_t>(target_scores.rows()));
  std::vector<double> target_s(static_cast<size_t>(target_scores.rows()));
  for (Eigen::Index j = 0; j < target_scores.rows(); ++j) {
    RowCandidates rc = candidate_set(target_scores.row(j), task.L);
    target_s[static_cast<size_t>(j)] = 1.0 - rc.pivot;
    res.sets.push_back(std::move(rc.set));
  }

  std::vector<int> pre_selected;
  for (Eigen::Index j = 0; j < target_scores.rows(); ++j)
    if (pt[static_cast<size_t>(j)]) pre_selected.push_back(static_cast<int>(j));

  long long holdout_pre_count = 0;
  std::vector<double> residual_scores;
  for (Eigen::Index i = 0; i < holdout_scores.rows(); ++i) {
    if (!ph[static_cast<size_t>(i)]) continue;
    ++holdout_pre_count;
    const RowCandidates rc = candidate_set(holdout_scores.row(i), task.L);
    const int y = holdout_labels[static_cast<size_t>(i)];
    if (std::find(rc.set.begin(), rc.set.end(), y) == rc.set.end())
      residual_scores.push_back(1.0 - rc.pivot);
  }

  RankedSelection ranked =
      rank_and_select(pre_selected, target_s, std::move(residual_scores), holdout_pre_count, task.alpha);
  res.pre_selected = std::move(ranked.pre_selected);
  res.pvalues = std::move(ranked.pvalues);
  res.selected = std::move(ranked.selected);
  res.theta_hat = ranked.theta_hat;
  res.threshold = ranked.threshold;
  res.l_hat = ranked.l_hat;
  return res;
}

}  // namespace psp
