#pragma once

#include <vector>

#include "psp/core.hpp"

// The decision engine: selective p-values, the generalized BH threshold
// search, and the final accept/abstain decisions, all per label group.
//
// Within a group the p-value of a target subject is the (+1-corrected) rank
// of its pre-assigned-class score among the hold-out residual scores of the
// group; ties count against the subject (>= comparison). Comparisons between
// p-values and the alpha budget are carried out with the integer side exact
// and a single rounding on the alpha side, so thresholds are reproducible
// and match exhaustive rational scans.

namespace psp {

// scores of one group, gathered from the full matrices: each subject
// contributes the score of its pre-assigned class
struct GroupScores {
  int group = 0;
  std::vector<int> subjects;     // target indices, ascending
  std::vector<double> target;    // score of the pre-assigned class, same order
  std::vector<double> residual;  // hold-out residual scores of the group
};

GroupScores collect_group_scores(const ScoreMatrix& target_scores, const ScoreMatrix& holdout_scores,
                                 const CalibrationState& calib, const GroupPartition& partition, int group);

struct GroupPValues {
  int group = 0;
  std::vector<int> subjects;   // ascending target indices
  std::vector<Frac> pvalues;   // (1 + #{residual >= score}) / (1 + #residual)
  long long residual_total = 0;
};

std::vector<GroupPValues> selective_pvalues(const ScoreMatrix& target_scores,
                                            const ScoreMatrix& holdout_scores,
                                            const CalibrationState& calib,
                                            const GroupPartition& partition);

// largest l with p_(l) <= l*alpha / (theta_hat * m_g); threshold 0 when none
GroupThreshold bh_threshold(const GroupPValues& pvals, const Frac& theta_hat, double alpha,
                            long long m_g);

DecisionReport psp_decide(const std::vector<int>& pre_labels,
                          const std::vector<GroupPValues>& pvalue_groups,
                          const std::vector<GroupThreshold>& thresholds,
                          const GroupPartition& partition);

// end-to-end run: calibration -> p-values -> thresholds -> decisions
DecisionReport psp_run(const ScoreMatrix& target_scores, const ScoreMatrix& holdout_scores,
                       const std::vector<int>& pre_target, const std::vector<int>& pre_holdout,
                       const std::vector<int>& holdout_truth, const GroupPartition& partition);

}  // namespace psp
