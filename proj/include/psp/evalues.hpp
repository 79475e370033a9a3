#pragma once

#include <optional>
#include <vector>

#include "psp/core.hpp"
#include "psp/engine.hpp"

// The e-value variant of the decision engine. Per group it
//   1. picks a data-driven score cutoff t_hat from the finite candidate set
//      of target and residual scores,
//   2. turns scores into selective e-values that are zero below the cutoff
//      and share one common positive value at or above it,
//   3. applies the eBH step-up rule at the group's alpha.
// With alpha_prime equal to the group alpha this reproduces the p-value
// engine decision for decision; other choices can only decide fewer subjects.

namespace psp {

struct GroupEValues {
  int group = 0;
  std::vector<int> subjects;  // ascending target indices
  std::vector<Frac> evalues;  // exact fractions; zero or the common value
  double t_hat = 0.0;         // +inf when no candidate qualified
  double alpha_prime = 0.0;
};

struct EThreshold {
  int group = 0;
  std::optional<Frac> value;  // nullopt means +inf (everyone abstains)
  std::optional<long long> l_hat;
};

// smallest candidate score such that
//   m_g/(1+R) * (1 + #{residual >= t}) / #{target >= t}  <=  alpha_prime / theta_hat;
// +inf when no candidate satisfies it (a zero target count fails the test)
double score_threshold(const GroupScores& scores, const CalibrationState& calib, int group,
                       double alpha_prime);

GroupEValues selective_evalues(const GroupScores& scores, const CalibrationState& calib, int group,
                               double t_hat);

// eBH step-up: largest l with e_(l) >= m_g/(l*alpha) over the descending
// sort; decisions are e_j >= e_(l_hat), so ties at the threshold all decide
struct EDecisionFragment {
  EThreshold threshold;
  std::vector<int> decided_subjects;  // ascending target indices
};
EDecisionFragment ebh_decide(const GroupEValues& evals, double alpha, long long m_g);

// Full e-value report: same decision layout as the p-value engine plus the
// per-group score cutoffs and eBH thresholds.
struct EDecisionReport {
  DecisionReport report;                // values carry the e-values
  std::vector<EThreshold> ethresholds;  // one per group
  std::vector<double> score_cutoffs;    // t_hat per group
};

EDecisionReport epsp_run(const ScoreMatrix& target_scores, const ScoreMatrix& holdout_scores,
                         const std::vector<int>& pre_target, const std::vector<int>& pre_holdout,
                         const std::vector<int>& holdout_truth, const GroupPartition& partition,
                         const std::vector<double>& alpha_prime);

}  // namespace psp
