#pragma once

#include <optional>
#include <vector>

#include "psp/core.hpp"

// Two applications of the selective p-value / adjusted-BH machinery beyond
// classification:
//   * subject selection: pick targets whose (unobserved) label lies in a
//     region of interest, with FDR control over the selection;
//   * informative prediction sets: report sets of at most L labels only for
//     subjects where such a set is trustworthy, with false coverage control.
// Both default to the trivial pre-selection rule (everything pre-selected);
// plug-in rules enter as 0/1 masks.

namespace psp {

struct SelectionTask {
  std::vector<int> region;  // labels of interest
  double alpha = 0.1;
};

struct SelectionResult {
  std::vector<int> pre_selected;    // indices that entered the inference step
  std::vector<Frac> pvalues;        // aligned with pre_selected
  std::vector<int> selected;        // final selection, ascending
  Frac theta_hat{1, 1};
  Frac threshold{0, 1};
  std::optional<long long> l_hat;
};

// target_mu / holdout_mu: the binary score of each subject;
// holdout_in_region: 1 when the hold-out label lies in the region.
// Pre-selection masks may be empty (treated as all ones).
SelectionResult select_subjects(const SelectionTask& task, const std::vector<double>& target_mu,
                                const std::vector<double>& holdout_mu,
                                const std::vector<uint8_t>& holdout_in_region,
                                const std::vector<uint8_t>& pre_target = {},
                                const std::vector<uint8_t>& pre_holdout = {});

struct InformativeSetTask {
  int K = 0;
  int L = 1;  // maximal set size, 1 <= L <= K-1
  double alpha = 0.1;
};

struct InformativeSetsResult {
  std::vector<std::vector<int>> sets;  // candidate set per target subject
  std::vector<int> pre_selected;
  std::vector<Frac> pvalues;  // aligned with pre_selected
  std::vector<int> selected;  // subjects whose sets are reported
  Frac theta_hat{1, 1};
  Frac threshold{0, 1};
  std::optional<long long> l_hat;
};

// Scores are posterior-style rows (one column per class). The candidate set
// of a subject keeps the labels whose score strictly exceeds the (K-L)-th
// smallest entry of its row, so its size is at most L (ties can shrink it,
// including to the empty set). A hold-out subject whose true label falls
// outside its own candidate set is a residual.
InformativeSetsResult informative_sets(const InformativeSetTask& task,
                                       const ScoreMatrix& target_scores,
                                       const ScoreMatrix& holdout_scores,
                                       const std::vector<int>& holdout_labels,
                                       const std::vector<uint8_t>& pre_target = {},
                                       const std::vector<uint8_t>& pre_holdout = {});

}  // namespace psp
