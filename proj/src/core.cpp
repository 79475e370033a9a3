#include "psp/core.hpp"

#include <algorithm>

namespace psp {

GroupPartition validate_partition(const std::vector<std::vector<int>>& groups,
                                  const std::vector<double>& alphas, int K) {
  if (K < 2) throw Error(Errc::BadConfig, "at least two classes are required, got K=" + std::to_string(K));
  if (groups.empty()) throw Error(Errc::BadConfig, "partition must contain at least one group");
  if (groups.size() != alphas.size())
    throw Error(Errc::BadConfig, "number of alphas (" + std::to_string(alphas.size()) +
                                     ") does not match number of groups (" + std::to_string(groups.size()) + ")");

  GroupPartition p;
  p.K_ = K;
  p.group_of_.assign(static_cast<size_t>(K) + 1, -1);
  for (size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw Error(Errc::BadConfig, "group " + std::to_string(g) + " is empty");
    std::vector<int> sorted = groups[g];
    std::sort(sorted.begin(), sorted.end());
    for (int label : sorted) {
      if (label < 1 || label > K)
        throw Error(Errc::LabelOutOfRange,
                    "label " + std::to_string(label) + " outside {1.." + std::to_string(K) + "}");
      // a duplicate inside one group trips this as well
      if (p.group_of_[label] != -1)
        throw Error(Errc::OverlappingGroups, "label " + std::to_string(label) + " appears in more than one group");
      p.group_of_[label] = static_cast<int>(g);
    }
    if (!(alphas[g] > 0.0 && alphas[g] < 1.0))
      throw Error(Errc::AlphaOutOfRange, "alpha for group " + std::to_string(g) + " must lie in (0,1)");
    p.groups_.push_back(std::move(sorted));
  }
  for (int k = 1; k <= K; ++k)
    if (p.group_of_[k] == -1)
      throw Error(Errc::UncoveredLabel, "label " + std::to_string(k) + " is not covered by any group");
  p.alphas_ = alphas;
  return p;
}

GroupPartition GroupPartition::overall(int K, double alpha) {
  std::vector<int> all(static_cast<size_t>(K));
  for (int k = 1; k <= K; ++k) all[static_cast<size_t>(k) - 1] = k;
  return validate_partition({all}, {alpha}, K);
}

GroupPartition GroupPartition::classwise(int K, double alpha) {
  return classwise(K, std::vector<double>(static_cast<size_t>(K), alpha));
}

GroupPartition GroupPartition::classwise(int K, const std::vector<double>& alphas) {
  std::vector<std::vector<int>> groups;
  groups.reserve(static_cast<size_t>(K));
  for (int k = 1; k <= K; ++k) groups.push_back({k});
  return validate_partition(groups, alphas, K);
}

namespace detail {

void check_labels(const std::vector<int>& labels, int K, const char* what) {
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 1 || labels[i] > K)
      throw Error(Errc::LabelOutOfRange, std::string(what) + ": label " + std::to_string(labels[i]) +
                                             " at index " + std::to_string(i) + " outside {1.." +
                                             std::to_string(K) + "}");
}

void check_scores(const ScoreMatrix& scores, int K, const char* what) {
  if (scores.cols() != K)
    throw Error(Errc::LengthMismatch, std::string(what) + ": score matrix has " + std::to_string(scores.cols()) +
                                          " columns, expected " + std::to_string(K));
  if (!scores.allFinite())
    throw Error(Errc::NonFiniteScores, std::string(what) + ": score matrix contains non-finite entries");
}

}  // namespace detail

}  // namespace psp
