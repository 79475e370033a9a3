#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Core domain types for selective classification with an abstain option.
//
// Conventions used throughout the library:
//   * class labels are 1-based integers in {1..K};
//   * decision 0 means "abstain" (no classification is made);
//   * subject indices are 0-based positions into the target / hold-out arrays;
//   * group indices are 0-based positions into a GroupPartition.
//
// All types below are plain immutable-after-construction values and are safe
// to share across threads.

namespace psp {

using ScoreMatrix = Eigen::MatrixXd;  // one row per subject, one column per class

enum class Errc {
  // configuration / usage errors
  OverlappingGroups,
  UncoveredLabel,
  AlphaOutOfRange,
  InvalidL,
  EmptyInput,
  BadConfig,
  // data errors
  EmptyScores,
  LengthMismatch,
  LabelOutOfRange,
  IndexOutOfRange,
  MissingClass,
  NonFiniteLoss,
  NonFiniteScores,
  NoGroupMembers,
  NoFeasibleThreshold,
  ZeroCalibration,
  BadData,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }
  // true for errors caused by invalid configuration rather than bad data
  bool is_config() const {
    switch (code_) {
      case Errc::OverlappingGroups:
      case Errc::UncoveredLabel:
      case Errc::AlphaOutOfRange:
      case Errc::InvalidL:
      case Errc::EmptyInput:
      case Errc::BadConfig:
        return true;
      default:
        return false;
    }
  }

 private:
  Errc code_;
};

// Exact fraction with positive denominator. Conformal p-values and selective
// e-values are counts over counts, so they are stored exactly and compared
// without floating-point drift; value() gives the double view for reports.
struct Frac {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Frac& a, const Frac& b) {
    return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<(const Frac& a, const Frac& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Frac& a, const Frac& b) { return a < b || a == b; }
  friend bool operator>(const Frac& a, const Frac& b) { return b < a; }
  friend bool operator>=(const Frac& a, const Frac& b) { return b <= a; }
};

// Feature matrix plus (optionally empty) 1-based labels.
struct Dataset {
  Eigen::MatrixXd X;      // n x d
  std::vector<int> y;     // size n, or empty for unlabeled data

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
};

// Disjoint label groups G_1..G_G covering {1..K}, each with its own target
// error level alpha in (0,1). Build through validate_partition() or the
// overall()/classwise() presets.
class GroupPartition {
 public:
  GroupPartition() = default;

  int num_classes() const { return K_; }
  int num_groups() const { return static_cast<int>(groups_.size()); }
  const std::vector<int>& labels(int g) const { return groups_[g]; }
  double alpha(int g) const { return alphas_[g]; }
  const std::vector<double>& alphas() const { return alphas_; }
  // group index of a 1-based class label
  int group_of(int label) const { return group_of_[label]; }

  static GroupPartition overall(int K, double alpha);
  static GroupPartition classwise(int K, double alpha);
  static GroupPartition classwise(int K, const std::vector<double>& alphas);

  friend GroupPartition validate_partition(const std::vector<std::vector<int>>& groups,
                                           const std::vector<double>& alphas, int K);

 private:
  int K_ = 0;
  std::vector<std::vector<int>> groups_;  // sorted labels per group
  std::vector<double> alphas_;
  std::vector<int> group_of_;  // size K+1, label -> group index
};

// Validates disjointness, coverage of {1..K} and alpha ranges; throws
// Error{OverlappingGroups|UncoveredLabel|AlphaOutOfRange|BadConfig} otherwise.
GroupPartition validate_partition(const std::vector<std::vector<int>>& groups,
                                  const std::vector<double>& alphas, int K);

// Pre-classification bookkeeping: for each class k the target set S_k and
// hold-out set S-bar_k, the hold-out residual set R-bar_k (members of
// S-bar_k whose true label differs from k), and per group the estimate
// theta_hat = (1 + sum of residual sizes) / (1 + sum of hold-out sizes).
struct CalibrationState {
  int K = 0;
  std::vector<std::vector<int>> target_sets;    // S_k, indices into the target data
  std::vector<std::vector<int>> holdout_sets;   // S-bar_k, indices into the hold-out data
  std::vector<std::vector<int>> residual_sets;  // R-bar_k subset of S-bar_k

  // per-group tallies and the theta_hat estimate
  std::vector<long long> target_total;    // sum over k in G_g of |S_k|
  std::vector<long long> holdout_total;   // sum over k in G_g of |S-bar_k|
  std::vector<long long> residual_total;  // sum over k in G_g of |R-bar_k|
  std::vector<Frac> theta_hat;
};

// Per-group decision threshold: T_hat is the l_hat-th smallest p-value when
// l_hat exists, and 0/1 (i.e. zero) when no index qualifies.
struct GroupThreshold {
  int group = 0;
  Frac threshold{0, 1};
  std::optional<long long> l_hat;
};

// Final per-subject output of a PSP run. decisions[j] is either 0 or
// pre_labels[j]; values[j] is the selective p-value (or e-value for the
// e-value pipeline) that produced the decision.
struct DecisionReport {
  std::vector<int> decisions;
  std::vector<int> pre_labels;
  std::vector<int> group_of;        // group index per subject
  std::vector<double> values;
  std::vector<Frac> values_exact;
  std::vector<GroupThreshold> thresholds;  // one per group
};

namespace detail {
// throws LabelOutOfRange unless every label is in {1..K}
void check_labels(const std::vector<int>& labels, int K, const char* what);
// throws NonFiniteScores / LengthMismatch on bad score matrices
void check_scores(const ScoreMatrix& scores, int K, const char* what);
}  // namespace detail

}  // namespace psp
