#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "psp/core.hpp"

// Pre-classification rules and score functions. Both are plug-in points: the
// library ships an argmax rule with randomized tie-breaking, a multinomial
// logistic trainer, and the closed-form posterior of a unit-covariance
// Gaussian mixture. Any user-supplied rule works as long as it was fit
// independently of the target and hold-out data.

namespace psp {

// score function: feature vector -> one confidence value per class
using ScoreFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// pre-classification rule: (feature vector, per-subject randomness draw) -> label.
// Hard rules are free to ignore the draw.
using PreClassifier = std::function<int(const Eigen::VectorXd&, std::uint64_t)>;

// Per-row argmax with uniform tie-breaking. Row j uses a randomness stream
// derived from (rng_seed, j), so labels are order-independent and two calls
// with the same scores and seed agree. Ties are detected by exact floating
// comparison.
std::vector<int> argmax_preclassify(const ScoreMatrix& scores, std::uint64_t rng_seed);

// argmax rule over a score function, usable wherever a PreClassifier is expected
PreClassifier argmax_rule(ScoreFunction mu);

// Builds the pre-classification sets S_k / S-bar_k, the hold-out residual
// sets R-bar_k, and the per-group theta_hat estimates.
CalibrationState build_calibration(const std::vector<int>& pre_target,
                                   const std::vector<int>& pre_holdout,
                                   const std::vector<int>& holdout_truth,
                                   const GroupPartition& partition);

// ---------------------------------------------------------------------------
// Built-in trainer: multinomial logistic regression fit by full-batch
// gradient descent on the cross-entropy loss with an L2 penalty on the
// non-intercept weights. Features are standardized internally (statistics
// from the training split only); the L2 term is applied as a proximal step
// so extreme penalties shrink weights instead of diverging.

struct SoftmaxOptions {
  int epochs = 500;
  double step_size = 0.1;
  double l2 = 1e-4;
};

struct SoftmaxModel {
  Eigen::MatrixXd weights;       // (d+1) x K, row 0 is the intercept
  Eigen::VectorXd feature_mean;  // standardization applied before the linear map
  Eigen::VectorXd feature_scale;
  std::vector<double> loss_history;  // penalized loss after each epoch

  // class probabilities, one simplex row per input row
  Eigen::MatrixXd scores(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd scores_row(const Eigen::VectorXd& x) const;
  ScoreFunction as_score_function() const;
};

SoftmaxModel train_softmax(const Dataset& train, int K, const SoftmaxOptions& opt = {});

// Penalized objective and its gradient at arbitrary weights, on raw (already
// standardized, if desired) features with an implicit intercept column.
// Exposed so the gradient can be checked against finite differences.
double softmax_loss(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& X,
                    const std::vector<int>& y, int K, double l2);
Eigen::MatrixXd softmax_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& X,
                                 const std::vector<int>& y, int K, double l2);

// ---------------------------------------------------------------------------
// Unit-covariance Gaussian mixture and its exact posterior.

struct GmmSpec {
  int K = 0;
  int d = 0;
  std::vector<double> priors;  // positive, sums to 1
  Eigen::MatrixXd means;       // K x d

  void validate() const;
};

// Exact posterior P(Y=k | X=x) for the mixture, computed in log space with
// log-sum-exp so distant points keep strictly positive rows summing to 1.
ScoreFunction gmm_posterior(const GmmSpec& spec);

// posterior matrix for a batch of points (rows of X)
ScoreMatrix gmm_posterior_matrix(const GmmSpec& spec, const Eigen::MatrixXd& X);

}  // namespace psp
