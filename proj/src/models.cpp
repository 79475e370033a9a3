#include "psp/models.hpp"

#include <algorithm>
#include <cmath>

#include "psp/rng.hpp"

namespace psp {

std::vector<int> argmax_preclassify(const ScoreMatrix& scores, std::uint64_t rng_seed) {
  if (scores.rows() == 0 || scores.cols() == 0)
    throw Error(Errc::EmptyScores, "argmax_preclassify: empty score matrix");
  if (!scores.allFinite())
    throw Error(Errc::NonFiniteScores, "argmax_preclassify: non-finite scores");

  const Eigen::Index K = scores.cols();
  std::vector<int> labels(static_cast<size_t>(scores.rows()));
  std::vector<int> tied;
  for (Eigen::Index j = 0; j < scores.rows(); ++j) {
    double best = scores(j, 0);
    for (Eigen::Index k = 1; k < K; ++k) best = std::max(best, scores(j, k));
    tied.clear();
    for (Eigen::Index k = 0; k < K; ++k)
      if (scores(j, k) == best) tied.push_back(static_cast<int>(k) + 1);
    if (tied.size() == 1) {
      labels[static_cast<size_t>(j)] = tied[0];
    } else {
      const double u = rng::uniform01(rng::substream(rng_seed, static_cast<std::uint64_t>(j)));
      auto pick = static_cast<size_t>(u * static_cast<double>(tied.size()));
      if (pick >= tied.size()) pick = tied.size() - 1;
      labels[static_cast<size_t>(j)] = tied[pick];
    }
  }
  return labels;
}

PreClassifier argmax_rule(ScoreFunction mu) {
  return [mu = std::move(mu)](const Eigen::VectorXd& x, std::uint64_t u) -> int {
    const Eigen::VectorXd s = mu(x);
    double best = s(0);
    for (Eigen::Index k = 1; k < s.size(); ++k) best = std::max(best, s(k));
    int n_tied = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s(k) == best) ++n_tied;
    if (n_tied == 1) {
      for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) == best) return static_cast<int>(k) + 1;
    }
    auto pick = static_cast<int>(rng::uniform01(rng::mix(u)) * n_tied);
    if (pick >= n_tied) pick = n_tied - 1;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s(k) == best && pick-- == 0) return static_cast<int>(k) + 1;
    return static_cast<int>(s.size());  // unreachable
  };
}

CalibrationState build_calibration(const std::vector<int>& pre_target,
                                   const std::vector<int>& pre_holdout,
                                   const std::vector<int>& holdout_truth,
                                   const GroupPartition& partition) {
  if (pre_holdout.size() != holdout_truth.size())
    throw Error(Errc::LengthMismatch, "build_calibration: hold-out pre-labels (" +
                                          std::to_string(pre_holdout.size()) + ") vs truth (" +
                                          std::to_string(holdout_truth.size()) + ")");
  const int K = partition.num_classes();
  detail::check_labels(pre_target, K, "build_calibration target pre-labels");
  detail::check_labels(pre_holdout, K, "build_calibration hold-out pre-labels");
  detail::check_labels(holdout_truth, K, "build_calibration hold-out truth");

  CalibrationState c;
  c.K = K;
  c.target_sets.assign(static_cast<size_t>(K), {});
  c.holdout_sets.assign(static_cast<size_t>(K), {});
  c.residual_sets.assign(static_cast<size_t>(K), {});
  for (size_t j = 0; j < pre_target.size(); ++j)
    c.target_sets[static_cast<size_t>(pre_target[j]) - 1].push_back(static_cast<int>(j));
  for (size_t i = 0; i < pre_holdout.size(); ++i) {
    const size_t k = static_cast<size_t>(pre_holdout[i]) - 1;
    c.holdout_sets[k].push_back(static_cast<int>(i));
    if (holdout_truth[i] != pre_holdout[i]) c.residual_sets[k].push_back(static_cast<int>(i));
  }

  const int G = partition.num_groups();
  c.target_total.assign(static_cast<size_t>(G), 0);
  c.holdout_total.assign(static_cast<size_t>(G), 0);
  c.residual_total.assign(static_cast<size_t>(G), 0);
  c.theta_hat.resize(static_cast<size_t>(G));
  for (int g = 0; g < G; ++g) {
    for (int label : partition.labels(g)) {
      const size_t k = static_cast<size_t>(label) - 1;
      c.target_total[static_cast<size_t>(g)] += static_cast<long long>(c.target_sets[k].size());
      c.holdout_total[static_cast<size_t>(g)] += static_cast<long long>(c.holdout_sets[k].size());
      c.residual_total[static_cast<size_t>(g)] += static_cast<long long>(c.residual_sets[k].size());
    }
    c.theta_hat[static_cast<size_t>(g)] =
        Frac{1 + c.residual_total[static_cast<size_t>(g)], 1 + c.holdout_total[static_cast<size_t>(g)]};
  }
  return c;
}

// ---------------------------------------------------------------------------
// softmax trainer

namespace {

// row-wise softmax of the logit matrix, stabilized by the row maximum
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Xb(X.rows(), X.cols() + 1);
  Xb.col(0).setOnes();
  Xb.rightCols(X.cols()) = X;
  return Xb;
}

}  // namespace

double softmax_loss(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& X,
                    const std::vector<int>& y, int K, double l2) {
  const Eigen::Index n = X.rows();
  if (static_cast<Eigen::Index>(y.size()) != n)
    throw Error(Errc::LengthMismatch, "softmax_loss: labels vs rows");
  const Eigen::MatrixXd Xb = with_intercept(X);
  const Eigen::MatrixXd P = softmax_rows(Xb * weights);
  double nll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) nll -= std::log(P(i, y[static_cast<size_t>(i)] - 1));
  nll /= static_cast<double>(n);
  const double ridge = 0.5 * l2 * weights.bottomRows(weights.rows() - 1).squaredNorm();
  (void)K;
  return nll + ridge;
}

Eigen::MatrixXd softmax_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& X,
                                 const std::vector<int>& y, int K, double l2) {
  const Eigen::Index n = X.rows();
  if (static_cast<Eigen::Index>(y.size()) != n)
    throw Error(Errc::LengthMismatch, "softmax_gradient: labels vs rows");
  const Eigen::MatrixXd Xb = with_intercept(X);
  Eigen::MatrixXd P = softmax_rows(Xb * weights);
  for (Eigen::Index i = 0; i < n; ++i) P(i, y[static_cast<size_t>(i)] - 1) -= 1.0;
  Eigen::MatrixXd grad = Xb.transpose() * P / static_cast<double>(n);
  grad.bottomRows(weights.rows() - 1) += l2 * weights.bottomRows(weights.rows() - 1);
  (void)K;
  return grad;
}

SoftmaxModel train_softmax(const Dataset& train, int K, const SoftmaxOptions& opt) {
  if (opt.epochs < 1 || !(opt.step_size > 0.0) || opt.l2 < 0.0)
    throw Error(Errc::BadConfig, "train_softmax: epochs >= 1, step_size > 0 and l2 >= 0 required");
  if (train.size() == 0) throw Error(Errc::EmptyInput, "train_softmax: empty training set");
  if (static_cast<Eigen::Index>(train.y.size()) != train.size())
    throw Error(Errc::LengthMismatch, "train_softmax: labels vs rows");
  detail::check_labels(train.y, K, "train_softmax labels");
  std::vector<long long> counts(static_cast<size_t>(K), 0);
  for (int label : train.y) ++counts[static_cast<size_t>(label) - 1];
  for (int k = 0; k < K; ++k)
    if (counts[static_cast<size_t>(k)] == 0)
      throw Error(Errc::MissingClass, "train_softmax: class " + std::to_string(k + 1) + " has no training samples");

  SoftmaxModel model;
  const Eigen::Index d = train.dim();
  model.feature_mean = train.X.colwise().mean().transpose();
  const Eigen::MatrixXd centered = train.X.rowwise() - model.feature_mean.transpose();
  const Eigen::VectorXd var = centered.array().square().matrix().colwise().mean().transpose();
  model.feature_scale = var.array().sqrt().max(1e-12).matrix();
  const Eigen::MatrixXd Z =
      (centered.array().rowwise() / model.feature_scale.transpose().array()).matrix();

  model.weights = Eigen::MatrixXd::Zero(d + 1, K);
  model.loss_history.reserve(static_cast<size_t>(opt.epochs));
  const double shrink = 1.0 / (1.0 + opt.step_size * opt.l2);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    const Eigen::MatrixXd grad = softmax_gradient(model.weights, Z, train.y, K, 0.0);
    model.weights -= opt.step_size * grad;
    model.weights.bottomRows(d) *= shrink;  // proximal ridge step, intercept unpenalized
    const double loss = softmax_loss(model.weights, Z, train.y, K, opt.l2);
    if (!std::isfinite(loss))
      throw Error(Errc::NonFiniteLoss, "train_softmax: loss became non-finite at epoch " + std::to_string(epoch));
    model.loss_history.push_back(loss);
  }
  return model;
}

Eigen::MatrixXd SoftmaxModel::scores(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd Z =
      ((X.rowwise() - feature_mean.transpose()).array().rowwise() / feature_scale.transpose().array()).matrix();
  return softmax_rows(with_intercept(Z) * weights);
}

Eigen::VectorXd SoftmaxModel::scores_row(const Eigen::VectorXd& x) const {
  return scores(x.transpose()).row(0).transpose();
}

ScoreFunction SoftmaxModel::as_score_function() const {
  return [m = *this](const Eigen::VectorXd& x) { return m.scores_row(x); };
}

// ---------------------------------------------------------------------------
// Gaussian mixture posterior

void GmmSpec::validate() const {
  if (K < 2) throw Error(Errc::BadConfig, "GmmSpec: need K >= 2");
  if (d < 1) throw Error(Errc::BadConfig, "GmmSpec: need d >= 1");
  if (static_cast<int>(priors.size()) != K || means.rows() != K || means.cols() != d)
    throw Error(Errc::LengthMismatch, "GmmSpec: priors/means shapes inconsistent with K, d");
  double sum = 0.0;
  for (double p : priors) {
    if (!(p > 0.0)) throw Error(Errc::BadConfig, "GmmSpec: priors must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::BadConfig, "GmmSpec: priors must sum to 1");
}

ScoreMatrix gmm_posterior_matrix(const GmmSpec& spec, const Eigen::MatrixXd& X) {
  spec.validate();
  if (X.cols() != spec.d) throw Error(Errc::LengthMismatch, "gmm_posterior: feature dimension mismatch");
  ScoreMatrix out(X.rows(), spec.K);
  Eigen::VectorXd logp(spec.K);
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    for (int k = 0; k < spec.K; ++k) {
      const double sq = (X.row(j) - spec.means.row(k)).squaredNorm();
      logp(k) = std::log(spec.priors[static_cast<size_t>(k)]) - 0.5 * sq;
    }
    const double m = logp.maxCoeff();
    const Eigen::VectorXd e = (logp.array() - m).exp().matrix();
    out.row(j) = (e / e.sum()).transpose();
  }
  return out;
}

ScoreFunction gmm_posterior(const GmmSpec& spec) {
  spec.validate();
  return [spec](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return gmm_posterior_matrix(spec, x.transpose()).row(0);
  };
}

}  // namespace psp
