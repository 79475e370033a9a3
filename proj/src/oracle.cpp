#include "psp/oracle.hpp"

#include <algorithm>

#include "psp/rng.hpp"
#include "psp/simlab.hpp"

namespace psp {

PopulationCurves estimate_curves(const GmmSpec& spec, const PreClassifier& preclassify,
                                 const std::vector<int>& group, long long n_mc, std::uint64_t seed) {
  spec.validate();
  if (n_mc < 1000) throw Error(Errc::BadConfig, "estimate_curves: n_mc must be at least 1000");

  const Dataset mc = sample_dataset(spec, n_mc, seed);
  const ScoreMatrix post = gmm_posterior_matrix(spec, mc.X);

  std::vector<uint8_t> in_group(static_cast<size_t>(spec.K) + 1, 0);
  for (int k : group) in_group[static_cast<size_t>(k)] = 1;

  std::vector<double> values;       // posterior of the pre-assigned class, retained samples
  std::vector<double> mis_values;   // same, restricted to wrong pre-classifications
  values.reserve(static_cast<size_t>(n_mc));
  for (long long i = 0; i < n_mc; ++i) {
    const int pre = preclassify(mc.X.row(i).transpose(), rng::substream(seed ^ 0x5eedu, static_cast<std::uint64_t>(i)));
    if (!in_group[static_cast<size_t>(pre)]) continue;
    const double v = post(i, pre - 1);
    values.push_back(v);
    if (pre != mc.y[static_cast<size_t>(i)]) mis_values.push_back(v);
  }
  if (values.empty()) throw Error(Errc::NoGroupMembers, "estimate_curves: no samples pre-classified into the group");

  PopulationCurves curves;
  curves.n_mc = n_mc;
  curves.retained = static_cast<long long>(values.size());
  curves.misclassified = static_cast<long long>(mis_values.size());
  curves.theta_R = static_cast<double>(curves.misclassified) / static_cast<double>(curves.retained);

  curves.grid = values;
  curves.grid.push_back(0.0);
  curves.grid.push_back(1.0);
  std::sort(curves.grid.begin(), curves.grid.end());
  curves.grid.erase(std::unique(curves.grid.begin(), curves.grid.end()), curves.grid.end());

  std::sort(values.begin(), values.end());
  std::sort(mis_values.begin(), mis_values.end());
  curves.F0.reserve(curves.grid.size());
  curves.F1.reserve(curves.grid.size());
  for (double t : curves.grid) {
    const auto above = [t](const std::vector<double>& xs) {
      return static_cast<double>(xs.end() - std::upper_bound(xs.begin(), xs.end(), t));
    };
    curves.F1.push_back(above(values) / static_cast<double>(curves.retained));
    // survival of an empty misclassified sample is taken as 1; theta_R = 0
    // nullifies it inside the rejection ratio anyway
    curves.F0.push_back(mis_values.empty() ? 1.0
                                           : above(mis_values) / static_cast<double>(curves.misclassified));
  }
  return curves;
}

OracleRule oracle_threshold(const PopulationCurves& curves, const std::vector<int>& group,
                            double alpha) {
  if (curves.grid.empty() || curves.grid.size() != curves.F0.size() ||
      curves.grid.size() != curves.F1.size())
    throw Error(Errc::LengthMismatch, "oracle_threshold: malformed curves");
  for (size_t i = 0; i < curves.grid.size(); ++i) {
    if (curves.F1[i] <= 0.0) continue;  // ratio undefined in regions of zero mass
    if (curves.theta_R * curves.F0[i] <= alpha * curves.F1[i])
      return OracleRule{group, curves.grid[i]};
  }
  throw Error(Errc::NoFeasibleThreshold,
              "oracle_threshold: no grid point satisfies the error constraint");
}

std::vector<int> oracle_decide(const OracleRule& rule, const ScoreMatrix& posteriors,
                               const std::vector<int>& pre_labels) {
  if (static_cast<size_t>(posteriors.rows()) != pre_labels.size())
    throw Error(Errc::LengthMismatch, "oracle_decide: posteriors vs pre-labels");
  std::vector<uint8_t> in_group(static_cast<size_t>(posteriors.cols()) + 1, 0);
  for (int k : rule.group) {
    if (k < 1 || k > posteriors.cols())
      throw Error(Errc::LabelOutOfRange, "oracle_decide: group label outside score matrix");
    in_group[static_cast<size_t>(k)] = 1;
  }
  std::vector<int> decisions(pre_labels.size(), 0);
  for (size_t j = 0; j < pre_labels.size(); ++j) {
    const int pre = pre_labels[j];
    if (!in_group[static_cast<size_t>(pre)]) continue;
    if (posteriors(static_cast<Eigen::Index>(j), pre - 1) > rule.t_star) decisions[j] = pre;
  }
  return decisions;
}

}  // namespace psp
