#pragma once

#include <cstdint>
#include <vector>

#include "psp/models.hpp"

// Population quantities for power benchmarking under a known data law.
// Monte Carlo estimates of the misclassification proportion theta_R and the
// survival functions F0 (posterior of the pre-assigned class, given a wrong
// pre-classification) and F1 (same, given membership in the group) feed the
// oracle rule: decide exactly when the posterior of the pre-assigned class
// strictly exceeds t* = inf { t >= 0 : theta_R * F0(t)/F1(t) <= alpha }.

namespace psp {

struct PopulationCurves {
  std::vector<double> grid;  // sorted; always contains 0 and 1
  std::vector<double> F0;    // right-continuous step survival estimates on grid
  std::vector<double> F1;
  double theta_R = 0.0;
  long long n_mc = 0;
  long long retained = 0;       // pre-classified into the group
  long long misclassified = 0;  // retained with a wrong pre-label
};

// Draws n_mc samples from the mixture, pre-classifies with the given rule,
// and tabulates theta_R / F0 / F1 on the pooled grid of observed posterior
// values plus {0,1}. Throws NoGroupMembers when nothing lands in the group.
PopulationCurves estimate_curves(const GmmSpec& spec, const PreClassifier& preclassify,
                                 const std::vector<int>& group, long long n_mc, std::uint64_t seed);

struct OracleRule {
  std::vector<int> group;
  double t_star = 0.0;
};

// smallest grid point with F1 > 0 and theta_R*F0 <= alpha*F1;
// throws NoFeasibleThreshold when the inequality never holds on the grid
OracleRule oracle_threshold(const PopulationCurves& curves, const std::vector<int>& group,
                            double alpha);

// group members decide iff the posterior of their pre-assigned class
// strictly exceeds t_star; everyone else abstains
std::vector<int> oracle_decide(const OracleRule& rule, const ScoreMatrix& posteriors,
                               const std::vector<int>& pre_labels);

}  // namespace psp
