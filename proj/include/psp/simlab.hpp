#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "psp/metrics.hpp"
#include "psp/models.hpp"

// Replicated Gaussian-mixture experiments: class priors drawn as normalized
// Uniform(1,2) weights, features N(m_k, I_d) with m_k = k * 1_d / d^(1/4),
// equal train / hold-out / target sizes K*n0. Every replication runs from
// its own sub-seed, so the whole experiment is a pure function of
// (design, seed) and any replication can be reproduced in isolation.

namespace psp {

enum class PartitionPreset { Overall, Classwise };
enum class SimScores { Oracle, Softmax, External };

struct SimDesign {
  int K = 2;
  int d = 10;
  int n0 = 100;
  int reps = 500;
  std::uint64_t seed = 1;
  std::vector<double> alphas = {0.05, 0.1, 0.15, 0.2};  // scalar level grid
  PartitionPreset preset = PartitionPreset::Overall;
  SimScores scores = SimScores::Softmax;
  bool redraw_priors = true;    // fresh priors every replication
  bool split_classifier = false;  // train the pre-classifier and the score
                                  // function on disjoint halves of the
                                  // training split
  bool with_epsp = false;         // also run the e-value pipeline (alpha'=alpha)
  bool with_oracle_rule = false;  // also run the population-optimal rule
                                  // (requires redraw_priors=false)
  long long oracle_n_mc = 100000;
  SoftmaxOptions trainer{};
  int threads = 1;

  int m() const { return K * n0; }
  int n() const { return K * n0; }
  int n_train() const { return K * n0; }
  GroupPartition partition(double alpha) const;
};

// normalized positive weights; throws unless all draws are positive
std::vector<double> priors_from_draws(const std::vector<double>& z);

// (Z_1..Z_K)/sum Z_k with Z_k iid Uniform(1,2)
std::vector<double> sample_priors(int K, std::mt19937_64& rng);

// labels iid from spec.priors, features N(mean_k, I_d)
Dataset sample_dataset(const GmmSpec& spec, long long size, std::uint64_t seed);

// the mean layout used by the experiment designs: every coordinate of class
// k's mean equals k / d^(1/4)
GmmSpec design_gmm(int K, int d, std::vector<double> priors);

// per-(alpha, method) aggregated results; methods: "psp", "epsp", "oracle"
struct SummaryRow {
  double alpha = 0.0;
  std::string method;
  AggregateStats stats;
};

struct ExperimentSummary {
  SimDesign design;
  std::vector<SummaryRow> rows;
  // raw per-replication metrics, aligned with rows (same order)
  std::vector<std::vector<ReplicationMetrics>> raw;
  // per-row per-replication group theta_hat / threshold values for reporting
  std::vector<std::vector<std::vector<double>>> theta_hats;   // [row][rep][group]
  std::vector<std::vector<std::vector<double>>> thresholds;   // [row][rep][group]
  // count of replications violating "theta_hat <= alpha implies no
  // abstention in the group" (must stay zero)
  long long nondegradation_violations = 0;
};

ExperimentSummary run_experiment(const SimDesign& design);

}  // namespace psp
