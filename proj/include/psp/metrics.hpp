#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "psp/core.hpp"

// Error and power functionals. A "missing" statistic (empty true class,
// zero decisions for the mFDR ratio, single-replication standard error) is
// reported as NaN rather than 0 so downstream tables can leave it blank.

namespace psp {

inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

// false decisions landing in the group over (1 v decisions in the group)
double group_fdp(const std::vector<int>& decisions, const std::vector<int>& truth,
                 const std::vector<int>& group);

// exact matches over all subjects; abstentions count as misses
double overall_power(const std::vector<int>& decisions, const std::vector<int>& truth);

// correct decisions for class k over true members of k; missing when the
// class is absent from the truth
double classwise_power(const std::vector<int>& decisions, const std::vector<int>& truth, int k);

// fraction of selected subjects whose prediction set misses the true label
double false_coverage_proportion(const std::vector<int>& selected,
                                 const std::vector<std::vector<int>>& sets,
                                 const std::vector<int>& truth);

struct GroupOutcome {
  long long decisions = 0;
  long long false_decisions = 0;
  double fdp = 0.0;
  double power = 0.0;  // correct decisions in the group over true group members
  bool power_defined = false;
};

struct ReplicationMetrics {
  std::vector<GroupOutcome> groups;
  double overall_power = 0.0;
  double overall_fdp = 0.0;
  long long total_decisions = 0;
  long long total_false = 0;
};

ReplicationMetrics compute_replication_metrics(const std::vector<int>& decisions,
                                               const std::vector<int>& truth,
                                               const GroupPartition& partition);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // missing (NaN) for fewer than two observations
};
MeanSe mean_se(const std::vector<double>& xs);

struct GroupAggregate {
  MeanSe fdr;
  MeanSe power;         // over replications where the group power is defined
  double mfdr = 0.0;    // mean false count / mean decision count; missing on 0/0
  double mean_decisions = 0.0;
};

struct AggregateStats {
  std::vector<GroupAggregate> groups;
  MeanSe overall_power;
  MeanSe overall_fdr;
  double overall_mfdr = 0.0;
};

// per-group FDR as mean of FDPs, mFDR as ratio of means
AggregateStats aggregate(const std::vector<ReplicationMetrics>& reps);

}  // namespace psp
