#include "psp/metrics.hpp"

#include <algorithm>

namespace psp {

namespace {
void check_same_length(size_t a, size_t b, const char* what) {
  if (a != b)
    throw Error(Errc::LengthMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}
}  // namespace

double group_fdp(const std::vector<int>& decisions, const std::vector<int>& truth,
                 const std::vector<int>& group) {
  check_same_length(decisions.size(), truth.size(), "group_fdp");
  long long total = 0, wrong = 0;
  for (size_t j = 0; j < decisions.size(); ++j) {
    if (decisions[j] == 0) continue;
    if (std::find(group.begin(), group.end(), decisions[j]) == group.end()) continue;
    ++total;
    if (decisions[j] != truth[j]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(std::max<long long>(1, total));
}

double overall_power(const std::vector<int>& decisions, const std::vector<int>& truth) {
  check_same_length(decisions.size(), truth.size(), "overall_power");
  if (decisions.empty()) throw Error(Errc::EmptyInput, "overall_power: no subjects");
  long long correct = 0;
  for (size_t j = 0; j < decisions.size(); ++j)
    if (decisions[j] != 0 && decisions[j] == truth[j]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(decisions.size());
}

double classwise_power(const std::vector<int>& decisions, const std::vector<int>& truth, int k) {
  check_same_length(decisions.size(), truth.size(), "classwise_power");
  long long members = 0, correct = 0;
  for (size_t j = 0; j < decisions.size(); ++j) {
    if (truth[j] == k) {
      ++members;
      if (decisions[j] == k) ++correct;
    }
  }
  if (members == 0) return missing_value();
  return static_cast<double>(correct) / static_cast<double>(members);
}

double false_coverage_proportion(const std::vector<int>& selected,
                                 const std::vector<std::vector<int>>& sets,
                                 const std::vector<int>& truth) {
  long long miss = 0;
  for (int j : selected) {
    const auto& set = sets[static_cast<size_t>(j)];
    if (std::find(set.begin(), set.end(), truth[static_cast<size_t>(j)]) == set.end()) ++miss;
  }
  return static_cast<double>(miss) / static_cast<double>(std::max<size_t>(1, selected.size()));
}

ReplicationMetrics compute_replication_metrics(const std::vector<int>& decisions,
                                               const std::vector<int>& truth,
                                               const GroupPartition& partition) {
  check_same_length(decisions.size(), truth.size(), "compute_replication_metrics");
  ReplicationMetrics rm;
  const int G = partition.num_groups();
  rm.groups.resize(static_cast<size_t>(G));
  std::vector<long long> true_members(static_cast<size_t>(G), 0);
  std::vector<long long> correct(static_cast<size_t>(G), 0);
  long long overall_correct = 0;

  for (size_t j = 0; j < decisions.size(); ++j) {
    const int y = truth[j];
    true_members[static_cast<size_t>(partition.group_of(y))]++;
    const int d = decisions[j];
    if (d == 0) continue;
    auto& go = rm.groups[static_cast<size_t>(partition.group_of(d))];
    go.decisions++;
    rm.total_decisions++;
    if (d != y) {
      go.false_decisions++;
      rm.total_false++;
    } else {
      correct[static_cast<size_t>(partition.group_of(d))]++;
      overall_correct++;
    }
  }
  for (int g = 0; g < G; ++g) {
    auto& go = rm.groups[static_cast<size_t>(g)];
    go.fdp = static_cast<double>(go.false_decisions) /
             static_cast<double>(std::max<long long>(1, go.decisions));
    go.power_defined = true_members[static_cast<size_t>(g)] > 0;
    go.power = go.power_defined ? static_cast<double>(correct[static_cast<size_t>(g)]) /
                                      static_cast<double>(true_members[static_cast<size_t>(g)])
                                : missing_value();
  }
  rm.overall_power = decisions.empty() ? missing_value()
                                       : static_cast<double>(overall_correct) /
                                             static_cast<double>(decisions.size());
  rm.overall_fdp = static_cast<double>(rm.total_false) /
                   static_cast<double>(std::max<long long>(1, rm.total_decisions));
  return rm;
}

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  if (xs.empty()) {
    out.mean = missing_value();
    out.se = missing_value();
    return out;
  }
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) {
    out.se = missing_value();
    return out;
  }
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  out.se = sd / std::sqrt(static_cast<double>(xs.size()));
  return out;
}

AggregateStats aggregate(const std::vector<ReplicationMetrics>& reps) {
  if (reps.empty()) throw Error(Errc::EmptyInput, "aggregate: no replications");
  const size_t G = reps.front().groups.size();
  for (const auto& rm : reps)
    if (rm.groups.size() != G) throw Error(Errc::LengthMismatch, "aggregate: inconsistent group counts");

  AggregateStats out;
  out.groups.resize(G);
  for (size_t g = 0; g < G; ++g) {
    std::vector<double> fdps, powers;
    double false_sum = 0.0, dec_sum = 0.0;
    fdps.reserve(reps.size());
    for (const auto& rm : reps) {
      const auto& go = rm.groups[g];
      fdps.push_back(go.fdp);
      if (go.power_defined) powers.push_back(go.power);
      false_sum += static_cast<double>(go.false_decisions);
      dec_sum += static_cast<double>(go.decisions);
    }
    auto& ga = out.groups[g];
    ga.fdr = mean_se(fdps);
    ga.power = mean_se(powers);
    ga.mfdr = dec_sum > 0.0 ? false_sum / dec_sum : missing_value();
    ga.mean_decisions = dec_sum / static_cast<double>(reps.size());
  }
  std::vector<double> op, of;
  double tf = 0.0, td = 0.0;
  for (const auto& rm : reps) {
    op.push_back(rm.overall_power);
    of.push_back(rm.overall_fdp);
    tf += static_cast<double>(rm.total_false);
    td += static_cast<double>(rm.total_decisions);
  }
  out.overall_power = mean_se(op);
  out.overall_fdr = mean_se(of);
  out.overall_mfdr = td > 0.0 ? tf / td : missing_value();
  return out;
}

}  // namespace psp
