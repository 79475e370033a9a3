#include <doctest.h>

#include <random>

#include "psp/metrics.hpp"

TEST_CASE("group_fdp hand counts") {
  CHECK(psp::group_fdp({0, 0, 0}, {1, 2, 1}, {1}) == 0.0);  // the 1-or guard
  CHECK(psp::group_fdp({1, 1, 0}, {1, 2, 1}, {1}) == 0.5);
  CHECK(psp::group_fdp({1, 2, 1}, {1, 2, 1}, {1, 2}) == 0.0);
  CHECK_THROWS_AS(psp::group_fdp({1}, {1, 2}, {1}), psp::Error);
}

TEST_CASE("overall_power hand counts") {
  CHECK(psp::overall_power({0, 0, 0}, {1, 2, 1}) == 0.0);
  CHECK(psp::overall_power({1, 2, 2}, {1, 2, 2}) == 1.0);
  CHECK(psp::overall_power({1, 0, 2}, {1, 2, 2}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("classwise_power hand counts and the empty-class convention") {
  CHECK(psp::is_missing(psp::classwise_power({1, 1}, {2, 2}, 3)));
  // four true members of class 2, three recovered
  CHECK(psp::classwise_power({2, 2, 2, 0, 1}, {2, 2, 2, 2, 1}, 2) == 0.75);
  CHECK(psp::classwise_power({1, 2, 2}, {1, 2, 2}, 2) == 1.0);
}

TEST_CASE("group_fdp specializes to the overall and class-wise forms") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> label(1, 4), decision(0, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> truth(60), decisions(60);
    for (auto& v : truth) v = label(rng);
    for (auto& v : decisions) v = decision(rng);

    // overall form, computed independently
    long long total = 0, wrong = 0;
    for (size_t j = 0; j < truth.size(); ++j) {
      if (decisions[j] == 0) continue;
      ++total;
      if (decisions[j] != truth[j]) ++wrong;
    }
    const double fdp_o = static_cast<double>(wrong) / std::max<long long>(1, total);
    CHECK(psp::group_fdp(decisions, truth, {1, 2, 3, 4}) == fdp_o);

    // class-wise form per label
    long long sum_false = 0;
    for (int k = 1; k <= 4; ++k) {
      long long tk = 0, wk = 0;
      for (size_t j = 0; j < truth.size(); ++j) {
        if (decisions[j] != k) continue;
        ++tk;
        if (truth[j] != k) ++wk;
      }
      sum_false += wk;
      CHECK(psp::group_fdp(decisions, truth, {k}) ==
            static_cast<double>(wk) / std::max<long long>(1, tk));
    }
    CHECK(sum_false == wrong);  // disjoint groups partition the false decisions
  }
}

TEST_CASE("replication metrics power uses true group membership") {
  const auto part = psp::validate_partition({{1}, {2}}, {0.1, 0.1}, 2);
  const auto rm = psp::compute_replication_metrics({1, 0, 2, 1}, {1, 1, 2, 2}, part);
  CHECK(rm.groups[0].decisions == 2);
  CHECK(rm.groups[0].false_decisions == 1);
  CHECK(rm.groups[0].fdp == 0.5);
  CHECK(rm.groups[0].power == 0.5);  // one of two true class-1 members recovered
  CHECK(rm.groups[1].power == 0.5);
  CHECK(rm.overall_power == 0.5);
  CHECK(rm.total_decisions == 3);
  CHECK(rm.total_false == 1);
}

TEST_CASE("aggregate mean, standard error and mFDR conventions") {
  const auto part = psp::GroupPartition::overall(2, 0.1);
  psp::ReplicationMetrics a = psp::compute_replication_metrics({1, 1}, {1, 1}, part);
  psp::ReplicationMetrics b = psp::compute_replication_metrics({1, 2, 1, 2, 1}, {1, 1, 1, 2, 1}, part);
  REQUIRE(a.groups[0].fdp == 0.0);
  REQUIRE(b.groups[0].fdp == 0.2);

  SUBCASE("single replication has no standard error") {
    const auto stats = psp::aggregate({a});
    CHECK(stats.groups[0].fdr.mean == 0.0);
    CHECK(psp::is_missing(stats.groups[0].fdr.se));
  }
  SUBCASE("two-point statistics") {
    const auto stats = psp::aggregate({a, b});
    CHECK(stats.groups[0].fdr.mean == doctest::Approx(0.1));
    CHECK(stats.groups[0].fdr.se == doctest::Approx(0.1));
    // ratio of means: 1 false decision over 7 decisions
    CHECK(stats.groups[0].mfdr == doctest::Approx(1.0 / 7.0));
  }
  SUBCASE("no decisions anywhere leaves mFDR missing") {
    const psp::ReplicationMetrics none = psp::compute_replication_metrics({0, 0}, {1, 2}, part);
    const auto stats = psp::aggregate({none, none});
    CHECK(psp::is_missing(stats.groups[0].mfdr));
    CHECK(stats.groups[0].fdr.mean == 0.0);
  }
  SUBCASE("empty input is an error") { CHECK_THROWS_AS(psp::aggregate({}), psp::Error); }
}

TEST_CASE("false coverage proportion") {
  const std::vector<std::vector<int>> sets = {{1, 2}, {3}, {2}};
  const std::vector<int> truth = {1, 2, 2};
  CHECK(psp::false_coverage_proportion({0, 1, 2}, sets, truth) == doctest::Approx(1.0 / 3.0));
  CHECK(psp::false_coverage_proportion({}, sets, truth) == 0.0);
}
