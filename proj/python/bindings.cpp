#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psp/engine.hpp"
#include "psp/evalues.hpp"
#include "psp/extensions.hpp"
#include "psp/metrics.hpp"
#include "psp/models.hpp"
#include "psp/oracle.hpp"
#include "psp/simlab.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

psp::GroupPartition partition_from(const std::vector<std::vector<int>>& groups,
                                   const std::vector<double>& alphas, int K) {
  return psp::validate_partition(groups, alphas, K);
}

py::dict report_to_dict(const psp::DecisionReport& report) {
  py::list thresholds;
  for (const auto& th : report.thresholds) {
    py::dict d("group"_a = th.group, "threshold"_a = th.threshold.value(),
               "l_hat"_a = th.l_hat ? py::object(py::int_(*th.l_hat)) : py::none());
    thresholds.append(d);
  }
  std::vector<std::pair<long long, long long>> exact;
  exact.reserve(report.values_exact.size());
  for (const auto& f : report.values_exact) exact.emplace_back(f.num, f.den);
  return py::dict("decisions"_a = report.decisions, "pre_labels"_a = report.pre_labels,
                  "group_of"_a = report.group_of, "values"_a = report.values,
                  "values_exact"_a = exact, "thresholds"_a = thresholds);
}

py::dict aggregate_to_dict(const psp::AggregateStats& stats) {
  py::list groups;
  for (const auto& ga : stats.groups) {
    groups.append(py::dict("fdr"_a = ga.fdr.mean, "fdr_se"_a = ga.fdr.se, "power"_a = ga.power.mean,
                           "power_se"_a = ga.power.se, "mfdr"_a = ga.mfdr,
                           "mean_decisions"_a = ga.mean_decisions));
  }
  return py::dict("groups"_a = groups, "overall_power"_a = stats.overall_power.mean,
                  "overall_power_se"_a = stats.overall_power.se,
                  "overall_fdr"_a = stats.overall_fdr.mean, "overall_fdr_se"_a = stats.overall_fdr.se,
                  "overall_mfdr"_a = stats.overall_mfdr);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "selective multi-class classification with group-wise error rate control";

  py::register_exception<psp::Error>(m, "PspError");

  m.def(
      "validate_partition",
      [](const std::vector<std::vector<int>>& groups, const std::vector<double>& alphas, int K) {
        partition_from(groups, alphas, K);
      },
      "groups"_a, "alphas"_a, "K"_a, "validate a disjoint label partition and its alpha levels");

  m.def("argmax_preclassify", &psp::argmax_preclassify, "scores"_a, "seed"_a = 0,
        "per-row argmax labels with seeded uniform tie-breaking");

  m.def(
      "psp_run",
      [](const psp::ScoreMatrix& target_scores, const psp::ScoreMatrix& holdout_scores,
         const std::vector<int>& pre_target, const std::vector<int>& pre_holdout,
         const std::vector<int>& holdout_truth, const std::vector<std::vector<int>>& groups,
         const std::vector<double>& alphas) {
        const psp::GroupPartition partition =
            partition_from(groups, alphas, static_cast<int>(target_scores.cols()));
        return report_to_dict(
            psp::psp_run(target_scores, holdout_scores, pre_target, pre_holdout, holdout_truth, partition));
      },
      "target_scores"_a, "holdout_scores"_a, "pre_target"_a, "pre_holdout"_a, "holdout_truth"_a,
      "groups"_a, "alphas"_a, "selective p-values, group thresholds and abstain-or-keep decisions");

  m.def(
      "epsp_run",
      [](const psp::ScoreMatrix& target_scores, const psp::ScoreMatrix& holdout_scores,
         const std::vector<int>& pre_target, const std::vector<int>& pre_holdout,
         const std::vector<int>& holdout_truth, const std::vector<std::vector<int>>& groups,
         const std::vector<double>& alphas, std::vector<double> alpha_prime) {
        const psp::GroupPartition partition =
            partition_from(groups, alphas, static_cast<int>(target_scores.cols()));
        if (alpha_prime.empty()) alpha_prime = alphas;
        const psp::EDecisionReport er = psp::epsp_run(target_scores, holdout_scores, pre_target,
                                                      pre_holdout, holdout_truth, partition, alpha_prime);
        py::dict out = report_to_dict(er.report);
        out["score_cutoffs"] = er.score_cutoffs;
        py::list eth;
        for (const auto& th : er.ethresholds) {
          eth.append(py::dict(
              "group"_a = th.group,
              "threshold"_a = th.value ? py::object(py::float_(th.value->value())) : py::none(),
              "l_hat"_a = th.l_hat ? py::object(py::int_(*th.l_hat)) : py::none()));
        }
        out["ethresholds"] = eth;
        return out;
      },
      "target_scores"_a, "holdout_scores"_a, "pre_target"_a, "pre_holdout"_a, "holdout_truth"_a,
      "groups"_a, "alphas"_a, "alpha_prime"_a = std::vector<double>{},
      "e-value variant of psp_run; alpha_prime defaults to alphas");

  py::class_<psp::SoftmaxModel>(m, "SoftmaxModel")
      .def_readonly("weights", &psp::SoftmaxModel::weights)
      .def_readonly("loss_history", &psp::SoftmaxModel::loss_history)
      .def("scores", &psp::SoftmaxModel::scores, "X"_a, "class probability rows for a feature matrix");

  m.def(
      "train_softmax",
      [](const Eigen::MatrixXd& X, const std::vector<int>& y, int K, int epochs, double step_size,
         double l2) {
        psp::SoftmaxOptions opt;
        opt.epochs = epochs;
        opt.step_size = step_size;
        opt.l2 = l2;
        return psp::train_softmax(psp::Dataset{X, y}, K, opt);
      },
      "X"_a, "y"_a, "K"_a, "epochs"_a = 500, "step_size"_a = 0.1, "l2"_a = 1e-4,
      "multinomial logistic regression via full-batch gradient descent");

  m.def(
      "gmm_posterior",
      [](const std::vector<double>& priors, const Eigen::MatrixXd& means, const Eigen::MatrixXd& X) {
        psp::GmmSpec spec;
        spec.K = static_cast<int>(means.rows());
        spec.d = static_cast<int>(means.cols());
        spec.priors = priors;
        spec.means = means;
        return psp::gmm_posterior_matrix(spec, X);
      },
      "priors"_a, "means"_a, "X"_a,
      "exact posterior class probabilities of a unit-covariance Gaussian mixture");

  m.def(
      "select_subjects",
      [](const std::vector<double>& target_mu, const std::vector<double>& holdout_mu,
         const std::vector<bool>& holdout_in_region, double alpha) {
        psp::SelectionTask task;
        task.alpha = alpha;
        std::vector<uint8_t> mask(holdout_in_region.begin(), holdout_in_region.end());
        const psp::SelectionResult res = psp::select_subjects(task, target_mu, holdout_mu, mask);
        std::vector<double> pvalues;
        pvalues.reserve(res.pvalues.size());
        for (const auto& f : res.pvalues) pvalues.push_back(f.value());
        return py::dict("selected"_a = res.selected, "pvalues"_a = pvalues,
                        "theta_hat"_a = res.theta_hat.value(), "threshold"_a = res.threshold.value());
      },
      "target_mu"_a, "holdout_mu"_a, "holdout_in_region"_a, "alpha"_a,
      "FDR-controlled subject selection for a region of interest");

  m.def(
      "informative_sets",
      [](const psp::ScoreMatrix& target_scores, const psp::ScoreMatrix& holdout_scores,
         const std::vector<int>& holdout_labels, int L, double alpha) {
        psp::InformativeSetTask task;
        task.K = static_cast<int>(target_scores.cols());
        task.L = L;
        task.alpha = alpha;
        const psp::InformativeSetsResult res =
            psp::informative_sets(task, target_scores, holdout_scores, holdout_labels);
        std::vector<double> pvalues;
        pvalues.reserve(res.pvalues.size());
        for (const auto& f : res.pvalues) pvalues.push_back(f.value());
        return py::dict("selected"_a = res.selected, "sets"_a = res.sets, "pvalues"_a = pvalues,
                        "theta_hat"_a = res.theta_hat.value(), "threshold"_a = res.threshold.value());
      },
      "target_scores"_a, "holdout_scores"_a, "holdout_labels"_a, "L"_a, "alpha"_a,
      "FCR-controlled prediction sets of at most L labels");

  m.def("group_fdp", &psp::group_fdp, "decisions"_a, "truth"_a, "group"_a);
  m.def("overall_power", &psp::overall_power, "decisions"_a, "truth"_a);
  m.def("classwise_power", &psp::classwise_power, "decisions"_a, "truth"_a, "k"_a);

  m.def(
      "run_experiment",
      [](int K, int d, int n0, int reps, std::uint64_t seed, const std::vector<double>& alphas,
         const std::string& preset, const std::string& scores, int threads, bool freeze_priors,
         bool with_epsp, bool with_oracle_rule) {
        psp::SimDesign design;
        design.K = K;
        design.d = d;
        design.n0 = n0;
        design.reps = reps;
        design.seed = seed;
        design.alphas = alphas;
        design.threads = threads;
        design.redraw_priors = !freeze_priors;
        design.with_epsp = with_epsp;
        design.with_oracle_rule = with_oracle_rule;
        if (preset == "overall")
          design.preset = psp::PartitionPreset::Overall;
        else if (preset == "classwise")
          design.preset = psp::PartitionPreset::Classwise;
        else
          throw psp::Error(psp::Errc::BadConfig, "preset must be overall|classwise");
        if (scores == "oracle")
          design.scores = psp::SimScores::Oracle;
        else if (scores == "softmax")
          design.scores = psp::SimScores::Softmax;
        else
          throw psp::Error(psp::Errc::BadConfig, "scores must be oracle|softmax");
        const psp::ExperimentSummary summary = psp::run_experiment(design);
        py::list rows;
        for (const auto& row : summary.rows) {
          py::dict d2 = aggregate_to_dict(row.stats);
          d2["alpha"] = row.alpha;
          d2["method"] = row.method;
          rows.append(d2);
        }
        return py::dict("rows"_a = rows,
                        "nondegradation_violations"_a = summary.nondegradation_violations);
      },
      "K"_a = 2, "d"_a = 10, "n0"_a = 100, "reps"_a = 10, "seed"_a = 1,
      "alphas"_a = std::vector<double>{0.1}, "preset"_a = "overall", "scores"_a = "softmax",
      "threads"_a = 1, "freeze_priors"_a = false, "with_epsp"_a = false, "with_oracle_rule"_a = false,
      "replicated Gaussian-mixture experiment; returns aggregated rows per (alpha, method)");
}
