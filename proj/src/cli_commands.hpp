#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psp/core.hpp"

// Implementations behind the psp command line tool. Each command validates
// its configuration, runs the corresponding pipeline, and writes its
// artifacts under out_dir. Commands throw psp::Error; main() maps config
// errors to exit code 2 and data errors to exit code 3.

namespace psp::cli {

// "overall" | "classwise" | explicit groups like "1,2|3,4"; alphas are per
// group, a single value broadcasts
GroupPartition make_partition(const std::string& spec, std::vector<double> alphas, int K);

struct SimulateConfig {
  std::string preset = "overall";  // overall | classwise
  int K = 4;
  int d = 10;
  int n0 = 100;
  int reps = 500;
  std::uint64_t seed = 1;
  std::vector<double> alphas = {0.05, 0.1, 0.15, 0.2};
  std::string scores = "softmax";  // oracle | softmax
  std::string out_dir = ".";
  int threads = 1;
  bool freeze_priors = false;
  bool with_epsp = false;
  bool with_oracle_rule = false;
  std::string design_file;  // optional key=value file; overrides the fields above
};
void cmd_simulate(SimulateConfig config);

struct DecideConfig {
  std::string target_scores;
  std::string holdout_scores;
  std::string holdout_labels;
  std::string partition = "overall";
  std::vector<double> alphas = {0.1};
  std::vector<double> alpha_prime;  // e-value command only; defaults to alphas
  std::uint64_t seed = 0;           // tie randomization for argmax pre-labels
  std::string out_dir = ".";
};
void cmd_decide(const DecideConfig& config);
void cmd_edecide(const DecideConfig& config);

struct SelectConfig {
  std::string target_scores;
  std::string holdout_scores;
  std::string holdout_labels;
  std::vector<int> region;
  double alpha = 0.1;
  std::string out_dir = ".";
};
void cmd_select(const SelectConfig& config);

struct InfosetsConfig {
  std::string target_scores;
  std::string holdout_scores;
  std::string holdout_labels;
  int L = 1;
  double alpha = 0.1;
  std::string out_dir = ".";
};
void cmd_infosets(const InfosetsConfig& config);

}  // namespace psp::cli
