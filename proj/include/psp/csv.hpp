#pragma once

#include <map>
#include <string>
#include <vector>

#include "psp/core.hpp"

// Comma-separated tabular I/O for the command line tools. Input files may
// start with one non-numeric header row, which is skipped; parse errors
// report 1-based line numbers. Output files are deterministic: metadata
// lines start with '#', reals are printed with round-trip precision.

namespace psp::io {

// full-precision, locale-independent double formatting; NaN prints empty
std::string fmt(double v);

// m x expected_cols numeric matrix; expected_cols <= 0 means "infer from the
// first data row"
Eigen::MatrixXd read_matrix(const std::string& path, int expected_cols = -1);

// single column of integer labels (a header row is skipped)
std::vector<int> read_labels(const std::string& path);

struct Table {
  std::vector<std::string> comments;  // written as "# ..." lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_table(const std::string& path, const Table& table);

// flat "key = value" configuration text; '#' starts a comment
std::map<std::string, std::string> parse_kv_file(const std::string& path);

std::vector<std::string> split(const std::string& text, char sep);
std::vector<double> parse_doubles(const std::string& text, const char* what);
std::vector<int> parse_ints(const std::string& text, const char* what);

}  // namespace psp::io
