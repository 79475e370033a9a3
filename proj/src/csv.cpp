#include "psp/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace psp::io {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[64];  // shortest representation that round-trips
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

}  // namespace

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const std::string& part : split(text, ',')) {
    double v;
    if (!parse_double(part, v))
      throw Error(Errc::BadConfig, std::string(what) + ": cannot parse '" + part + "' as a number");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
  std::vector<int> out;
  for (double v : parse_doubles(text, what)) {
    if (v != std::floor(v))
      throw Error(Errc::BadConfig, std::string(what) + ": expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Eigen::MatrixXd read_matrix(const std::string& path, int expected_cols) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadData, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool header_allowed = true;
  int cols = expected_cols;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::vector<std::string> parts = split(t, ',');
    std::vector<double> row;
    row.reserve(parts.size());
    bool numeric = true;
    for (const std::string& part : parts) {
      double v;
      if (!parse_double(part, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (header_allowed) {  // a single leading header row is tolerated
        header_allowed = false;
        continue;
      }
      throw Error(Errc::BadData, path + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    header_allowed = false;
    if (cols <= 0) cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != cols)
      throw Error(Errc::BadData, path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(cols) + " columns, found " +
                                     std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(Errc::BadData, path + ": no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<size_t>(j)];
  return m;
}

std::vector<int> read_labels(const std::string& path) {
  const Eigen::MatrixXd m = read_matrix(path, 1);
  std::vector<int> labels(static_cast<size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double v = m(i, 0);
    if (v != std::floor(v))
      throw Error(Errc::BadData, path + ": label " + fmt(v) + " is not an integer");
    labels[static_cast<size_t>(i)] = static_cast<int>(v);
  }
  return labels;
}

void write_table(const std::string& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::BadData, "cannot write '" + path + "'");
  for (const std::string& c : table.comments) out << "# " << c << "\n";
  for (size_t i = 0; i < table.columns.size(); ++i)
    out << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) out << row[i] << (i + 1 < row.size() ? "," : "");
    out << "\n";
  }
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadConfig, "cannot open design file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::BadConfig, path + ":" + std::to_string(lineno) + ": expected key = value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

}  // namespace psp::io
