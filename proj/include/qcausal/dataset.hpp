// Column-labelled numeric dataset plus strict CSV I/O.
//
// CSV dialect: first row is the header with unique column names, every later
// row holds one finite decimal number per column.  No quoting, no missing
// cells.  Writing uses round-trip ("%.17g") formatting so a load/save cycle
// reproduces the doubles bit for bit.
#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcausal/error.hpp"

namespace qcausal {

struct Dataset {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // n rows (samples) by names.size() columns

  [[nodiscard]] int n_rows() const { return static_cast<int>(values.rows()); }
  [[nodiscard]] int n_cols() const { return static_cast<int>(values.cols()); }

  [[nodiscard]] Eigen::VectorXd column(int j) const {
    if (j < 0 || j >= n_cols())
      throw index_error("column index " + std::to_string(j) + " out of range");
    return values.col(j);
  }

  [[nodiscard]] int column_index(const std::string& name) const {
    for (int j = 0; j < n_cols(); ++j)
      if (names[static_cast<std::size_t>(j)] == name) return j;
    throw index_error("no column named '" + name + "'");
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open file '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw input_error("file '" + path + "' is empty");

  Dataset ds;
  for (const auto& raw : detail::split_csv_line(line)) {
    const std::string name = detail::trim(raw);
    if (name.empty())
      throw input_error("file '" + path + "': empty column name in header");
    for (const auto& seen : ds.names)
      if (seen == name)
        throw input_error("file '" + path + "': duplicate column name '" +
                          name + "'");
    ds.names.push_back(name);
  }
  const std::size_t p = ds.names.size();

  std::vector<double> flat;
  int n = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != p)
      throw input_error("file '" + path + "', row " + std::to_string(line_no) +
                        ": expected " + std::to_string(p) + " cells, found " +
                        std::to_string(cells.size()));
    for (std::size_t j = 0; j < p; ++j) {
      const std::string cell = detail::trim(cells[j]);
      double v = 0.0;
      const auto* begin = cell.data();
      const auto* end = begin + cell.size();
      const auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc{} || ptr != end)
        throw input_error("file '" + path + "', row " + std::to_string(line_no) +
                          ", column '" + ds.names[j] +
                          "': cannot parse value '" + cell + "'");
      if (!std::isfinite(v))
        throw input_error("file '" + path + "', row " + std::to_string(line_no) +
                          ", column '" + ds.names[j] + "': non-finite value");
      flat.push_back(v);
    }
    ++n;
  }
  if (n == 0) throw input_error("file '" + path + "' has no data rows");

  ds.values.resize(n, static_cast<Eigen::Index>(p));
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j)
      ds.values(i, static_cast<Eigen::Index>(j)) =
          flat[static_cast<std::size_t>(i) * p + j];
  return ds;
}

// Round-trip decimal formatting for one double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Per-column standardization to mean 0, standard deviation 1 (n-1
// denominator).  Constant columns cannot be standardized and are reported by
// name; non-finite cells are reported by row and column.
inline Dataset standardize(const Dataset& ds) {
  if (ds.n_rows() < 2)
    throw size_error("standardize: need at least 2 rows");
  Dataset out = ds;
  for (int j = 0; j < ds.n_cols(); ++j) {
    for (int i = 0; i < ds.n_rows(); ++i)
      if (!std::isfinite(ds.values(i, j)))
        throw input_error("standardize: non-finite value at row " +
                          std::to_string(i) + ", column '" + ds.names[j] +
                          "'");
    const auto col = ds.values.col(j);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() /
                       (static_cast<double>(ds.n_rows()) - 1.0);
    const double sd = std::sqrt(var);
    if (!(sd > 1e-15 * std::max(1.0, std::abs(mean))))
      throw degenerate_data_error("standardize: column '" + ds.names[j] +
                                  "' is constant");
    out.values.col(j) = (col.array() - mean) / sd;
  }
  return out;
}

inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file '" + path + "'");
  for (std::size_t j = 0; j < ds.names.size(); ++j) {
    if (j) out << ',';
    out << ds.names[j];
  }
  out << '\n';
  for (int i = 0; i < ds.n_rows(); ++i) {
    for (int j = 0; j < ds.n_cols(); ++j) {
      if (j) out << ',';
      out << format_double(ds.values(i, j));
    }
    out << '\n';
  }
  if (!out) throw input_error("failed writing file '" + path + "'");
}

}  // namespace qcausal
