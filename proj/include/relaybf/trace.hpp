#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "relaybf/errors.hpp"

namespace relaybf {

/// Append-only per-iteration record with a fixed column layout.
class SolverTrace {
public:
  SolverTrace() = default;
  explicit SolverTrace(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::initializer_list<double> row) { add(std::vector<double>(row)); }
  void add(std::vector<double> row) {
    if (row.size() != columns_.size()) throw InputError("SolverTrace: row width does not match columns");
    rows_.push_back(std::move(row));
  }
  void note(std::string text) { notes_.push_back(std::move(text)); }

  const std::vector<std::string> &columns() const noexcept { return columns_; }
  const std::vector<std::vector<double>> &rows() const noexcept { return rows_; }
  const std::vector<std::string> &notes() const noexcept { return notes_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const std::vector<double> &back() const { return rows_.back(); }

  /// Value of `column` in row `i`.
  double at(std::size_t i, const std::string &column) const {
    for (std::size_t c = 0; c < columns_.size(); ++c)
      if (columns_[c] == column) return rows_.at(i)[c];
    throw InputError("SolverTrace: unknown column " + column);
  }

  void write_csv(std::ostream &os) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << '\n';
    char buf[64];
    for (const auto &row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", row[c]);
        os << (c ? "," : "") << buf;
      }
      os << '\n';
    }
  }
  std::string to_csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
  }

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::string> notes_;
};

} // namespace relaybf
