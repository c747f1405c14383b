#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace nhqm::io {

inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// CSV with '#'-prefixed metadata lines, a header row and 17-significant-digit floats.
class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
  void meta(const std::string& key, double value) { meta(key, fmt17(value)); }

  void add_row(std::vector<Cell> row) {
    require(row.size() == columns_.size(), ErrorKind::DimensionMismatch, "CSV row width mismatch");
    rows_.push_back(std::move(row));
  }

  std::size_t rows() const { return rows_.size(); }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : meta_) os << "# " << k << "=" << v << "\n";
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << "\n";
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) os << ",";
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) os << fmt17(v);
              else os << v;
            },
            row[c]);
      }
      os << "\n";
    }
  }

  std::string str() const {
    std::ostringstream os;
    write(os);
    return os.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::vector<Cell>> rows_;
};

// Matrix schema: {"dim": n, "entries": [[re, im], ...]} in row-major order.
inline nlohmann::json matrix_to_json(const Mat& A) {
  require(A.rows() == A.cols(), ErrorKind::DimensionMismatch, "only square matrices serialize");
  nlohmann::json j;
  j["dim"] = A.rows();
  auto& e = j["entries"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c) e.push_back({A(r, c).real(), A(r, c).imag()});
  return j;
}

inline Mat matrix_from_json(const nlohmann::json& j) {
  require(j.is_object() && j.contains("dim") && j.contains("entries"), ErrorKind::ConfigInvalid,
          "matrix JSON needs 'dim' and 'entries'");
  require(j["dim"].is_number_integer() && j["dim"].get<long long>() > 0, ErrorKind::ConfigInvalid,
          "matrix 'dim' must be a positive integer");
  const auto n = static_cast<Eigen::Index>(j["dim"].get<long long>());
  const auto& e = j["entries"];
  require(e.is_array() && static_cast<Eigen::Index>(e.size()) == n * n, ErrorKind::ConfigInvalid,
          "matrix 'entries' must hold dim*dim pairs");
  Mat A(n, n);
  for (Eigen::Index k = 0; k < n * n; ++k) {
    const auto& p = e[static_cast<std::size_t>(k)];
    require(p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number(),
            ErrorKind::ConfigInvalid, "matrix entries must be [re, im] pairs");
    A(k / n, k % n) = cplx(p[0].get<double>(), p[1].get<double>());
  }
  return A;
}

inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::ConfigInvalid, "cannot open output file " + path);
  f << text;
}

}  // namespace nhqm::io
