#pragma once

#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include "icmor/core/error.hpp"
#include "icmor/core/lti_system.hpp"

namespace icmor::experiment {

namespace fs = std::filesystem;

/// Doubles with 17 significant digits, "nan"/"inf" spelled out.
inline std::string fmt(double v) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << v;
  return s.str();
}

/// Small CSV builder; every row is written as soon as it is complete.
class CsvWriter {
 public:
  explicit CsvWriter(const fs::path& path) : out_(path), path_(path) {
    if (!out_) throw Error("cli", "cannot write " + path.string(), "check the output directory");
    out_.imbue(std::locale::classic());
  }

  void header(const std::vector<std::string>& cols) { row_strings(cols); }

  void row(const std::vector<double>& vals) {
    std::vector<std::string> s;
    s.reserve(vals.size());
    for (double v : vals) s.push_back(fmt(v));
    row_strings(s);
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
    if (!out_) throw Error("cli", "write failed: " + path_.string());
  }

 private:
  std::ofstream out_;
  fs::path path_;
};

inline void write_key_values(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& kv) {
  CsvWriter w(path);
  w.header({"key", "value"});
  for (const auto& [k, v] : kv) w.row_strings({k, v});
}

/// t, then one column per row of `series`.
inline void write_series(const fs::path& path, const std::vector<double>& t, const std::vector<std::string>& names,
                         const std::vector<const Matrix*>& series) {
  CsvWriter w(path);
  std::vector<std::string> head{"t"};
  head.insert(head.end(), names.begin(), names.end());
  w.header(head);
  std::vector<double> row;
  for (std::size_t k = 0; k < t.size(); ++k) {
    row.assign(1, t[k]);
    for (const Matrix* m : series)
      for (Index i = 0; i < m->rows(); ++i) row.push_back((*m)(i, static_cast<Index>(k)));
    w.row(row);
  }
}

}  // namespace icmor::experiment
