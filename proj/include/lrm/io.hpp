#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "lrm/analysis.hpp"

namespace lrm {

namespace detail {

// All output files are written atomically: temp file in the same directory,
// then rename. No partial output survives a failure.
inline void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("rename failed for " + path);
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline std::string table_to_csv(const ExperimentTable& table) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& row : table.rows) {
    out << row.n << ',' << row.r << ',' << row.m << ',' << to_string(row.q)
        << ',' << detail::format_double(row.eta) << ',' << row.seed << ','
        << detail::format_double(row.rel_err) << ','
        << detail::format_double(row.abs_err) << ','
        << detail::format_double(row.tail_term) << ','
        << detail::format_double(row.noise_term) << ','
        << (row.success ? 1 : 0) << ',' << row.iterations << ','
        << detail::format_double(row.runtime_ms) << ','
        << (row.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

inline void write_csv(const std::string& path, const ExperimentTable& table) {
  detail::atomic_write(path, table_to_csv(table));
}

inline void write_manifest(const std::string& path,
                           const nlohmann::json& manifest) {
  detail::atomic_write(path, manifest.dump(2) + "\n");
}

}  // namespace lrm
