#pragma once

// Run reports: one CSV row (with header) plus a JSON sidecar at <path>.json.

#include "krp/io.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>

namespace krp {

/// printf %.17g, enough to round-trip any double
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string join_indices(const std::vector<Index>& v, char sep = ';') {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += sep;
    out += std::to_string(v[k]);
  }
  return out;
}

struct RunReport {
  std::string algorithm;
  std::vector<Index> ranks;
  std::uint64_t seed = 0;
  double relative_error = 0.0;
  std::uint64_t flops = 0;        // multiply-adds counted by the kernels
  std::uint64_t rng_scalars = 0;  // RNG ledger total
  double elapsed_seconds = 0.0;
  // sidecar-only extras
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, std::string>> notes;

  void validate() const {
    detail::require(!algorithm.empty(), "RunReport: algorithm name is empty");
    detail::require(std::isfinite(relative_error) && std::isfinite(elapsed_seconds),
                    "RunReport: numeric fields must be finite");
    for (const auto& [k, v] : metrics) detail::require(std::isfinite(v), "RunReport: metric " + k + " is not finite");
  }

  static std::string csv_header() { return "algorithm,ranks,seed,relative_error,flops,rng_scalars,elapsed_seconds"; }

  std::string csv_row() const {
    return algorithm + "," + join_indices(ranks) + "," + std::to_string(seed) + "," + format_double(relative_error) +
           "," + std::to_string(flops) + "," + std::to_string(rng_scalars) + "," + format_double(elapsed_seconds);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["algorithm"] = algorithm;
    j["ranks"] = ranks;
    j["seed"] = seed;
    j["relative_error"] = relative_error;
    j["flops"] = flops;
    j["rng_scalars"] = rng_scalars;
    j["elapsed_seconds"] = elapsed_seconds;
    for (const auto& [k, v] : metrics) j["metrics"][k] = v;
    for (const auto& [k, v] : notes) j["notes"][k] = v;
    return j;
  }
};

/// Writes <path> (CSV) and <path>.json atomically.
inline void write_report(const std::filesystem::path& path, const RunReport& report) {
  report.validate();
  write_file_atomic(path, RunReport::csv_header() + "\n" + report.csv_row() + "\n");
  write_file_atomic(path.string() + ".json", report.to_json().dump(2) + "\n");
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace krp
