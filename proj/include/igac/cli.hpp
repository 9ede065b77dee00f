#pragma once

// Run configuration (key=value files with flag overrides) and result files.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "igac/bench.hpp"

namespace igac {

/// Invalid or malformed configuration; `field` names the offending key
/// (empty for file-level problems).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what) : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  BenchConfig bench;
  std::filesystem::path out = "out";
  bool vtk = false;

  bool operator==(const RunConfig&) const = default;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Keys accepted in config files, in echo order.
const std::vector<std::string>& config_keys();

/// Parses `key = value` lines ('#' starts a comment), applies `overrides`
/// on top and returns the validated config with scenario defaults filled.
RunConfig parse_config_text(const std::string& text, const Overrides& overrides = {});
RunConfig parse_config(const std::filesystem::path& file, const Overrides& overrides = {});

/// The resolved config in the file format; parses back to the same config.
std::string config_text(const RunConfig& cfg);

/// convergence.csv, with a rate footer row when there are two or more rows.
std::string convergence_csv(const ConvergenceTable& table);
std::string pressure_profile_csv(const std::vector<PressurePoint>& profile);
/// Analytical constants and per-level solver statistics (no timings).
std::string summary_text(const BenchResult& res);

/// Displacement and Cauchy stress sampled on `samples`+1 points per
/// element direction, as a legacy ASCII VTK unstructured grid.
void write_vtk(const LevelSolution& sol, const std::filesystem::path& file, int samples);

/// Writes config.txt, convergence.csv, pressure_profile.csv, summary.txt
/// and, when enabled and a finest level exists, solution.vtk into cfg.out.
/// Returns the written paths. I/O failures throw std::runtime_error naming
/// the path.
std::vector<std::filesystem::path> emit_outputs(const BenchResult& res, const RunConfig& cfg);

}  // namespace igac
