#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kgf/energies.hpp"
#include "kgf/flows.hpp"
#include "kgf/kernels.hpp"
#include "kgf/measures.hpp"

// Strict JSON config parsing for the CLI. Unknown keys are rejected with
// the offending path, so configs stay diffable and typo-proof.

namespace kgf::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FlowTask {
  Grid grid;
  GeometrySpec geometry;
  EnergySpec energy;
  GridMeasure initial;
  double t_end;
  double dt;
  int record_every;
  TimeScheme scheme;
  bool scheme_given;
  std::vector<std::string> diagnostics;
  std::string output_dir;
};

struct GeodesicTask {
  Grid grid;
  std::string kind;  // fisher_rao | mmd
  GridMeasure mu0;
  GridMeasure mu1;
  int steps;
  std::string output_dir;
};

struct DiscrepancyTask {
  Grid grid;
  std::string name;
  GridMeasure mu;
  GridMeasure nu;
  std::optional<KernelSpec> kernel;
  std::optional<GridMeasure> omega;
  double lambda = 0.0;
  double a = 1.0;
  std::string output_dir;  // empty: print only
};

struct GammaTask {
  Grid grid;
  KernelSpec kernel;
  EnergySpec energy;
  GridMeasure initial;
  double t_end;
  double dt;
  std::vector<double> lambdas;
  std::string output_dir;
};

using Task = std::variant<FlowTask, GeodesicTask, DiscrepancyTask, GammaTask>;

struct ParsedConfig {
  Task task;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

ParsedConfig parse_config(const nlohmann::json& root);
ParsedConfig load_config(const std::string& path);

}  // namespace kgf::cli
