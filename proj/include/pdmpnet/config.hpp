// JSON run configuration shared by the command-line tool.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "pdmpnet/experiments.hpp"
#include "pdmpnet/kernel.hpp"
#include "pdmpnet/model.hpp"
#include "pdmpnet/simulator.hpp"

namespace pdmpnet {

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  ModelParams params;
  RateFunction f;
  KernelSpec kernel;
  SimConfig sim;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::vector<double> points;
  double region_d = 0.05;
  double level = 0.95;
  std::optional<StudyConfig> study;

  /// Region membership of every point and a kernel order of at least
  /// floor(beta).
  void validate() const;
};

/// beta = 1 class of a built-in family on [0, K], with headroom in F and L
/// so that small perturbations stay inside it.
HolderClass default_holder(RateFamily family, double scale, double k_max);

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

}  // namespace pdmpnet
