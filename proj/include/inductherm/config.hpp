#pragma once

// Run configuration: JSON file checked against a unit-annotated schema.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "inductherm/diagnostics.hpp"
#include "inductherm/em_solver.hpp"
#include "inductherm/geometry.hpp"
#include "inductherm/heat_solver.hpp"
#include "inductherm/materials.hpp"
#include "inductherm/phase_solver.hpp"

namespace inductherm {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

enum class SweepPolicy { Accept, Abort, Halve };

struct StepperConfig {
  double dt = 2e-3;        // s
  double t_final = 0.4;    // s
  int max_sweeps = 3;
  double sweep_tol = 1e-8;
  double relaxation = 1.0;  // under-relaxation of the coefficient temperature
  int snapshot_every = 0;   // 0: no snapshots
  SweepPolicy on_sweep_failure = SweepPolicy::Accept;
  int max_halvings = 4;
  int steps() const;        // number of macro steps, t_final / dt rounded
};

struct GridConfig {
  double lx = 1.0, ly = 1.0;
  int nx = 64, ny = 64;
  Rect workpiece;
  std::vector<InductorRect> inductors;
  std::string mask_file;
};

struct DiagnosticsConfig {
  WeightSpec weight;          // the nonuniform weight; the uniform one is always on
  double tolerance = 1e-8;    // relative slack tolerance of the certificates
  SamplingSpec sampling;
};

struct RunConfig {
  nlohmann::json normalized;  // all defaults filled, units stripped
  std::string hash;           // SHA-256 of the normalized JSON
  std::vector<std::string> warnings;

  GridConfig grid;
  MaterialLaws laws;
  SourceModel source;
  HeatStepConfig heat;
  double theta0 = 300.0;
  double theta0_perturbation = 0.0;  // relative, applied uniformly
  PhaseStepOptions phase;
  double z0 = 0.0;
  EmStepOptions em;
  StepperConfig stepper;
  DiagnosticsConfig diagnostics;
  bool write_snapshots = true;
};

/// The schema defaults as a JSON document (the bundled battery problem).
nlohmann::json default_config();

/// Validates `doc` against the schema. Strict mode turns unknown keys into
/// errors; lenient mode records them as warnings. Throws ConfigError listing
/// every violation.
RunConfig config_from_json(const nlohmann::json& doc, bool strict = true);

/// Applies dotted `key=value` overrides; the value is parsed as JSON when
/// possible and kept as a string otherwise.
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

RunConfig parse_config(const std::string& path, bool strict = true,
                       const std::vector<std::string>& overrides = {});

RegionGrid build_grid(const RunConfig& cfg);

std::string sha256_hex(const std::string& data);

}  // namespace inductherm
