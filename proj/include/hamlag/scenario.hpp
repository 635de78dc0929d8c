#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hamlag/continuation.hpp"

namespace hamlag {

/// Parsed and validated scenario file.  Validation is strict: unknown keys
/// are rejected everywhere, and values are type- and range-checked against
/// the published schema (docs/scenario.schema.json).
struct Scenario {
  // ambient
  AmbientKind ambient_kind = AmbientKind::FlatCn;
  int n = 1;
  // metric family
  MetricFamily family;
  // group
  ActionKind action_kind = ActionKind::Torus;
  Eigen::MatrixXd action_q;  // empty = identity
  // lagrangian
  Eigen::VectorXd base_point;
  Eigen::VectorXd harmonic;
  std::vector<std::tuple<int, int, double, double>> h_modes;  // k1, k2, re, im
  // numerics
  int cutoff = 0;  // 0 = per-dimension default
  double tol = 1e-10;
  // run parameters
  nlohmann::json run;

  std::string raw;   // original file bytes
  std::string hash;  // FNV-1a of raw, hex

  std::shared_ptr<const AmbientModel> buildModel() const;
  LagrangianRep buildRep(std::shared_ptr<const AmbientModel> model) const;
};

Scenario parseScenario(const std::string& text);
Scenario loadScenario(const std::filesystem::path& path);

/// Rep <-> JSON (base_point, harmonic_part, mode table of h).
nlohmann::json repToJson(const LagrangianRep& rep);
LagrangianRep repFromJson(const nlohmann::json& j, std::shared_ptr<const AmbientModel> model,
                          int cutoff);

struct RunOptions {
  std::filesystem::path out_dir = "out";
  double tol_override = 0.0;   // > 0 replaces scenario tol
  int cutoff_override = 0;     // > 0 replaces scenario cutoff
  std::string jacobi_override; // "full" or "ke"
};

struct RunReport {
  std::string command;
  std::string scenario_hash;
  double seconds = 0.0;
  std::vector<std::string> outputs;
  nlohmann::json verdicts;
  int exit_code = 0;
};

RunReport cmdVerify(const Scenario& sc, const RunOptions& opts);
RunReport cmdSpectrum(const Scenario& sc, const RunOptions& opts);
RunReport cmdStability(const Scenario& sc, const RunOptions& opts);
RunReport cmdContinue(const Scenario& sc, const RunOptions& opts);

/// Exit-code contract: 0 ok, 1 verdict-negative, 2 schema, 3 chart,
/// 4 precondition, 5 numeric failure.
int runCommand(const std::string& command, const std::filesystem::path& scenario_path,
               const RunOptions& opts, bool quiet = false);

std::string fnv1aHex(const std::string& bytes);

}  // namespace hamlag
