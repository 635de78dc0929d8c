#include "hamlag/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "hamlag/errors.hpp"

namespace hamlag {

namespace {

using nlohmann::json;

void rejectUnknownKeys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      throw SchemaError("scenario: unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError("scenario: missing key \"" + key + "\" in " + where);
  return *it;
}

double asNumber(const json& v, const std::string& where) {
  if (!v.is_number()) throw SchemaError("scenario: " + where + " must be a number");
  return v.get<double>();
}

Eigen::VectorXd asVector(const json& v, const std::string& where) {
  if (!v.is_array()) throw SchemaError("scenario: " + where + " must be an array of numbers");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = asNumber(v[i], where);
  return out;
}

Eigen::MatrixXd asMatrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw SchemaError("scenario: " + where + " must be a matrix");
  const std::size_t rows = v.size();
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) throw SchemaError("scenario: " + where + " must be a matrix");
  Eigen::MatrixXd out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) {
      throw SchemaError("scenario: " + where + " rows must have equal length");
    }
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = asNumber(v[i][j], where);
  }
  return out;
}

}  // namespace

std::string fnv1aHex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario parseScenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("scenario: top level must be an object");
  rejectUnknownKeys(j, {"ambient", "metric_family", "group", "lagrangian", "numerics", "run"},
                    "top level");

  Scenario sc;
  sc.raw = text;
  sc.hash = fnv1aHex(text);

  // ambient
  const json& amb = require(j, "ambient", "top level");
  rejectUnknownKeys(amb, {"kind", "n"}, "ambient");
  const std::string akind = require(amb, "kind", "ambient").get<std::string>();
  if (akind == "flat_cn") {
    sc.ambient_kind = AmbientKind::FlatCn;
    sc.n = static_cast<int>(asNumber(require(amb, "n", "ambient"), "ambient.n"));
    if (sc.n < 1 || sc.n > 2) throw SchemaError("scenario: ambient.n must be 1 or 2");
  } else if (akind == "sphere_s2") {
    sc.ambient_kind = AmbientKind::SphereS2;
    sc.n = 1;
    if (amb.contains("n")) throw SchemaError("scenario: sphere_s2 takes no n");
  } else {
    throw SchemaError("scenario: ambient.kind must be flat_cn or sphere_s2");
  }

  // metric family
  if (j.contains("metric_family")) {
    const json& fam = j["metric_family"];
    rejectUnknownKeys(fam, {"kind", "kappa", "warp_coeff", "t_range"}, "metric_family");
    const std::string fkind = require(fam, "kind", "metric_family").get<std::string>();
    if (fkind == "constant") {
      sc.family.kind = MetricFamilyKind::Constant;
    } else if (fkind == "cheeger") {
      sc.family.kind = MetricFamilyKind::Cheeger;
    } else if (fkind == "homothety") {
      sc.family.kind = MetricFamilyKind::Homothety;
      sc.family.kappa = asNumber(require(fam, "kappa", "metric_family"), "metric_family.kappa");
    } else if (fkind == "warped_s2") {
      sc.family.kind = MetricFamilyKind::WarpedS2;
      sc.family.warp_coeff =
          asNumber(require(fam, "warp_coeff", "metric_family"), "metric_family.warp_coeff");
      if (sc.ambient_kind != AmbientKind::SphereS2) {
        throw SchemaError("scenario: warped_s2 family requires the sphere_s2 ambient");
      }
    } else {
      throw SchemaError("scenario: unknown metric_family.kind \"" + fkind + "\"");
    }
    if (fam.contains("t_range")) {
      const Eigen::VectorXd r = asVector(fam["t_range"], "metric_family.t_range");
      if (r.size() != 2) throw SchemaError("scenario: t_range must have two entries");
      sc.family.t_min = r[0];
      sc.family.t_max = r[1];
    }
  }

  // group
  if (j.contains("group")) {
    const json& grp = j["group"];
    rejectUnknownKeys(grp, {"generators", "Q"}, "group");
    const std::string g = require(grp, "generators", "group").get<std::string>();
    if (g == "torus") {
      sc.action_kind = ActionKind::Torus;
    } else if (g == "so2") {
      sc.action_kind = ActionKind::SO2;
    } else if (g == "so3") {
      sc.action_kind = ActionKind::SO3;
    } else {
      throw SchemaError("scenario: group.generators must be torus, so2 or so3");
    }
    if ((sc.action_kind == ActionKind::Torus) != (sc.ambient_kind == AmbientKind::FlatCn)) {
      throw SchemaError("scenario: torus acts on flat_cn; so2/so3 act on sphere_s2");
    }
    if (grp.contains("Q")) sc.action_q = asMatrix(grp["Q"], "group.Q");
  } else {
    sc.action_kind =
        sc.ambient_kind == AmbientKind::FlatCn ? ActionKind::Torus : ActionKind::SO2;
  }

  // lagrangian
  const json& lag = require(j, "lagrangian", "top level");
  rejectUnknownKeys(lag, {"base_point", "harmonic_part", "h_modes"}, "lagrangian");
  sc.base_point = asVector(require(lag, "base_point", "lagrangian"), "lagrangian.base_point");
  const int d = sc.ambient_kind == AmbientKind::FlatCn ? sc.n : 1;
  if (sc.base_point.size() != d) {
    throw SchemaError("scenario: lagrangian.base_point must have length " + std::to_string(d));
  }
  sc.harmonic = Eigen::VectorXd::Zero(d);
  if (lag.contains("harmonic_part")) {
    sc.harmonic = asVector(lag["harmonic_part"], "lagrangian.harmonic_part");
    if (sc.harmonic.size() != d) {
      throw SchemaError("scenario: lagrangian.harmonic_part must have length " +
                        std::to_string(d));
    }
  }
  if (lag.contains("h_modes") && !lag["h_modes"].is_string()) {
    const json& hm = lag["h_modes"];
    if (!hm.is_array()) throw SchemaError("scenario: lagrangian.h_modes must be \"zero\" or a list");
    for (const json& entry : hm) {
      rejectUnknownKeys(entry, {"k", "re", "im"}, "lagrangian.h_modes[]");
      const Eigen::VectorXd k = asVector(require(entry, "k", "h_modes"), "h_modes.k");
      if (k.size() != d) throw SchemaError("scenario: h_modes.k must have length " +
                                           std::to_string(d));
      const double re = entry.contains("re") ? asNumber(entry["re"], "h_modes.re") : 0.0;
      const double im = entry.contains("im") ? asNumber(entry["im"], "h_modes.im") : 0.0;
      sc.h_modes.emplace_back(static_cast<int>(k[0]), d == 2 ? static_cast<int>(k[1]) : 0, re,
                              im);
    }
  } else if (lag.contains("h_modes") && lag["h_modes"].get<std::string>() != "zero") {
    throw SchemaError("scenario: lagrangian.h_modes string form must be \"zero\"");
  }

  // numerics
  if (j.contains("numerics")) {
    const json& num = j["numerics"];
    rejectUnknownKeys(num, {"cutoff", "tol"}, "numerics");
    if (num.contains("cutoff")) {
      sc.cutoff = static_cast<int>(asNumber(num["cutoff"], "numerics.cutoff"));
      if (sc.cutoff < 2 || sc.cutoff > 64) {
        throw SchemaError("scenario: numerics.cutoff must lie in [2, 64]");
      }
    }
    if (num.contains("tol")) {
      sc.tol = asNumber(num["tol"], "numerics.tol");
      if (!(sc.tol > 0.0)) throw SchemaError("scenario: numerics.tol must be positive");
    }
  }

  // run
  if (j.contains("run")) {
    const json& run = j["run"];
    rejectUnknownKeys(run,
                      {"t", "t_max", "steps", "eta_target", "jacobi", "kappa", "lambda1"},
                      "run");
    sc.run = run;
  } else {
    sc.run = json::object();
  }
  return sc;
}

Scenario loadScenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("scenario: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parseScenario(text);
}

std::shared_ptr<const AmbientModel> Scenario::buildModel() const {
  GroupActionData action;
  action.kind = action_kind;
  action.Q = action_q;
  if (ambient_kind == AmbientKind::FlatCn) {
    return std::make_shared<AmbientModel>(makeFlatCn(n, family, action));
  }
  return std::make_shared<AmbientModel>(makeSphere(family, action));
}

LagrangianRep Scenario::buildRep(std::shared_ptr<const AmbientModel> model) const {
  const int d = model->chartDim();
  const int N = cutoff > 0 ? cutoff : defaultCutoff(d);
  SpectralField h(d, N);
  for (const auto& [k1, k2, re, im] : h_modes) {
    if (std::abs(k1) > N || std::abs(k2) > N) {
      throw SchemaError("scenario: h_modes wavenumber exceeds the cutoff");
    }
    if (k1 == 0 && k2 == 0) throw SchemaError("scenario: h_modes must not set the mean");
    h.mode(k1, k2) = std::complex<double>(re, im);
    h.mode(-k1, -k2) = std::complex<double>(re, -im);
  }
  return makeRep(std::move(model), base_point, harmonic, std::move(h));
}

nlohmann::json repToJson(const LagrangianRep& rep) {
  json j;
  j["base_point"] = std::vector<double>(rep.base_point.data(),
                                        rep.base_point.data() + rep.base_point.size());
  j["harmonic_part"] =
      std::vector<double>(rep.harmonic.data(), rep.harmonic.data() + rep.harmonic.size());
  json modes = json::array();
  const int N = rep.cutoff();
  const int d = rep.h.dim();
  for (int k1 = -N; k1 <= N; ++k1) {
    const int k2max = d == 1 ? 0 : N;
    for (int k2 = -k2max; k2 <= k2max; ++k2) {
      if (k1 < 0 || (k1 == 0 && k2 <= 0)) continue;  // store one representative per pair
      const std::complex<double> c = rep.h.mode(k1, k2);
      if (c == std::complex<double>(0.0, 0.0)) continue;
      json entry;
      entry["k"] = d == 1 ? json::array({k1}) : json::array({k1, k2});
      entry["re"] = c.real();
      entry["im"] = c.imag();
      modes.push_back(std::move(entry));
    }
  }
  j["h_modes"] = std::move(modes);
  return j;
}

LagrangianRep repFromJson(const nlohmann::json& j, std::shared_ptr<const AmbientModel> model,
                          int cutoff) {
  const int d = model->chartDim();
  const int N = cutoff > 0 ? cutoff : defaultCutoff(d);
  rejectUnknownKeys(j, {"base_point", "harmonic_part", "h_modes"}, "rep");
  const Eigen::VectorXd base = asVector(require(j, "base_point", "rep"), "rep.base_point");
  Eigen::VectorXd harm = Eigen::VectorXd::Zero(d);
  if (j.contains("harmonic_part")) harm = asVector(j["harmonic_part"], "rep.harmonic_part");
  SpectralField h(d, N);
  if (j.contains("h_modes")) {
    for (const json& entry : j["h_modes"]) {
      const Eigen::VectorXd k = asVector(require(entry, "k", "rep.h_modes"), "rep.h_modes.k");
      const int k1 = static_cast<int>(k[0]);
      const int k2 = d == 2 ? static_cast<int>(k[1]) : 0;
      const double re = entry.contains("re") ? entry["re"].get<double>() : 0.0;
      const double im = entry.contains("im") ? entry["im"].get<double>() : 0.0;
      h.mode(k1, k2) = {re, im};
      h.mode(-k1, -k2) = {re, -im};
    }
  }
  return makeRep(std::move(model), base, harm, std::move(h));
}

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void writeFile(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw NumericError("cannot write " + path.string());
}

std::string csvNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double runTime(const Scenario& sc) {
  return sc.run.contains("t") ? sc.run["t"].get<double>() : 0.0;
}

double effectiveTol(const Scenario& sc, const RunOptions& opts) {
  return opts.tol_override > 0.0 ? opts.tol_override : sc.tol;
}

Scenario withOverrides(Scenario sc, const RunOptions& opts) {
  if (opts.cutoff_override > 0) sc.cutoff = opts.cutoff_override;
  return sc;
}

}  // namespace

RunReport cmdVerify(const Scenario& scenario, const RunOptions& opts) {
  Stopwatch watch;
  const Scenario sc = withOverrides(scenario, opts);
  auto model = sc.buildModel();
  const LagrangianRep rep = sc.buildRep(model);
  const double t = runTime(sc);
  const double tol = effectiveTol(sc, opts);

  const ElResidual res = elResidual(rep, t);
  const double vol = volume(rep, t);
  const double exactness = lagrangianExactness(realize(rep));
  const bool stationary = res.sup_norm < tol;

  json out;
  out["residual_sup"] = res.sup_norm;
  out["volume"] = vol;
  out["lagrangian_exactness"] = exactness;
  out["stationary"] = stationary;
  out["tol"] = tol;
  out["t"] = t;

  RunReport report;
  report.command = "verify";
  report.scenario_hash = sc.hash;
  report.verdicts = out;
  const auto path = opts.out_dir / "verify.json";
  writeFile(path, out.dump(2) + "\n");
  report.outputs.push_back(path.string());
  report.exit_code = stationary ? 0 : 1;
  report.seconds = watch.seconds();
  return report;
}

RunReport cmdSpectrum(const Scenario& scenario, const RunOptions& opts) {
  Stopwatch watch;
  const Scenario sc = withOverrides(scenario, opts);
  auto model = sc.buildModel();
  const LagrangianRep rep = sc.buildRep(model);
  const double t = runTime(sc);

  std::string form = sc.run.contains("jacobi") ? sc.run["jacobi"].get<std::string>() : "full";
  if (!opts.jacobi_override.empty()) form = opts.jacobi_override;
  if (form != "full" && form != "ke") throw SchemaError("run.jacobi must be full or ke");

  JacobiOperator op;
  if (form == "ke") {
    if (!sc.run.contains("kappa")) throw SchemaError("run.kappa required for the ke form");
    op = jacobiKeMinimal(rep, sc.run["kappa"].get<double>(), t);
  } else {
    op = jacobiFull(rep, t);
  }
  const KernelCandidates cand = kernelCandidates(rep);
  const NondegeneracyVerdict verdict = nondegeneracy(op, cand);

  std::string csv = "index,eigenvalue\n";
  for (int i = 0; i < op.eigenvalues.size(); ++i) {
    csv += std::to_string(i) + "," + csvNumber(op.eigenvalues[i]) + "\n";
  }

  json out;
  out["form"] = form;
  out["t"] = t;
  out["cutoff"] = op.cutoff;
  out["basis_size"] = op.basis_size;
  out["kernel_dim"] = verdict.kernel_dim;
  out["candidate_dim"] = verdict.candidate_dim;
  out["verdict"] = verdictName(verdict.verdict);
  out["kernel_gap"] = verdict.kernel_gap;
  out["kernel_tol_abs"] = verdict.kernel_tol_abs;
  out["principal_angles"] = std::vector<double>(
      verdict.principal_angles.data(),
      verdict.principal_angles.data() + verdict.principal_angles.size());
  out["symmetry_defect"] = op.symmetry_defect;
  out["stationary"] = op.stationary;
  out["residual_sup"] = op.residual_sup;

  RunReport report;
  report.command = "spectrum";
  report.scenario_hash = sc.hash;
  report.verdicts = out;
  const auto csv_path = opts.out_dir / "spectrum.csv";
  const auto json_path = opts.out_dir / "verdict.json";
  writeFile(csv_path, csv);
  writeFile(json_path, out.dump(2) + "\n");
  report.outputs.push_back(csv_path.string());
  report.outputs.push_back(json_path.string());
  report.exit_code = verdict.verdict == Verdict::GNondegenerate ? 0 : 1;
  report.seconds = watch.seconds();
  return report;
}

RunReport cmdStability(const Scenario& scenario, const RunOptions& opts) {
  Stopwatch watch;
  const Scenario sc = withOverrides(scenario, opts);
  if (!sc.run.contains("kappa")) throw SchemaError("run.kappa required for stability");
  const double kappa = sc.run["kappa"].get<double>();

  double lambda1;
  std::string source;
  if (!sc.run.contains("lambda1") ||
      (sc.run["lambda1"].is_string() && sc.run["lambda1"] == "from_spectrum")) {
    auto model = sc.buildModel();
    const LagrangianRep rep = sc.buildRep(model);
    lambda1 = laplaceLambda1(rep, runTime(sc));
    source = "from_spectrum";
  } else if (sc.run["lambda1"].is_number()) {
    lambda1 = sc.run["lambda1"].get<double>();
    source = "user";
  } else {
    throw SchemaError("run.lambda1 must be a number or \"from_spectrum\"");
  }
  const bool stable = stabilityCriterion(lambda1, kappa);

  json out;
  out["lambda1"] = lambda1;
  out["lambda1_source"] = source;
  out["kappa"] = kappa;
  out["stable"] = stable;

  RunReport report;
  report.command = "stability";
  report.scenario_hash = sc.hash;
  report.verdicts = out;
  const auto path = opts.out_dir / "stability.json";
  writeFile(path, out.dump(2) + "\n");
  report.outputs.push_back(path.string());
  report.exit_code = stable ? 0 : 1;
  report.seconds = watch.seconds();
  return report;
}

RunReport cmdContinue(const Scenario& scenario, const RunOptions& opts) {
  Stopwatch watch;
  const Scenario sc = withOverrides(scenario, opts);
  auto model = sc.buildModel();
  const LagrangianRep rep = sc.buildRep(model);

  NewtonOptions nopts;
  nopts.tol = effectiveTol(sc, opts);
  const int steps = sc.run.contains("steps") ? sc.run["steps"].get<int>() : 10;

  PathResult path;
  if (sc.run.contains("t_max")) {
    path = continueInT(makeState(rep, runTime(sc)), sc.run["t_max"].get<double>(), steps, nopts);
  } else if (sc.run.contains("eta_target")) {
    const Eigen::VectorXd target = [&] {
      Eigen::VectorXd v(sc.run["eta_target"].size());
      for (std::size_t i = 0; i < sc.run["eta_target"].size(); ++i) {
        v[static_cast<int>(i)] = sc.run["eta_target"][i].get<double>();
      }
      return v;
    }();
    path = continueInLeaf(makeState(rep, runTime(sc)), target, steps, nopts);
  } else {
    throw SchemaError("run.t_max or run.eta_target required for continue");
  }

  json records = json::array();
  std::string csv = "step,t,eta,volume,residual,kernel_gap,verdict\n";
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const ContinuationState& s = path.steps[i];
    json rec;
    rec["t"] = s.t;
    rec["eta"] = std::vector<double>(s.eta().data(), s.eta().data() + s.eta().size());
    rec["volume"] = s.volume;
    rec["residual"] = s.residual_sup;
    rec["kernel_gap"] = s.kernel_gap;
    rec["verdict"] = s.verdict ? verdictName(s.verdict->verdict) : "inconclusive";
    rec["newton_iters"] = s.newton_iters;
    records.push_back(std::move(rec));

    std::string eta_str;
    for (int a = 0; a < s.eta().size(); ++a) {
      if (a) eta_str += ";";
      eta_str += csvNumber(s.eta()[a]);
    }
    csv += std::to_string(i) + "," + csvNumber(s.t) + "," + eta_str + "," +
           csvNumber(s.volume) + "," + csvNumber(s.residual_sup) + "," +
           csvNumber(s.kernel_gap) + "," +
           (s.verdict ? verdictName(s.verdict->verdict) : "inconclusive") + "\n";
  }

  json out;
  out["termination"] = terminationName(path.termination);
  out["message"] = path.message;
  out["degenerate_start"] = path.degenerate_start;
  out["records"] = std::move(records);

  RunReport report;
  report.command = "continue";
  report.scenario_hash = sc.hash;
  report.verdicts = out;
  const auto json_path = opts.out_dir / "path.json";
  const auto csv_path = opts.out_dir / "path.csv";
  writeFile(json_path, out.dump(2) + "\n");
  writeFile(csv_path, csv);
  report.outputs.push_back(json_path.string());
  report.outputs.push_back(csv_path.string());
  switch (path.termination) {
    case Termination::Completed:
      report.exit_code = 0;
      break;
    case Termination::DegeneracyDetected:
      report.exit_code = 1;
      break;
    case Termination::ChartExit:
      report.exit_code = 3;
      break;
    case Termination::NoConvergence:
      report.exit_code = 5;
      break;
  }
  report.seconds = watch.seconds();
  return report;
}

int runCommand(const std::string& command, const std::filesystem::path& scenario_path,
               const RunOptions& opts, bool quiet) {
  try {
    const Scenario sc = loadScenario(scenario_path);
    RunReport report;
    if (command == "verify") {
      report = cmdVerify(sc, opts);
    } else if (command == "spectrum") {
      report = cmdSpectrum(sc, opts);
    } else if (command == "stability") {
      report = cmdStability(sc, opts);
    } else if (command == "continue") {
      report = cmdContinue(sc, opts);
    } else {
      throw SchemaError("unknown command: " + command);
    }
    if (!quiet) {
      json j;
      j["command"] = report.command;
      j["scenario_hash"] = report.scenario_hash;
      j["seconds"] = report.seconds;
      j["outputs"] = report.outputs;
      j["verdicts"] = report.verdicts;
      j["exit_code"] = report.exit_code;
      std::printf("%s\n", j.dump(2).c_str());
    }
    return report.exit_code;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "schema error: %s\n", e.what());
    return 2;
  } catch (const ChartRangeError& e) {
    std::fprintf(stderr, "chart error: %s\n", e.what());
    return 3;
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "precondition error: %s\n", e.what());
    return 4;
  } catch (const Error& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 5;
  }
}

}  // namespace hamlag
