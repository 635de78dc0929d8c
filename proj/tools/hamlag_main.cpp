#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "hamlag/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hamlag: stationary Lagrangian verification, Jacobi spectra and continuation"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = "out";
  double tol = 0.0;
  int cutoff = 0;
  std::string jacobi;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    cmd->add_option("--out", out_dir, "output directory (default: out)");
    cmd->add_option("--tol", tol, "override numerics.tol");
    cmd->add_option("--cutoff", cutoff, "override numerics.cutoff");
  };

  CLI::App* verify = app.add_subcommand("verify", "stationarity check: residual, volume, exactness");
  add_common(verify);
  CLI::App* spectrum = app.add_subcommand("spectrum", "Jacobi eigenvalues and nondegeneracy verdict");
  add_common(spectrum);
  spectrum->add_option("--jacobi", jacobi, "operator form: full or ke")
      ->check(CLI::IsMember({"full", "ke"}));
  CLI::App* stability = app.add_subcommand("stability", "lambda_1 vs kappa stability verdict");
  add_common(stability);
  CLI::App* cont = app.add_subcommand("continue", "track the stationary Lagrangian along t or the leaf");
  add_common(cont);

  CLI11_PARSE(app, argc, argv);

  const char* log_env = std::getenv("HAMLAG_LOG");
  const bool quiet = log_env != nullptr && std::string(log_env) == "quiet";

  hamlag::RunOptions opts;
  opts.out_dir = out_dir;
  opts.tol_override = tol;
  opts.cutoff_override = cutoff;
  opts.jacobi_override = jacobi;

  const std::string command = app.get_subcommands().front()->get_name();
  if (log_env != nullptr && std::string(log_env) == "debug") {
    std::fprintf(stderr, "[hamlag] command=%s scenario=%s out=%s\n", command.c_str(),
                 scenario_path.c_str(), out_dir.c_str());
  }
  return hamlag::runCommand(command, scenario_path, opts, quiet);
}
