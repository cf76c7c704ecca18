// Command-line front end: scenario files drive the engine, flags override
// scenario fields (flags > file > defaults).
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "hypdamp/scenario.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

struct CommonArgs {
  std::string scenario_file;
  std::string output_dir;
  double sigma = std::nan("");
  double delta = std::nan("");
  long long seed = -1;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool scenario_required) {
  auto* opt = cmd->add_option("-f,--scenario", args.scenario_file, "scenario JSON file");
  if (scenario_required) opt->required();
  cmd->add_option("-o,--output-dir", args.output_dir, "artifact directory");
  cmd->add_option("--sigma", args.sigma, "dissipation exponent");
  cmd->add_option("--delta", args.delta, "dissipation strength");
  cmd->add_option("--seed", args.seed, "RNG seed");
  cmd->add_option("-j,--jobs", args.jobs, "worker cap (default: HYPDAMP_JOBS or all cores)");
}

json overrides_from(const CommonArgs& args, const std::string& op, const json& extra_params) {
  json o = json::object();
  if (!op.empty()) o["operation"] = op;
  if (!args.output_dir.empty()) o["output_dir"] = args.output_dir;
  if (args.seed >= 0) o["seed"] = args.seed;
  json params = extra_params;
  if (!std::isnan(args.sigma)) params["sigma"] = args.sigma;
  if (!std::isnan(args.delta)) params["delta"] = args.delta;
  if (!params.empty()) o["parameters"] = params;
  return o;
}

int dispatch(const CommonArgs& args, const std::string& op, const json& extra_params) {
  json overrides = overrides_from(args, op, extra_params);
  hypdamp::RunOutcome out;
  if (!args.scenario_file.empty()) {
    out = hypdamp::run_scenario_file(args.scenario_file, overrides.dump(), args.jobs);
  } else {
    json scenario = {{"schema_version", 1}, {"name", op}, {"operation", op}};
    scenario.merge_patch(overrides);
    out = hypdamp::run_scenario(scenario.dump(), "", args.jobs);
  }
  std::fprintf(out.exit_code == 0 ? stdout : stderr, "%s\n", out.message.c_str());
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulator and estimate auditor for strongly damped "
               "wave-type mode equations with time-dependent speed"};
  app.require_subcommand(1);

  CommonArgs sim_args, verify_args, sweep_args, export_args, run_args;
  CommonArgs build_args, certify_args;
  double lambda = std::nan("");
  std::string suite, preset;

  auto* sim = app.add_subcommand("simulate", "integrate a single mode");
  add_common(sim, sim_args, false);
  sim->add_option("--lambda", lambda, "mode frequency");

  auto* verify = app.add_subcommand("verify", "audit the proved energy bounds");
  add_common(verify, verify_args, false);
  verify->add_option("--suite", suite,
                     "sup-lemma | sub-lemma | low-frequency | family | borderline-exploration");
  verify->add_option("--lambda", lambda, "mode frequency");

  auto* dgcs = app.add_subcommand("dgcs", "derivative-loss construction");
  auto* build = dgcs->add_subcommand("build", "select a subsequence and assemble the coefficient");
  add_common(build, build_args, false);
  build->add_option("--preset", preset, "quarter | mild");
  auto* certify = dgcs->add_subcommand("certify", "build plus divergence certification");
  add_common(certify, certify_args, false);
  certify->add_option("--preset", preset, "quarter | mild");

  auto* sweep_cmd = app.add_subcommand("sweep", "phase-diagram sweep over (sigma, alpha, delta)");
  add_common(sweep_cmd, sweep_args, false);

  auto* export_cmd = app.add_subcommand("export", "sample a coefficient to CSV");
  add_common(export_cmd, export_args, false);

  auto* run = app.add_subcommand("run", "run a scenario file as-is");
  add_common(run, run_args, true);

  CLI11_PARSE(app, argc, argv);

  json extra = json::object();
  if (!std::isnan(lambda)) extra["lambda"] = lambda;
  if (!suite.empty()) extra["suite"] = suite;
  if (!preset.empty()) extra["preset"] = preset;

  if (sim->parsed()) return dispatch(sim_args, "simulate", extra);
  if (verify->parsed()) return dispatch(verify_args, "verify", extra);
  if (dgcs->parsed()) {
    if (build->parsed()) return dispatch(build_args, "dgcs-build", extra);
    if (certify->parsed()) return dispatch(certify_args, "dgcs-certify", extra);
    std::fprintf(stderr, "dgcs requires a subcommand: build | certify\n");
    return 2;
  }
  if (sweep_cmd->parsed()) return dispatch(sweep_args, "sweep", extra);
  if (export_cmd->parsed()) return dispatch(export_args, "export", extra);
  if (run->parsed()) return dispatch(run_args, "", extra);
  return 2;
}
