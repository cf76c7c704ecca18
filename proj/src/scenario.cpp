#include "hypdamp/scenario.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "hypdamp/dgcs.hpp"
#include "hypdamp/phase_diagram.hpp"
#include "hypdamp/report.hpp"
#include "hypdamp/verifier.hpp"
#include "json.hpp"

namespace hypdamp {

using nlohmann::json;

namespace {

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what) {}
};

double need_number(const json& j, const std::string& key) {
  if (!j.contains(key)) throw SchemaError(key, "missing required field");
  if (!j.at(key).is_number()) throw SchemaError(key, "expected a number");
  return j.at(key).get<double>();
}

double opt_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw SchemaError(key, "expected a number");
  return j.at(key).get<double>();
}

std::string opt_string(const json& j, const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw SchemaError(key, "expected a string");
  return j.at(key).get<std::string>();
}

Coefficient coefficient_from(const json& p, const std::string& key) {
  if (!p.contains(key)) return Coefficient::constant(1.0);
  try {
    return Coefficient::from_json_string(p.at(key).dump());
  } catch (const std::exception& e) {
    throw SchemaError(key, e.what());
  }
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json audit_to_json(const BoundAudit& a) {
  return json{{"bound", a.bound_name}, {"t", a.t},           {"log_lhs", a.log_lhs},
              {"log_rhs", a.log_rhs},  {"margin", a.margin}, {"params", a.params}};
}

std::string audits_to_jsonl(const std::vector<BoundAudit>& audits) {
  std::ostringstream os;
  for (const auto& a : audits) os << audit_to_json(a).dump() << "\n";
  return os.str();
}

DgcsInputs dgcs_inputs_from(const json& p) {
  DgcsInputs in;
  std::string preset = opt_string(p, "preset", "");
  if (preset == "quarter") {
    in.sigma = 0.25;
    in.delta = 1.0;
    in.omega = ContinuityModulus::hoelder(0.25, 1.0);
    in.phi = WeightFunction::power(0.625);
    in.psi = WeightFunction::power(0.625);
    in.base = SpectralSequence::geometric(2.0, 2.0, 1ull << 62);
    // Convergence evidence at weight radius r needs certified indices
    // beyond r; twelve modes put the last three past r = 10.
    in.k_max = 12;
  } else if (preset == "mild") {
    in.sigma = 0.05;
    in.delta = 1.0;
    in.omega = ContinuityModulus::hoelder(0.05, 1.0);
    in.phi = WeightFunction::power(0.1);
    in.psi = WeightFunction::power(0.1);
    in.base = SpectralSequence::geometric(2.0, 2.0, 1ull << 21);
    in.k_max = 11;
  } else if (!preset.empty()) {
    throw SchemaError("preset", "unknown preset '" + preset + "'");
  }
  in.sigma = opt_number(p, "sigma", in.sigma);
  in.delta = opt_number(p, "delta", in.delta);
  if (p.contains("omega")) in.omega = ContinuityModulus::from_json_string(p.at("omega").dump());
  if (p.contains("phi")) in.phi = WeightFunction::from_json_string(p.at("phi").dump());
  if (p.contains("psi")) in.psi = WeightFunction::from_json_string(p.at("psi").dump());
  if (p.contains("base")) in.base = SpectralSequence::from_json_string(p.at("base").dump());
  in.k_max = static_cast<int>(opt_number(p, "k_max", in.k_max));
  in.t_eval = opt_number(p, "t_eval", in.t_eval);
  return in;
}

FamilyData family_data_from(const json& p) {
  FamilyData fd;
  if (p.contains("lambdas")) {
    fd.lambdas = p.at("lambdas").get<std::vector<double>>();
  } else {
    double base = opt_number(p, "lambda_base", 2.0);
    int count = static_cast<int>(opt_number(p, "mode_count", 13));
    for (int k = 0; k < count; ++k) fd.lambdas.push_back(std::pow(base, k));
  }
  if (p.contains("u0") && p.contains("u1")) {
    fd.u0 = p.at("u0").get<std::vector<double>>();
    fd.u1 = p.at("u1").get<std::vector<double>>();
  } else {
    double scale = opt_number(p, "data_decay", 1.0);
    for (double lam : fd.lambdas) {
      fd.u0.push_back(std::exp(-scale * std::sqrt(lam)));
      fd.u1.push_back(std::exp(-scale * std::sqrt(lam)));
    }
  }
  return fd;
}

struct OutputSink {
  std::filesystem::path dir;
  json report;
  void write(const std::string& name, const std::string& content) const {
    write_text_file(dir / name, content);
  }
};

int run_verify(const json& params, OutputSink& out, int jobs) {
  std::string suite = opt_string(params, "suite", "sup-lemma");
  bool exploratory = params.value("exploratory", false);
  double slack = opt_number(params, "slack", 1e-7);
  Coefficient c = coefficient_from(params, "coefficient");
  double horizon = opt_number(params, "horizon", 3.0);

  std::vector<BoundAudit> audits;
  std::optional<std::string> rejection;
  if (suite == "sup-lemma" || suite == "sub-lemma" || suite == "low-frequency" ||
      suite == "borderline-exploration") {
    ModeParams mp{need_number(params, "lambda"), need_number(params, "sigma"),
                  need_number(params, "delta")};
    std::pair<double, double> init{opt_number(params, "u0", 1.0), opt_number(params, "u1", 1.0)};
    LemmaAuditResult r;
    if (suite == "sup-lemma") {
      r = verify_sup_lemma(mp, c, init, horizon, opt_number(params, "alpha", 0.75),
                           opt_number(params, "beta", 0.25));
    } else if (suite == "sub-lemma") {
      r = verify_sub_lemma(mp, c, init, horizon);
    } else if (suite == "borderline-exploration") {
      // Modulus tuned so lambda^(1-2s) omega(1/lambda) approaches a finite,
      // large constant: outside both proved regimes, reported without
      // pass/fail semantics.
      exploratory = true;
      double level = opt_number(params, "level", 10.0);
      Coefficient cc = c;
      cc.set_modulus(ContinuityModulus::hoelder(
          std::min(0.999, 1.0 - 2.0 * mp.sigma + 1e-9), level));
      r = verify_sub_lemma(mp, cc, init, horizon);
    } else {
      r = verify_low_frequency(mp, c, init, horizon);
    }
    audits = r.audits;
    rejection = r.rejection;
    if (r.feasible_r) out.report["feasible_r"] = *r.feasible_r;
    if (r.decay_skipped) out.report["decay_skipped"] = *r.decay_skipped;
  } else if (suite == "family") {
    std::string thm = opt_string(params, "theorem", "sup-reg");
    FamilyTheorem theorem = thm == "sup-reg"      ? FamilyTheorem::sup_reg
                            : thm == "sub-reg"    ? FamilyTheorem::sub_reg
                            : thm == "sup-gevrey" ? FamilyTheorem::sup_gevrey
                            : thm == "sub-gevrey" ? FamilyTheorem::sub_gevrey
                                                  : throw SchemaError("theorem", "unknown: " + thm);
    FamilyData fd = family_data_from(params);
    FamilyAuditResult r = verify_family(
        theorem, fd, c, need_number(params, "sigma"), need_number(params, "delta"),
        opt_number(params, "nu", 1.0), horizon, opt_number(params, "alpha", 0.75),
        opt_number(params, "beta", 0.25), static_cast<std::size_t>(opt_number(params, "samples", 100)),
        jobs);
    audits = r.audits;
    rejection = r.rejection;
    if (r.r_used) out.report["r_used"] = *r.r_used;
    out.report["bound_constant"] = r.bound_constant;
  } else {
    throw SchemaError("suite", "unknown suite '" + suite + "'");
  }

  out.write("audits.jsonl", audits_to_jsonl(audits));
  out.report["suite"] = suite;
  out.report["audit_count"] = audits.size();
  out.report["exploratory"] = exploratory;
  if (rejection) {
    out.report["rejection"] = *rejection;
    if (!exploratory) return 1;
  }
  double min_margin = std::numeric_limits<double>::infinity();
  std::string worst = "none";
  for (const auto& a : audits)
    if (a.margin < min_margin) {
      min_margin = a.margin;
      worst = a.bound_name;
    }
  out.report["min_margin"] = min_margin;
  out.report["worst_bound"] = worst;
  if (!exploratory && min_margin < -slack) {
    out.report["failed_bound"] = worst;
    return 1;
  }
  return 0;
}

int run_simulate(const json& params, OutputSink& out) {
  ModeParams mp{need_number(params, "lambda"), need_number(params, "sigma"),
                need_number(params, "delta")};
  Coefficient c = coefficient_from(params, "coefficient");
  double t0 = opt_number(params, "t0", 0.0);
  double t1 = opt_number(params, "t1", 1.0);
  IntegrateOptions opts;
  std::size_t samples = static_cast<std::size_t>(opt_number(params, "samples", 64));
  for (std::size_t i = 0; i + 1 < samples; ++i)
    opts.sample_times.push_back(t0 + (t1 - t0) * static_cast<double>(i + 1) /
                                         static_cast<double>(samples));
  Trajectory traj =
      integrate(mp, c, {opt_number(params, "u0", 1.0), opt_number(params, "u1", 0.0)}, t0, t1,
                opt_number(params, "tol", 1e-10), opts);
  out.write("trajectory.csv", traj.to_csv());
  out.report["ok"] = traj.ok;
  out.report["steps_accepted"] = traj.steps_accepted;
  out.report["final_log_scale"] = traj.final_state().log_scale;
  out.report["final_logE"] = traj.energies.back().logE_classic;
  if (!traj.ok) {
    out.report["diagnostic"] = traj.diagnostic;
    return 1;
  }
  return 0;
}

int run_dgcs(const json& params, OutputSink& out, bool certify, int jobs) {
  DgcsInputs in = dgcs_inputs_from(params);
  DgcsSelection sel = select_subsequence(in);
  DgcsConstruction cons = build_construction(in, sel);
  out.write("construction.json", cons.to_json_string());
  out.write("coefficient.json", cons.coefficient.to_json_string());
  out.report["certified_modes"] = sel.certified_count();
  out.report["k0"] = sel.k0;
  out.report["partial"] = sel.pool_exhausted;
  out.report["ledger_entries"] = cons.ledger.size();
  bool ledger_ok = cons.all_ledger_pass();
  out.report["ledger_pass"] = ledger_ok;
  if (!ledger_ok) {
    for (const auto& e : cons.ledger)
      if (!e.pass) {
        out.report["failed_bound"] = e.name;
        break;
      }
    return 1;
  }
  if (!certify) return 0;

  std::vector<double> R_grid = params.contains("R_grid")
                                   ? params.at("R_grid").get<std::vector<double>>()
                                   : std::vector<double>{0.1, 1.0, 10.0};
  std::vector<double> r_grid = params.contains("r_grid")
                                   ? params.at("r_grid").get<std::vector<double>>()
                                   : std::vector<double>{0.1, 1.0, 10.0};
  int tail = static_cast<int>(opt_number(params, "monotone_tail", 3));
  DivergenceReport rep = propagate_and_certify(cons, in.t_eval, R_grid, r_grid, tail, jobs);
  out.write("divergence.json", rep.to_json_string());
  out.write("divergence.csv", rep.to_csv());
  out.report["certified"] = rep.certified();
  if (!rep.certified()) {
    out.report["failed_bound"] = rep.defects.empty() ? "no-modes" : rep.defects.front();
    return 1;
  }
  return 0;
}

int run_sweep(const json& params, OutputSink& out, std::uint64_t seed, int jobs) {
  SweepConfig cfg;
  cfg.sigma_grid = params.contains("sigma_grid")
                       ? params.at("sigma_grid").get<std::vector<double>>()
                       : std::vector<double>{0.0, 0.1, 0.25, 0.4, 0.6};
  cfg.alpha_grid = params.contains("alpha_grid")
                       ? params.at("alpha_grid").get<std::vector<double>>()
                       : std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9};
  if (params.contains("delta_grid"))
    cfg.delta_grid = params.at("delta_grid").get<std::vector<double>>();
  if (params.contains("lambda_probe"))
    cfg.lambda_probe = params.at("lambda_probe").get<std::vector<double>>();
  cfg.horizon = opt_number(params, "horizon", cfg.horizon);
  cfg.trials = static_cast<int>(opt_number(params, "trials", cfg.trials));
  cfg.seed = seed;
  SweepResult r = sweep(cfg, jobs);
  out.write("sweep.csv", r.to_csv());
  out.write("sweep_long.csv", r.to_long_csv());
  out.write("sweep.json", r.to_json_string());
  std::size_t inconclusive = 0;
  for (const auto& cell : r.cells)
    if (cell.cls == CellClass::inconclusive) ++inconclusive;
  out.report["cells"] = r.cells.size();
  out.report["inconclusive"] = inconclusive;
  return inconclusive == 0 ? 0 : 1;
}

int run_export(const json& params, OutputSink& out) {
  Coefficient c = coefficient_from(params, "coefficient");
  double a = opt_number(params, "from", 0.0);
  double b = opt_number(params, "to", 1.0);
  std::size_t points = static_cast<std::size_t>(opt_number(params, "points", 1000));
  out.write("coefficient.csv", c.to_csv(a, b, points));
  out.write("coefficient.json", c.to_json_string());
  out.report["points"] = points;
  return 0;
}

}  // namespace

RunOutcome run_scenario(const std::string& scenario_json, const std::string& overrides_json,
                        int jobs) {
  json scenario;
  try {
    scenario = json::parse(scenario_json);
    if (!overrides_json.empty()) scenario.merge_patch(json::parse(overrides_json));
  } catch (const json::parse_error& e) {
    return {2, std::string("parse error: ") + e.what()};
  }

  try {
    if (!scenario.is_object()) throw SchemaError("$", "scenario must be an object");
    int version = static_cast<int>(opt_number(scenario, "schema_version", 1));
    if (version != 1) throw SchemaError("schema_version", "unsupported version");
    std::string op = opt_string(scenario, "operation", "");
    if (op.empty()) throw SchemaError("operation", "missing required field");
    std::uint64_t seed = static_cast<std::uint64_t>(opt_number(scenario, "seed", 1));
    json params = scenario.value("parameters", json::object());
    if (!params.is_object()) throw SchemaError("parameters", "expected an object");

    OutputSink out;
    out.dir = opt_string(scenario, "output_dir", "out");
    out.report = json::object();
    out.report["name"] = opt_string(scenario, "name", "unnamed");
    out.report["operation"] = op;
    out.report["seed"] = seed;

    int code;
    if (op == "simulate") {
      code = run_simulate(params, out);
    } else if (op == "verify") {
      code = run_verify(params, out, jobs);
    } else if (op == "dgcs-build") {
      code = run_dgcs(params, out, false, jobs);
    } else if (op == "dgcs-certify") {
      code = run_dgcs(params, out, true, jobs);
    } else if (op == "sweep") {
      code = run_sweep(params, out, seed, jobs);
    } else if (op == "export") {
      code = run_export(params, out);
    } else {
      throw SchemaError("operation", "unknown operation '" + op + "'");
    }

    // Reproducibility stamp; the timestamp is the only nondeterministic
    // field in any artifact.
    json canonical = scenario;
    canonical.erase("output_dir");
    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical.dump())));
    out.report["stamp"] =
        json{{"config_hash", hash}, {"seed", seed}, {"version", kVersion}};
    out.report["timestamp"] = iso_timestamp();
    out.report["exit_code"] = code;
    write_text_file(out.dir / "report.json", out.report.dump(2) + "\n");

    std::string msg = code == 0 ? "ok"
                                : "audit failure: " + out.report.value("failed_bound",
                                                                       out.report.value("rejection", "see report"));
    return {code, msg};
  } catch (const SchemaError& e) {
    return {2, std::string("schema error at ") + e.what()};
  } catch (const DgcsRejection& e) {
    return {1, std::string("construction rejected, ") + e.what()};
  } catch (const std::exception& e) {
    return {2, std::string("error: ") + e.what()};
  }
}

RunOutcome run_scenario_file(const std::filesystem::path& file, const std::string& overrides_json,
                             int jobs) {
  std::string text;
  try {
    text = read_text_file(file);
  } catch (const std::exception& e) {
    return {2, e.what()};
  }
  return run_scenario(text, overrides_json, jobs);
}

}  // namespace hypdamp
