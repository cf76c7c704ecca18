#include "hypdamp/phase_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypdamp/parallel.hpp"
#include "json.hpp"

namespace hypdamp {

using nlohmann::json;

const char* to_string(CellClass c) {
  switch (c) {
    case CellClass::damping_dominates:
      return "damping-dominates";
    case CellClass::resonance_dominates:
      return "resonance-dominates";
    case CellClass::borderline:
      return "borderline";
    case CellClass::inconclusive:
      return "inconclusive";
  }
  return "?";
}

double measure_growth_exponent(const ModeParams& p, const Coefficient& c, double horizon,
                               double tol) {
  IntegrateOptions opts;
  opts.sample_times = {0.5 * horizon};
  Trajectory traj = integrate(p, c, {1.0, 0.0}, 0.0, horizon, tol, opts);
  if (!traj.ok) throw std::runtime_error("growth probe failed: " + traj.diagnostic);
  double e_mid = 0.0, e_end = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    if (traj.states[i].t == 0.5 * horizon) e_mid = traj.energies[i].logE_classic;
    if (traj.states[i].t == horizon) e_end = traj.energies[i].logE_classic;
  }
  return (e_end - e_mid) / (0.5 * horizon);
}

Coefficient tuned_resonant_coefficient(double lambda, double sigma, double delta,
                                       double omega_at_inv_lambda, double horizon) {
  // Clamp the pump amplitude so 16 e^2 + 8 e + shift <= 1/2.
  double shift = delta * delta * std::pow(lambda, 4.0 * sigma - 2.0);
  double budget = 0.5 - shift;
  if (budget <= 0.0) throw std::invalid_argument("tuned resonance: frequency too low");
  double eps_max = (-8.0 + std::sqrt(64.0 + 64.0 * budget)) / 32.0;
  double eps = std::min(omega_at_inv_lambda, eps_max);
  std::vector<Segment> segs;
  segs.push_back(Segment{Segment::Tag::gamma, 0.0, horizon, eps, lambda, delta, sigma});
  return Coefficient::piecewise(std::move(segs), 0.5, 1.5);
}

SweepResult sweep(const SweepConfig& cfg, int jobs) {
  if (cfg.sigma_grid.empty() || cfg.alpha_grid.empty() || cfg.delta_grid.empty())
    throw std::invalid_argument("sweep: empty grid");
  if (!(cfg.horizon > 0)) throw std::invalid_argument("sweep: horizon > 0");

  struct Cell {
    double sigma, alpha, delta;
    std::size_t index;
  };
  std::vector<Cell> cells;
  for (double s : cfg.sigma_grid)
    for (double a : cfg.alpha_grid)
      for (double d : cfg.delta_grid) cells.push_back({s, a, d, cells.size()});

  SweepResult result;
  result.config = cfg;
  result.cells.resize(cells.size());
  std::vector<std::vector<SweepResult::LongRow>> rows(cells.size());

  double lambda_star = *std::max_element(cfg.lambda_probe.begin(), cfg.lambda_probe.end());

  par::for_each_index(
      cells.size(),
      [&](std::size_t ci) {
        const Cell& cell = cells[ci];
        CellVerdict v;
        v.sigma = cell.sigma;
        v.alpha = cell.alpha;
        v.delta = cell.delta;
        v.lambda_star = lambda_star;
        bool failed = false;

        // Growth of synthesized rough coefficients, worst case over trials.
        std::vector<double> growth_at_probe(cfg.lambda_probe.size(),
                                            -std::numeric_limits<double>::infinity());
        double omega_const = 0.0;
        for (int trial = 0; trial < cfg.trials; ++trial) {
          std::uint64_t seed =
              cfg.seed ^ (0x9e3779b97f4a7c15ull * (ci + 1)) ^ (0xbf58476d1ce4e5b9ull * (trial + 1));
          Coefficient c;
          try {
            c = synthesize_hoelder(cell.alpha, cfg.hoelder_amplitude, seed, 1.7);
          } catch (const std::exception&) {
            failed = true;
            break;
          }
          omega_const = c.modulus()->constant();
          for (std::size_t li = 0; li < cfg.lambda_probe.size(); ++li) {
            double lam = cfg.lambda_probe[li];
            try {
              double g = measure_growth_exponent({lam, cell.sigma, cell.delta}, c,
                                                 cfg.horizon, cfg.integrate_tol);
              growth_at_probe[li] = std::max(growth_at_probe[li], g);
              rows[ci].push_back({cell.sigma, cell.alpha, cell.delta, lam, trial, "hoelder", g});
            } catch (const std::exception&) {
              failed = true;
            }
          }
        }

        // Tuned pump at the largest probe when the roughness exceeds what
        // the damping exponent can absorb.
        bool resonant_regime = cell.alpha < 1.0 - 2.0 * cell.sigma - 0.02;
        if (!failed && resonant_regime) {
          double om = omega_const * std::pow(1.0 / lambda_star, cell.alpha);
          try {
            Coefficient rc = tuned_resonant_coefficient(lambda_star, cell.sigma, cell.delta, om,
                                                        cfg.horizon);
            double g = measure_growth_exponent({lambda_star, cell.sigma, cell.delta}, rc,
                                               cfg.horizon, cfg.integrate_tol);
            v.growth_resonant = g;
            rows[ci].push_back(
                {cell.sigma, cell.alpha, cell.delta, lambda_star, 0, "resonant", g});
          } catch (const std::exception&) {
            failed = true;
          }
        }

        if (failed) {
          v.cls = CellClass::inconclusive;
          result.cells[cell.index] = v;
          return;
        }

        v.growth_hoelder = growth_at_probe.back();
        // Through-origin regressions of growth against the two competing
        // rates.
        double sxr = 0, sxxr = 0, sxd = 0, sxxd = 0;
        for (std::size_t li = 0; li < cfg.lambda_probe.size(); ++li) {
          double lam = cfg.lambda_probe[li];
          double xr = lam * omega_const * std::pow(1.0 / lam, cell.alpha);
          double xd = std::pow(lam, 2.0 * cell.sigma);
          double g = growth_at_probe[li];
          if (li + 1 == cfg.lambda_probe.size() && v.growth_resonant)
            g = std::max(g, *v.growth_resonant);
          sxr += xr * g;
          sxxr += xr * xr;
          sxd += xd * g;
          sxxd += xd * xd;
        }
        v.slope_res = sxr / sxxr;
        v.slope_damp = sxd / sxxd;

        double threshold = 1e-3 * lambda_star * omega_const * std::pow(1.0 / lambda_star, cell.alpha);
        bool border = std::fabs(cell.alpha - (1.0 - 2.0 * cell.sigma)) <= 0.02;
        if (border) {
          v.cls = CellClass::borderline;
        } else if (v.growth_resonant && *v.growth_resonant > threshold) {
          v.cls = CellClass::resonance_dominates;
        } else {
          v.cls = CellClass::damping_dominates;
        }
        result.cells[cell.index] = v;
      },
      jobs);

  for (auto& r : rows)
    for (auto& row : r) result.rows.push_back(row);
  return result;
}

std::string SweepResult::to_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "sigma,alpha,delta,lambda,slope_res,slope_damp,class\n";
  for (const auto& c : cells)
    os << c.sigma << "," << c.alpha << "," << c.delta << "," << c.lambda_star << ","
       << c.slope_res << "," << c.slope_damp << "," << to_string(c.cls) << "\n";
  return os.str();
}

std::string SweepResult::to_long_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "sigma,alpha,delta,lambda,trial,kind,growth\n";
  for (const auto& r : rows)
    os << r.sigma << "," << r.alpha << "," << r.delta << "," << r.lambda << "," << r.trial
       << "," << r.kind << "," << r.growth << "\n";
  return os.str();
}

std::string SweepResult::to_json_string() const {
  json j;
  j["horizon"] = config.horizon;
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["lambda_probe"] = config.lambda_probe;
  json jc = json::array();
  for (const auto& c : cells) {
    json e{{"sigma", c.sigma},         {"alpha", c.alpha},
           {"delta", c.delta},         {"lambda", c.lambda_star},
           {"growth", c.growth_hoelder}, {"slope_res", c.slope_res},
           {"slope_damp", c.slope_damp}, {"class", to_string(c.cls)}};
    if (c.growth_resonant) e["growth_resonant"] = *c.growth_resonant;
    jc.push_back(e);
  }
  j["cells"] = jc;
  return j.dump(2);
}

}  // namespace hypdamp
