#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypdamp/coefficients.hpp"
#include "hypdamp/mode_solver.hpp"

namespace hypdamp {

// Sweep of (sigma, hoelder alpha, delta) cells classifying mode-energy
// growth as damping- or resonance-dominated.
struct SweepConfig {
  std::vector<double> sigma_grid;
  std::vector<double> alpha_grid;
  std::vector<double> delta_grid = {1.0};
  std::vector<double> lambda_probe = {64.0, 256.0, 1024.0};
  double horizon = 6.0;
  int trials = 2;             // random coefficient seeds per cell
  double hoelder_amplitude = 0.2;
  std::uint64_t seed = 1;
  double integrate_tol = 1e-8;
};

enum class CellClass { damping_dominates, resonance_dominates, borderline, inconclusive };
const char* to_string(CellClass c);

struct CellVerdict {
  double sigma = 0, alpha = 0, delta = 0;
  double lambda_star = 0;        // largest probe
  double growth_hoelder = 0;     // d(log E)/dt at lambda_star, worst trial
  std::optional<double> growth_resonant;  // tuned coefficient, when built
  double slope_res = 0;          // growth regressed against lambda omega(1/lambda)
  double slope_damp = 0;         // growth regressed against lambda^(2 sigma)
  CellClass cls = CellClass::inconclusive;
};

struct SweepResult {
  SweepConfig config;
  std::vector<CellVerdict> cells;
  // probe-level rows for plotting: sigma, alpha, delta, lambda, trial, kind, growth
  struct LongRow {
    double sigma, alpha, delta, lambda;
    int trial;
    std::string kind;  // "hoelder" or "resonant"
    double growth;
  };
  std::vector<LongRow> rows;
  std::string to_csv() const;        // one row per cell
  std::string to_long_csv() const;   // one row per probe integration
  std::string to_json_string() const;
};

// Measured d(log E)/dt over the second half of the horizon (skips the
// transient).  Uses the classic energy.
double measure_growth_exponent(const ModeParams& p, const Coefficient& c, double horizon,
                               double tol = 1e-8);

// gamma oscillation tuned to pump one probe frequency, with the amplitude
// clamped so the coefficient stays within [1/2, 3/2].
Coefficient tuned_resonant_coefficient(double lambda, double sigma, double delta,
                                       double omega_at_inv_lambda, double horizon);

SweepResult sweep(const SweepConfig& cfg, int jobs = 0);

}  // namespace hypdamp
