#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypdamp/coefficients.hpp"

namespace hypdamp {

// One mode of u'' + 2 delta lambda^(2 sigma) u' + lambda^2 c(t) u = 0.
struct ModeParams {
  double lambda = 1.0;  // frequency, > 0
  double sigma = 0.0;   // dissipation exponent, >= 0
  double delta = 0.0;   // dissipation strength, >= 0
  double damping() const;  // delta * lambda^(2 sigma)
};

// Log-renormalized state: (u, u') = exp(log_scale) * (u_dir, v_dir) with
// max(|u_dir|, |v_dir|) in [1/2, 2] (or both zero).  The split is what lets
// trajectories span thousands of orders of magnitude.
struct ModeState {
  double t = 0.0;
  double u_dir = 0.0;
  double v_dir = 0.0;
  double log_scale = 0.0;

  static ModeState from_physical(double t, double u, double v);
  double log_abs_u() const;  // log |u|, -inf when u = 0
  double log_abs_v() const;
  void renormalize();
};

struct EnergyRecord {
  double t = 0.0;
  double logE_classic = 0.0;   // |u'|^2 + lambda^2 |u|^2
  double logF_weighted = 0.0;  // |u'|^2 + lambda^2 c(t) |u|^2
  double logE_kova = 0.0;      // |u' + dl u|^2 + dl^2 |u|^2, dl = delta lambda^(2s)
  std::optional<double> logE_approx;  // adds lambda^2 c_eps(t) |u|^2
};

EnergyRecord energy_record(const ModeParams& p, const Coefficient& c, const ModeState& s,
                           const RegularizedCoefficient* ceps = nullptr);

struct IntegrateOptions {
  std::vector<double> sample_times;  // recorded exactly, in addition to boundaries
  bool store_steps = false;          // keep every accepted step in the trajectory
  const RegularizedCoefficient* approx_energy = nullptr;
  std::size_t max_steps = 20'000'000;
};

struct Trajectory {
  std::vector<ModeState> states;
  std::vector<EnergyRecord> energies;
  bool ok = true;
  std::string diagnostic;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
  const ModeState& final_state() const { return states.back(); }
  std::string to_csv() const;  // t, log_scale, u_dir, v_dir, logE_classic, logF_weighted
};

// Adaptive Dormand-Prince 5(4) on the direction variables with log-scale
// accumulation.  Constant segments propagate by closed form; gamma segments
// cap the step at a twentieth of the oscillation period; segment boundaries
// and requested sample times are never straddled.  t1 < t0 integrates
// backward.
Trajectory integrate(const ModeParams& p, const Coefficient& c,
                     std::pair<double, double> init, double t0, double t1, double tol,
                     const IntegrateOptions& opts = {});

// Exact solution for constant c0 >= 0 via the characteristic roots
// -delta lambda^(2 sigma) +- sqrt(delta^2 lambda^(4 sigma) - lambda^2 c0),
// evaluated in a scaled form that survives huge exponents.  Three
// discriminant branches; near-zero discriminants use the double-root form.
ModeState closed_form_constant(const ModeParams& p, double c0, std::pair<double, double> init,
                               double t);

// Scaled-variable constant-coefficient propagator.  Advances
// (x, y) = (lambda u, u') through time dt under c == c0 given the phase
// products P = lambda*dt and A = delta*lambda^(2 sigma)*dt; only bounded
// combinations of them enter, so lambda itself may exceed double range.
// Returns the log-scale increment.
double propagate_constant_scaled(double P, double A, double c0, double& x, double& y);

// Resonant closed form: w = sin(lambda t) exp(b),
// b = (2 eps lambda - delta lambda^(2 sigma)) t - eps sin(2 lambda t),
// w' = (lambda cos(lambda t) + b' sin(lambda t)) exp(b).
struct GammaState {
  double t = 0.0;
  double b = 0.0;        // log of the envelope
  double w_dir = 0.0;    // w  = exp(log_scale) * w_dir
  double wp_dir = 0.0;   // w' = exp(log_scale) * wp_dir
  double log_scale = 0.0;
  ModeState as_mode_state() const;
};
GammaState closed_form_gamma(double eps, double lambda, double delta, double sigma, double t);

// Fixed-step classical RK4 with compensated summation and the same
// renormalization contract.  Verification oracle: an independent path from
// the adaptive integrator.
ModeState oracle_integrate(const ModeParams& p, const Coefficient& c,
                           std::pair<double, double> init, double t0, double t1,
                           std::size_t steps);

}  // namespace hypdamp
