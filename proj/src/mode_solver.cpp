#include "hypdamp/mode_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hypdamp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double ModeParams::damping() const { return delta * std::pow(lambda, 2.0 * sigma); }

ModeState ModeState::from_physical(double t, double u, double v) {
  ModeState s;
  s.t = t;
  double m = std::max(std::fabs(u), std::fabs(v));
  if (m == 0.0) return s;
  s.u_dir = u / m;
  s.v_dir = v / m;
  s.log_scale = std::log(m);
  return s;
}

double ModeState::log_abs_u() const {
  return u_dir == 0.0 ? -kInf : log_scale + std::log(std::fabs(u_dir));
}
double ModeState::log_abs_v() const {
  return v_dir == 0.0 ? -kInf : log_scale + std::log(std::fabs(v_dir));
}

void ModeState::renormalize() {
  double m = std::max(std::fabs(u_dir), std::fabs(v_dir));
  if (m == 0.0) return;
  if (m >= 0.5 && m <= 2.0) return;
  u_dir /= m;
  v_dir /= m;
  log_scale += std::log(m);
}

EnergyRecord energy_record(const ModeParams& p, const Coefficient& c, const ModeState& s,
                           const RegularizedCoefficient* ceps) {
  EnergyRecord r;
  r.t = s.t;
  double lam2 = p.lambda * p.lambda;
  double u = s.u_dir, v = s.v_dir;
  double e_classic = v * v + lam2 * u * u;
  double ct = c(s.t);
  double e_weighted = v * v + lam2 * ct * u * u;
  double a = p.damping();
  double vk = v + a * u;
  double e_kova = vk * vk + a * a * u * u;
  double base = 2.0 * s.log_scale;
  auto log_or_neg_inf = [](double x) { return x > 0 ? std::log(x) : -kInf; };
  r.logE_classic = base + log_or_neg_inf(e_classic);
  r.logF_weighted = base + log_or_neg_inf(e_weighted);
  r.logE_kova = base + log_or_neg_inf(e_kova);
  if (ceps) {
    double e_approx = e_kova + lam2 * (*ceps)(s.t) * u * u;
    r.logE_approx = base + log_or_neg_inf(e_approx);
  }
  return r;
}

double propagate_constant_scaled(double P, double A, double c0, double& x, double& y) {
  double disc = A * A - P * P * c0;
  double scale = std::max(A * A, std::fabs(P * P * c0));
  double x0 = x, y0 = y;
  if (scale == 0.0 || std::fabs(disc) <= 1e-12 * scale) {
    // Double characteristic root.
    x = x0 + (A * x0 + P * y0);
    y = y0 + (-P * c0 * x0 - A * y0);
    return -A;
  }
  if (disc < 0.0) {
    // Oscillatory branch.
    double W = std::sqrt(-disc);
    double cw = std::cos(W), swW = std::sin(W) / W;
    x = cw * x0 + swW * (A * x0 + P * y0);
    y = cw * y0 + swW * (-P * c0 * x0 - A * y0);
    return -A;
  }
  // Real roots; factor out exp(S) to keep cosh/sinh bounded.
  double S = std::sqrt(disc);
  double ch = 0.5 * (1.0 + std::exp(-2.0 * S));
  double shS = (S > 1e-4) ? 0.5 * (-std::expm1(-2.0 * S)) / S
                          : std::exp(-S) * (1.0 + S * S / 6.0 * (1.0 + S * S / 20.0));
  x = ch * x0 + shS * (A * x0 + P * y0);
  y = ch * y0 + shS * (-P * c0 * x0 - A * y0);
  return -A + S;
}

namespace {

// Advances a state through dt of constant coefficient c0, in scaled
// variables (lambda u, u').
void constant_jump(const ModeParams& p, double c0, double dt, ModeState& s) {
  double x = p.lambda * s.u_dir;
  double y = s.v_dir;
  double dls = propagate_constant_scaled(p.lambda * dt, p.damping() * dt, c0, x, y);
  s.u_dir = x / p.lambda;
  s.v_dir = y;
  s.log_scale += dls;
  s.t += dt;
  s.renormalize();
}

struct Deriv {
  double du, dv;
};

inline Deriv f_eval(const ModeParams& p, const Coefficient& c, double a, double t, double u,
                    double v) {
  return {v, -2.0 * a * v - p.lambda * p.lambda * c(t) * u};
}

// Dormand-Prince 5(4) Butcher tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA2[1] = {1.0 / 5};
constexpr double kA3[2] = {3.0 / 40, 9.0 / 40};
constexpr double kA4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
constexpr double kA5[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
constexpr double kA6[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                           -5103.0 / 18656};
constexpr double kB[6] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
constexpr double kE[7] = {71.0 / 57600,      0.0,        -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

}  // namespace

ModeState closed_form_constant(const ModeParams& p, double c0, std::pair<double, double> init,
                               double t) {
  if (!(p.lambda > 0)) throw std::invalid_argument("closed_form_constant: lambda > 0");
  if (!(c0 >= 0)) throw std::invalid_argument("closed_form_constant: c0 >= 0");
  ModeState s = ModeState::from_physical(0.0, init.first, init.second);
  if (s.u_dir == 0.0 && s.v_dir == 0.0) {
    s.t = t;
    return s;
  }
  constant_jump(p, c0, t, s);
  return s;
}

GammaState closed_form_gamma(double eps, double lambda, double delta, double sigma, double t) {
  if (!(lambda > 0)) throw std::invalid_argument("closed_form_gamma: lambda > 0");
  GammaState g;
  g.t = t;
  double dl = delta * std::pow(lambda, 2.0 * sigma);
  double drift = 2.0 * eps * lambda - dl;
  g.b = drift * t - eps * std::sin(2.0 * lambda * t);
  double bp = drift - 2.0 * eps * lambda * std::cos(2.0 * lambda * t);
  double s = std::sin(lambda * t), c = std::cos(lambda * t);
  g.w_dir = s;
  g.wp_dir = lambda * c + bp * s;
  g.log_scale = g.b;
  return g;
}

ModeState GammaState::as_mode_state() const {
  ModeState s;
  s.t = t;
  double m = std::max(std::fabs(w_dir), std::fabs(wp_dir));
  s.u_dir = w_dir / m;
  s.v_dir = wp_dir / m;
  s.log_scale = log_scale + std::log(m);
  return s;
}

Trajectory integrate(const ModeParams& p, const Coefficient& c,
                     std::pair<double, double> init, double t0, double t1, double tol,
                     const IntegrateOptions& opts) {
  if (!(p.lambda > 0)) throw std::invalid_argument("integrate: lambda > 0");
  if (!(tol > 0)) throw std::invalid_argument("integrate: tol > 0");
  if (!std::isfinite(t0) || !std::isfinite(t1))
    throw std::invalid_argument("integrate: finite time span required");

  Trajectory traj;
  ModeState state = ModeState::from_physical(t0, init.first, init.second);
  double a = p.damping();

  auto record = [&](const ModeState& s) {
    traj.states.push_back(s);
    traj.energies.push_back(energy_record(p, c, s, opts.approx_energy));
  };

  // Checkpoints: segment boundaries plus requested sample times, ordered in
  // the direction of integration and never straddled by a step.
  bool forward = t1 >= t0;
  double lo = std::min(t0, t1), hi = std::max(t0, t1);
  std::vector<double> cps = c.breakpoints(lo, hi);
  for (double ts : opts.sample_times)
    if (ts > lo && ts < hi) cps.push_back(ts);
  cps.push_back(t1);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  if (!forward) std::reverse(cps.begin(), cps.end());

  record(state);
  if (state.u_dir == 0.0 && state.v_dir == 0.0) {
    // Zero data stays zero; emit requested timestamps and return.
    for (double cp : cps) {
      state.t = cp;
      record(state);
    }
    return traj;
  }

  double err_prev = 1.0;
  for (double cp : cps) {
    double span = cp - state.t;
    if (span == 0.0) {
      record(state);
      continue;
    }
    const Segment* seg =
        c.segments().empty() ? nullptr : c.segment_at(state.t + 0.5 * span);
    bool constant_here =
        c.kind() == Coefficient::Kind::constant ||
        (c.kind() == Coefficient::Kind::piecewise && seg &&
         seg->tag == Segment::Tag::constant);
    if (constant_here) {
      constant_jump(p, c(state.t + 0.5 * span), span, state);
      state.t = cp;  // exact landing
      record(state);
      continue;
    }

    double h_cap = std::fabs(span);
    if (c.kind() == Coefficient::Kind::piecewise && seg && seg->tag == Segment::Tag::gamma)
      h_cap = std::min(h_cap, (2.0 * M_PI / seg->p1) / 20.0);

    double h = std::min({h_cap, std::fabs(span), 0.5 / (1.0 + p.lambda + a)});
    if (!forward) h = -h;

    while (forward ? state.t < cp : state.t > cp) {
      if (traj.steps_accepted + traj.steps_rejected > opts.max_steps) {
        traj.ok = false;
        traj.diagnostic = "step budget exhausted at t=" + std::to_string(state.t);
        record(state);
        return traj;
      }
      if (std::fabs(h) < 64.0 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, std::fabs(state.t))) {
        traj.ok = false;
        traj.diagnostic = "step size underflow (stiffness) at t=" + std::to_string(state.t);
        record(state);
        return traj;
      }
      if (forward ? state.t + h > cp : state.t + h < cp) h = cp - state.t;

      double t = state.t, u = state.u_dir, v = state.v_dir;
      Deriv k1 = f_eval(p, c, a, t, u, v);
      Deriv k2 = f_eval(p, c, a, t + kC[1] * h, u + h * kA2[0] * k1.du, v + h * kA2[0] * k1.dv);
      Deriv k3 = f_eval(p, c, a, t + kC[2] * h, u + h * (kA3[0] * k1.du + kA3[1] * k2.du),
                        v + h * (kA3[0] * k1.dv + kA3[1] * k2.dv));
      Deriv k4 = f_eval(p, c, a, t + kC[3] * h,
                        u + h * (kA4[0] * k1.du + kA4[1] * k2.du + kA4[2] * k3.du),
                        v + h * (kA4[0] * k1.dv + kA4[1] * k2.dv + kA4[2] * k3.dv));
      Deriv k5 = f_eval(
          p, c, a, t + kC[4] * h,
          u + h * (kA5[0] * k1.du + kA5[1] * k2.du + kA5[2] * k3.du + kA5[3] * k4.du),
          v + h * (kA5[0] * k1.dv + kA5[1] * k2.dv + kA5[2] * k3.dv + kA5[3] * k4.dv));
      Deriv k6 = f_eval(p, c, a, t + h,
                        u + h * (kA6[0] * k1.du + kA6[1] * k2.du + kA6[2] * k3.du +
                                 kA6[3] * k4.du + kA6[4] * k5.du),
                        v + h * (kA6[0] * k1.dv + kA6[1] * k2.dv + kA6[2] * k3.dv +
                                 kA6[3] * k4.dv + kA6[4] * k5.dv));
      double u5 = u + h * (kB[0] * k1.du + kB[2] * k3.du + kB[3] * k4.du + kB[4] * k5.du +
                           kB[5] * k6.du);
      double v5 = v + h * (kB[0] * k1.dv + kB[2] * k3.dv + kB[3] * k4.dv + kB[4] * k5.dv +
                           kB[5] * k6.dv);
      Deriv k7 = f_eval(p, c, a, t + h, u5, v5);  // FSAL stage, used for the error only
      double eu = h * (kE[0] * k1.du + kE[2] * k3.du + kE[3] * k4.du + kE[4] * k5.du +
                       kE[5] * k6.du + kE[6] * k7.du);
      double ev = h * (kE[0] * k1.dv + kE[2] * k3.dv + kE[3] * k4.dv + kE[4] * k5.dv +
                       kE[5] * k6.dv + kE[6] * k7.dv);

      if (!std::isfinite(u5) || !std::isfinite(v5)) {
        traj.ok = false;
        traj.diagnostic = "nonfinite state at t=" + std::to_string(state.t);
        record(state);
        return traj;
      }

      double scu = tol * (1.0 + std::max(std::fabs(u), std::fabs(u5)));
      double scv = tol * (1.0 + std::max(std::fabs(v), std::fabs(v5)));
      double err = std::sqrt(0.5 * ((eu / scu) * (eu / scu) + (ev / scv) * (ev / scv)));

      if (err <= 1.0) {
        state.t = t + h;
        state.u_dir = u5;
        state.v_dir = v5;
        state.renormalize();
        ++traj.steps_accepted;
        if (opts.store_steps && state.t != cp) record(state);
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.14) * std::pow(err_prev, 0.08);
        err_prev = std::max(err, 1e-10);
        h *= std::clamp(fac, 0.2, 5.0);
      } else {
        ++traj.steps_rejected;
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
      }
      if (std::fabs(h) > h_cap) h = forward ? h_cap : -h_cap;
    }
    state.t = cp;
    record(state);
  }
  return traj;
}

ModeState oracle_integrate(const ModeParams& p, const Coefficient& c,
                           std::pair<double, double> init, double t0, double t1,
                           std::size_t steps) {
  if (steps < 10000) throw std::invalid_argument("oracle_integrate: steps >= 1e4");
  ModeState s = ModeState::from_physical(t0, init.first, init.second);
  if (s.u_dir == 0.0 && s.v_dir == 0.0) {
    s.t = t1;
    return s;
  }
  double a = p.damping();
  double h = (t1 - t0) / static_cast<double>(steps);
  double u = s.u_dir, v = s.v_dir;
  double cu = 0.0, cv = 0.0;  // Kahan compensation

  auto add = [](double& y, double& comp, double delta) {
    double yy = delta - comp;
    double t = y + yy;
    comp = (t - y) - yy;
    y = t;
  };

  for (std::size_t i = 0; i < steps; ++i) {
    double t = t0 + static_cast<double>(i) * h;
    Deriv k1 = f_eval(p, c, a, t, u, v);
    Deriv k2 = f_eval(p, c, a, t + 0.5 * h, u + 0.5 * h * k1.du, v + 0.5 * h * k1.dv);
    Deriv k3 = f_eval(p, c, a, t + 0.5 * h, u + 0.5 * h * k2.du, v + 0.5 * h * k2.dv);
    Deriv k4 = f_eval(p, c, a, t + h, u + h * k3.du, v + h * k3.dv);
    add(u, cu, h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du));
    add(v, cv, h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv));
    double m = std::max(std::fabs(u), std::fabs(v));
    if (m > 2.0 || (m < 0.5 && m > 0.0)) {
      u /= m;
      v /= m;
      cu /= m;
      cv /= m;
      s.log_scale += std::log(m);
    }
  }
  s.t = t1;
  s.u_dir = u;
  s.v_dir = v;
  s.renormalize();
  return s;
}

std::string Trajectory::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,log_scale,u_dir,v_dir,logE_classic,logF_weighted\n";
  for (std::size_t i = 0; i < states.size(); ++i) {
    const ModeState& s = states[i];
    const EnergyRecord& e = energies[i];
    os << s.t << "," << s.log_scale << "," << s.u_dir << "," << s.v_dir << ","
       << e.logE_classic << "," << e.logF_weighted << "\n";
  }
  return os.str();
}

}  // namespace hypdamp
