#include "hypdamp/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypdamp/logspace.hpp"
#include "hypdamp/parallel.hpp"

namespace hypdamp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double make_margin(double log_lhs, double log_rhs) {
  if (log_lhs == -kInf) return kInf;
  return log_rhs - log_lhs;
}

BoundAudit audit_of(std::string name, double t, double log_lhs, double log_rhs,
                    std::string params = {}) {
  BoundAudit a;
  a.bound_name = std::move(name);
  a.t = t;
  a.log_lhs = log_lhs;
  a.log_rhs = log_rhs;
  a.margin = make_margin(log_lhs, log_rhs);
  a.params = std::move(params);
  return a;
}

double log_sq(double x) { return x == 0.0 ? -kInf : 2.0 * std::log(std::fabs(x)); }

}  // namespace

FrequencySplit split_at(const std::vector<double>& lambdas, double nu) {
  FrequencySplit s;
  s.nu = nu;
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    (lambdas[i] < nu ? s.low_modes : s.high_modes).push_back(i);
  return s;
}

double LemmaAuditResult::min_margin() const {
  double m = kInf;
  for (const auto& a : audits) m = std::min(m, a.margin);
  return m;
}

double FamilyAuditResult::min_margin() const {
  double m = kInf;
  for (const auto& a : audits) m = std::min(m, a.margin);
  return m;
}

std::vector<double> audit_sample_times(double horizon, std::size_t count) {
  std::vector<double> ts;
  ts.push_back(0.0);
  double lo = std::log(horizon) - 12.0;  // horizon * ~6e-6 up to horizon
  double hi = std::log(horizon);
  for (std::size_t i = 0; i < count; ++i)
    ts.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                   static_cast<double>(count - 1)));
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

std::optional<double> supercritical_feasible_r(const ModeParams& p, double mu2) {
  double pw = std::pow(p.lambda, 4.0 * p.sigma - 2.0);
  double r = std::min({(1.0 - 1e-9) * p.delta * pw / mu2, 0.5 / p.delta,
                       (4.0 * p.delta * p.delta * pw / mu2 - 1.0) / (2.0 * p.delta)});
  if (!(r > 0.0)) return std::nullopt;
  return r;
}

std::optional<double> subcritical_feasible_r(const ModeParams& p, double mu1, double mu2,
                                             double big_lambda_term) {
  const double L = big_lambda_term;
  const double d = p.delta;
  auto slack = [&](double r) {
    return 4.0 * (d - r) * (d * mu1 - r * mu2) -
           (L * L + 2.0 * d * (1.0 + 2.0 * r) * L + 8.0 * r * d * d * d);
  };
  if (!(slack(0.0) > 0.0)) return std::nullopt;
  double hi = std::min(d, d * mu1 / mu2);
  if (slack(hi) >= 0.0) return hi * (1.0 - 1e-10);
  double lo = 0.0;
  while ((hi - lo) > 1e-10 * hi) {
    double mid = 0.5 * (lo + hi);
    (slack(mid) >= 0.0 ? lo : hi) = mid;
  }
  return lo > 0.0 ? std::optional<double>(lo) : std::nullopt;
}

LemmaAuditResult verify_sup_lemma(const ModeParams& p, const Coefficient& c,
                                  std::pair<double, double> init, double horizon, double alpha,
                                  double beta, std::optional<double> r_opt,
                                  std::size_t samples) {
  LemmaAuditResult res;
  const double d = p.delta, lam = p.lambda, s = p.sigma;
  const double mu2 = c.mu2();
  if (!(d > 0 && lam > 0 && s > 0)) {
    res.rejection = "need delta > 0, lambda > 0, sigma > 0";
    return res;
  }
  if (c.mu1() < -1e-12 || !(mu2 > 0)) {
    res.rejection = "degenerate hyperbolicity 0 <= c <= mu2 violated";
    return res;
  }
  double pw = std::pow(lam, 4.0 * s - 2.0);
  if (4.0 * d * d * pw < mu2) {
    res.rejection = "4 delta^2 lambda^(4 sigma - 2) >= mu2 violated";
    return res;
  }

  bool abs_ok = lam >= 1.0 && s >= 0.5 && (alpha - beta) >= 1.0 - s - 1e-12 &&
                (alpha - beta) <= s + 1e-12;
  std::optional<double> r = r_opt ? r_opt : supercritical_feasible_r(p, mu2);
  if (!r) res.decay_skipped = "no r > 0 satisfies the supercritical triple";
  if (!abs_ok && !r_opt) {
    // The decay estimate shares the phase-space preconditions.
    if (r) res.decay_skipped = "phase-space exponent window requires lambda >= 1, sigma >= 1/2";
    r.reset();
  }
  res.feasible_r = r;

  std::ostringstream ps;
  ps << "lambda=" << lam << " sigma=" << s << " delta=" << d << " alpha=" << alpha
     << " beta=" << beta;
  const std::string params = ps.str();

  IntegrateOptions opts;
  opts.sample_times = audit_sample_times(horizon, samples);
  Trajectory traj = integrate(p, c, init, 0.0, horizon, 1e-10, opts);

  const double u0 = init.first, u1 = init.second;
  const double la = std::log(lam);
  // Constant right-hand sides in log space.
  double rhs_u = log_add(std::log(2.0) - 2.0 * std::log(d) - 4.0 * s * la + log_sq(u1),
                         std::log(3.0) + log_sq(u0));
  double rhs_up =
      log_add(std::log(2.0 + mu2 * mu2 / (std::pow(d, 4) * std::pow(lam, 8.0 * s - 4.0))) +
                  log_sq(u1),
              std::log(1.5 * mu2 * mu2 / (d * d)) - (4.0 * s - 4.0) * la + log_sq(u0));
  double rhs_abs = log_add(
      std::log(2.0 + 2.0 / (d * d) + mu2 * mu2 / std::pow(d, 4)) + 4.0 * beta * la + log_sq(u1),
      std::log(3.0 * (1.0 + mu2 * mu2 / (2.0 * d * d))) + 4.0 * alpha * la + log_sq(u0));
  double rhs_gevrey0 = log_add(
      std::log(2.0 * (1.0 + 2.0 * mu2 * mu2 / std::pow(d, 4) + 1.0 / (d * d))) +
          4.0 * beta * la + log_sq(u1),
      std::log(3.0 * (1.0 + 2.0 * mu2 * mu2 / (d * d))) + 4.0 * alpha * la + log_sq(u0));

  for (const ModeState& st : traj.states) {
    double lu = st.log_abs_u(), lv = st.log_abs_v();
    res.audits.push_back(audit_of("sup-u", st.t, 2.0 * lu, rhs_u, params));
    res.audits.push_back(audit_of("sup-du", st.t, 2.0 * lv, rhs_up, params));
    if (abs_ok) {
      double lhs = log_add(4.0 * beta * la + 2.0 * lv, 4.0 * alpha * la + 2.0 * lu);
      res.audits.push_back(audit_of("sup-phase", st.t, lhs, rhs_abs, params));
      if (r) {
        double decay = 2.0 * (*r) * std::pow(lam, 2.0 * (1.0 - s)) * c.integral(0.0, st.t);
        res.audits.push_back(audit_of("sup-decay", st.t, lhs, rhs_gevrey0 - decay, params));
      }
    }
  }
  return res;
}

LemmaAuditResult verify_sub_lemma(const ModeParams& p, const Coefficient& c,
                                  std::pair<double, double> init, double horizon,
                                  std::optional<double> r_opt, std::size_t samples) {
  LemmaAuditResult res;
  const double d = p.delta, lam = p.lambda, s = p.sigma;
  const double mu1 = c.mu1(), mu2 = c.mu2();
  if (!(d > 0 && lam > 0)) {
    res.rejection = "need delta > 0, lambda > 0";
    return res;
  }
  if (s < 0.0 || s > 0.5 + 1e-12) {
    res.rejection = "sigma in [0, 1/2] required";
    return res;
  }
  if (!(mu1 > 0)) {
    res.rejection = "strict hyperbolicity mu1 > 0 violated";
    return res;
  }
  if (!c.modulus()) {
    res.rejection = "coefficient carries no declared continuity modulus";
    return res;
  }
  const double L = std::pow(lam, 1.0 - 2.0 * s) * (*c.modulus())(1.0 / lam);
  if (4.0 * d * d * mu1 < L * L + 2.0 * d * L) {
    res.rejection = "modulus smallness 4 delta^2 mu1 >= L^2 + 2 delta L violated";
    return res;
  }

  std::optional<double> r = r_opt;
  if (!r && lam >= 1.0) {
    r = subcritical_feasible_r(p, mu1, mu2, L);
    if (!r) {
      std::ostringstream os;
      os << "no r in (0, delta): inequality gap "
         << 4.0 * d * d * mu1 - (L * L + 2.0 * d * L) << " at r=0";
      res.decay_skipped = os.str();
    }
  } else if (!r) {
    res.decay_skipped = "decay statement requires lambda >= 1";
  }
  res.feasible_r = r;

  std::ostringstream ps;
  ps << "lambda=" << lam << " sigma=" << s << " delta=" << d << " L=" << L;
  const std::string params = ps.str();

  IntegrateOptions opts;
  opts.sample_times = audit_sample_times(horizon, samples);
  Trajectory traj = integrate(p, c, init, 0.0, horizon, 1e-10, opts);

  const double u0 = init.first, u1 = init.second;
  double rhs0 = log_add(std::log(4.0) + log_sq(u1),
                        std::log(2.0 * (3.0 * d * d * std::pow(lam, 4.0 * s) +
                                        lam * lam * mu2)) +
                            log_sq(u0));
  double l2mu1 = std::log(2.0 * mu1) + 2.0 * std::log(lam);

  for (const ModeState& st : traj.states) {
    double lhs = log_add(2.0 * st.log_abs_v(), l2mu1 + 2.0 * st.log_abs_u());
    res.audits.push_back(audit_of("sub-energy", st.t, lhs, rhs0, params));
    if (r) {
      double decay = 2.0 * (*r) * std::pow(lam, 2.0 * s) * st.t;
      res.audits.push_back(audit_of("sub-decay", st.t, lhs, rhs0 - decay, params));
    }
  }
  return res;
}

LemmaAuditResult verify_low_frequency(const ModeParams& p, const Coefficient& c,
                                      std::pair<double, double> init, double horizon,
                                      std::size_t samples) {
  LemmaAuditResult res;
  const double lam = p.lambda;
  IntegrateOptions opts;
  opts.sample_times = audit_sample_times(horizon, samples);
  Trajectory traj = integrate(p, c, init, 0.0, horizon, 1e-10, opts);

  double log_e0 = traj.energies.front().logE_classic;
  std::ostringstream ps;
  ps << "lambda=" << lam << " sigma=" << p.sigma << " delta=" << p.delta;

  bool nonneg = c.mu1() >= 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    double t = traj.states[i].t;
    double abs_int;
    if (nonneg) {
      abs_int = c.integral(0.0, t);
    } else {
      abs_int = 0.0;  // trapezoid on |c|
      const std::size_t n = 2048;
      double prev = std::fabs(c(0.0));
      for (std::size_t j = 1; j <= n; ++j) {
        double tj = t * static_cast<double>(j) / static_cast<double>(n);
        double cur = std::fabs(c(tj));
        abs_int += 0.5 * (prev + cur) * (t / static_cast<double>(n));
        prev = cur;
      }
    }
    double rhs = log_e0 + lam * t + lam * abs_int;
    res.audits.push_back(
        audit_of("low-freq", t, traj.energies[i].logE_classic, rhs, ps.str()));
  }
  return res;
}

FamilyAuditResult verify_family(FamilyTheorem theorem, const FamilyData& data,
                                const Coefficient& c, double sigma, double delta, double nu,
                                double horizon, double alpha, double beta,
                                std::size_t samples, int jobs) {
  FamilyAuditResult res;
  const std::size_t n = data.lambdas.size();
  if (data.u0.size() != n || data.u1.size() != n) {
    res.rejection = "data vectors must align with the spectrum";
    return res;
  }
  res.split = split_at(data.lambdas, nu);
  const bool sup = theorem == FamilyTheorem::sup_reg || theorem == FamilyTheorem::sup_gevrey;
  const bool gevrey = theorem == FamilyTheorem::sup_gevrey || theorem == FamilyTheorem::sub_gevrey;
  const double mu1 = c.mu1(), mu2 = c.mu2();

  if (nu < 1.0) {
    res.rejection = "nu >= 1 required";
    return res;
  }
  // Per-mode admissibility over the high block, naming the first failure.
  std::optional<double> r_family;
  for (std::size_t idx : res.split.high_modes) {
    double lam = data.lambdas[idx];
    ModeParams mp{lam, sigma, delta};
    if (sup) {
      double pw = std::pow(lam, 4.0 * sigma - 2.0);
      if (4.0 * delta * delta * pw < mu2) {
        std::ostringstream os;
        os << "threshold fails at lambda=" << lam << ": 4 delta^2 lambda^(4s-2) < mu2";
        res.rejection = os.str();
        return res;
      }
      if (gevrey) {
        auto r = supercritical_feasible_r(mp, mu2);
        if (!r) {
          std::ostringstream os;
          os << "no decay rate at lambda=" << lam;
          res.rejection = os.str();
          return res;
        }
        r_family = r_family ? std::min(*r_family, *r) : *r;
      }
    } else {
      if (!c.modulus()) {
        res.rejection = "coefficient carries no declared continuity modulus";
        return res;
      }
      if (!(mu1 > 0)) {
        res.rejection = "strict hyperbolicity mu1 > 0 violated";
        return res;
      }
      double L = std::pow(lam, 1.0 - 2.0 * sigma) * (*c.modulus())(1.0 / lam);
      if (4.0 * delta * delta * mu1 < L * L + 2.0 * delta * L) {
        std::ostringstream os;
        os << "threshold fails at lambda=" << lam << ": modulus smallness violated";
        res.rejection = os.str();
        return res;
      }
      if (gevrey) {
        auto r = subcritical_feasible_r(mp, mu1, mu2, L);
        if (!r) {
          std::ostringstream os;
          os << "no decay rate at lambda=" << lam;
          res.rejection = os.str();
          return res;
        }
        r_family = r_family ? std::min(*r_family, *r) : *r;
      }
    }
  }
  res.r_used = r_family;

  std::vector<double> times = audit_sample_times(horizon, samples);
  // Parallel map over high modes; one trajectory slot per mode keeps the
  // reduction order fixed.
  std::vector<Trajectory> trajs(res.split.high_modes.size());
  par::for_each_index(
      res.split.high_modes.size(),
      [&](std::size_t i) {
        std::size_t idx = res.split.high_modes[i];
        ModeParams mp{data.lambdas[idx], sigma, delta};
        IntegrateOptions opts;
        opts.sample_times = times;
        trajs[i] = integrate(mp, c, {data.u0[idx], data.u1[idx]}, 0.0, horizon, 1e-10, opts);
      },
      jobs);

  // Map sampled states by time index; integrate() records exactly the
  // requested times (plus boundaries), so filter to the shared list.
  auto states_at = [&](const Trajectory& tr) {
    std::vector<const ModeState*> out;
    std::size_t j = 0;
    for (const ModeState& st : tr.states) {
      if (j < times.size() && st.t == times[j]) {
        out.push_back(&st);
        ++j;
      }
    }
    return out;
  };
  std::vector<std::vector<const ModeState*>> sampled;
  sampled.reserve(trajs.size());
  for (const auto& tr : trajs) sampled.push_back(states_at(tr));

  // Data-side norms.
  double rhs_data = -kInf;
  double K = 0.0;
  std::ostringstream ps;
  ps << "sigma=" << sigma << " delta=" << delta << " nu=" << nu;
  if (sup) {
    double s1 = -kInf, s0 = -kInf;
    for (std::size_t idx : res.split.high_modes) {
      double la = std::log(data.lambdas[idx]);
      s1 = log_add(s1, 4.0 * beta * la + log_sq(data.u1[idx]));
      s0 = log_add(s0, 4.0 * alpha * la + log_sq(data.u0[idx]));
    }
    if (!gevrey) {
      double K1 = 2.0 + 2.0 / (delta * delta) + mu2 * mu2 / std::pow(delta, 4);
      double K2 = 3.0 * (1.0 + mu2 * mu2 / (2.0 * delta * delta));
      rhs_data = log_add(std::log(K1) + s1, std::log(K2) + s0);
      K = std::max(K1, K2);
    } else {
      double K1 = 2.0 * (1.0 + 2.0 * mu2 * mu2 / std::pow(delta, 4) + 1.0 / (delta * delta));
      double K2 = 3.0 * (1.0 + 2.0 * mu2 * mu2 / (delta * delta));
      // (1+lambda)^(4a) <= max(1, 2^(4a)) lambda^(4a) on lambda >= 1.
      double g = std::max({1.0, std::exp2(4.0 * alpha), std::exp2(4.0 * beta)});
      K = g * std::max(K1, K2);
      rhs_data = std::log(K) + log_add(s1, s0);
    }
  } else {
    double s1 = -kInf, s0 = -kInf;
    for (std::size_t idx : res.split.high_modes) {
      double la = std::log(data.lambdas[idx]);
      s1 = log_add(s1, log_sq(data.u1[idx]));
      s0 = log_add(s0, 2.0 * la + log_sq(data.u0[idx]));  // |A^(1/2) u0|^2
    }
    if (!gevrey) {
      rhs_data = log_add(std::log(4.0) + s1,
                         std::log(2.0 * (3.0 * delta * delta + mu2)) + s0);
      K = std::max(4.0, 2.0 * (3.0 * delta * delta + mu2));
    } else {
      K = (1.0 + 2.0 / mu1) * std::max(4.0, 2.0 * (3.0 * delta * delta + mu2));
      rhs_data = std::log(K) + log_add(s1, s0);
    }
  }
  res.bound_constant = K;

  const double phi_exp = sup ? 2.0 * (1.0 - sigma) : 2.0 * sigma;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    double t = times[ti];
    double lhs = -kInf;
    for (std::size_t i = 0; i < sampled.size(); ++i) {
      if (ti >= sampled[i].size()) continue;
      const ModeState& st = *sampled[i][ti];
      std::size_t idx = res.split.high_modes[i];
      double la = std::log(data.lambdas[idx]);
      double lu = st.log_abs_u(), lv = st.log_abs_v();
      if (theorem == FamilyTheorem::sup_reg) {
        lhs = log_add(lhs, log_add(4.0 * beta * la + 2.0 * lv, 4.0 * alpha * la + 2.0 * lu));
      } else if (theorem == FamilyTheorem::sub_reg) {
        lhs = log_add(lhs, log_add(2.0 * lv, std::log(2.0 * mu1) + 2.0 * la + 2.0 * lu));
      } else {
        // Weighted norms per the sequence-space definition, with radius
        // r C(t) (sup) or r t (sub).
        double radius = *res.r_used * (sup ? c.integral(0.0, t) : t);
        double w = 2.0 * radius * std::exp(phi_exp * la);
        double l1p = std::log1p(data.lambdas[idx]);
        if (sup) {
          lhs = log_add(lhs, log_add(4.0 * beta * l1p + 2.0 * lv + w,
                                     4.0 * alpha * l1p + 2.0 * lu + w));
        } else {
          lhs = log_add(lhs, log_add(2.0 * lv + w, 2.0 * l1p + 2.0 * lu + w));
        }
      }
    }
    const char* name = theorem == FamilyTheorem::sup_reg      ? "family-sup"
                       : theorem == FamilyTheorem::sub_reg    ? "family-sub"
                       : theorem == FamilyTheorem::sup_gevrey ? "family-sup-gevrey"
                                                              : "family-sub-gevrey";
    res.audits.push_back(audit_of(name, t, lhs, rhs_data, ps.str()));
  }
  return res;
}

}  // namespace hypdamp
