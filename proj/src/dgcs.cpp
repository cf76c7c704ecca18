#include "hypdamp/dgcs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypdamp/logspace.hpp"
#include "hypdamp/mode_solver.hpp"
#include "hypdamp/parallel.hpp"
#include "json.hpp"

namespace hypdamp {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
// A gamma/affine piece is materialized as a double-range segment only when
// its times and frequency fit comfortably inside double range.
constexpr double kLogTimeFloor = -667.0;   // ~1e-290
constexpr double kLogLambdaCeil = 690.0;   // ~1e299

double rel_margin_of(const ExtReal& margin, const ExtReal& lhs, const ExtReal& rhs) {
  ExtReal scale = max(max(abs(lhs), abs(rhs)), ExtReal(1.0));
  return (margin / scale).to_double();
}

}  // namespace

LedgerEntry ledger_check_le(std::string name, int k, const ExtReal& lhs, const ExtReal& rhs) {
  LedgerEntry e;
  e.name = std::move(name);
  e.k = k;
  e.lhs = lhs;
  e.rhs = rhs;
  e.margin = rhs - lhs;
  e.rel_margin = rel_margin_of(e.margin, lhs, rhs);
  e.pass = e.margin >= ExtReal(0.0);
  return e;
}

LedgerEntry ledger_check_ge(std::string name, int k, const ExtReal& lhs, const ExtReal& rhs) {
  LedgerEntry e = ledger_check_le(std::move(name), k, rhs, lhs);
  std::swap(e.lhs, e.rhs);
  return e;
}

namespace {

// Log-domain evaluation bundle for the construction inputs.
struct Scales {
  double sigma, delta;
  const ContinuityModulus* omega;
  const WeightFunction* phi;
  const WeightFunction* psi;

  double log_w(double L) const { return omega->log_eval_of_log(-L); }  // log omega(1/lambda)
  // log(lambda^(2s) + phi(lambda) + psi(lambda))
  double log_s3(double L) const {
    return log_add({2.0 * sigma * L, phi->log_eval_of_log(L), psi->log_eval_of_log(L)});
  }
  double log_eps(double L) const { return 0.5 * (log_s3(L) + log_w(L) - L); }
};

struct CandidateChecks {
  std::vector<LedgerEntry> entries;
  bool pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const LedgerEntry& e) { return e.pass; });
  }
};

// Spacing inequalities tying pick k to pick k-1.
CandidateChecks spacing_checks(const Scales& sc, int k, double Lp, double L) {
  CandidateChecks c;
  const double kk = static_cast<double>(k) * static_cast<double>(k);
  const double d = sc.delta;
  ExtReal lam = ExtReal::exp_of(L), lam_prev = ExtReal::exp_of(Lp);
  c.entries.push_back(ledger_check_ge("spacing-ratio", k, lam, ExtReal(4.0) * lam_prev));

  ExtReal lhs = ExtReal::exp_of((1.0 + 2.0 * sc.sigma) * L + sc.log_w(L));
  ExtReal s3w_prev = ExtReal::exp_of(sc.log_s3(Lp) + sc.log_w(Lp));
  c.entries.push_back(ledger_check_ge(
      "spacing-backward-slope", k, lhs,
      ExtReal(std::pow(d, 4) / (1024.0 * kPi * kPi)) * ExtReal::exp_of((8.0 * sc.sigma - 2.0) * Lp) +
          ExtReal(4.0 * kk / (kPi * kPi)) * ExtReal::exp_of(2.0 * Lp)));
  c.entries.push_back(ledger_check_ge(
      "spacing-prev-growth", k, lhs,
      ExtReal(4.0 * kk / (kPi * kPi)) * ExtReal::exp_of(3.0 * Lp) * s3w_prev));
  c.entries.push_back(
      ledger_check_ge("spacing-rate-monotone", k, lhs, ExtReal::exp_of(Lp) * s3w_prev));
  c.entries.push_back(ledger_check_le(
      "spacing-weight-decay", k, ExtReal::exp_of(sc.log_s3(L) - L - sc.log_w(L)),
      ExtReal(kPi * kPi / (4.0 * kk)) * ExtReal::exp_of(-2.0 * Lp)));
  return c;
}

// Certificate inequalities at pick k (needs the previous pick).
CandidateChecks certificate_checks(const Scales& sc, int k, double Lp, double L) {
  CandidateChecks c;
  const double s = sc.sigma, d = sc.delta;
  ExtReal eps = ExtReal::exp_of(sc.log_eps(L));
  ExtReal shift = ExtReal(d * d) * ExtReal::exp_of((4.0 * s - 2.0) * L);

  c.entries.push_back(ledger_check_le(
      "cert-amplitude", k, shift + ExtReal(16.0) * eps * eps + ExtReal(8.0) * eps,
      ExtReal(0.5)));
  c.entries.push_back(ledger_check_le("cert-eps-quarter", k, eps, ExtReal(0.25)));
  c.entries.push_back(ledger_check_le(
      "cert-backward-window", k,
      ExtReal(16.0 * kPi) * eps + ExtReal(16.0 * kPi * d) * ExtReal::exp_of((2.0 * s - 1.0) * L),
      ExtReal(2.0 * kPi)));
  c.entries.push_back(ledger_check_le(
      "cert-weight-smallness", k, ExtReal::exp_of(sc.log_s3(L) - L - sc.log_w(L)),
      ExtReal(1.0 / (25.0 * 1024.0 * kPi * kPi))));

  // sup over (0, t_k) of x^(1-2s)/omega(x), estimated on a 1000-point log
  // grid with a 2x safety factor.
  double log_t = std::log(4.0 * kPi) - L;
  double best = -kInf;
  for (int i = 0; i < 1000; ++i) {
    double lx = log_t - 69.0 + 69.0 * static_cast<double>(i) / 999.0;
    best = std::max(best, (1.0 - 2.0 * s) * lx - sc.omega->log_eval_of_log(lx));
  }
  ExtReal sup2 = ExtReal(2.0) * ExtReal::exp_of(best);
  ExtReal lead = ExtReal(d * d / std::pow(4.0 * kPi, 2.0 - 4.0 * s)) *
                 ExtReal::exp_of((1.0 - 2.0 * s) * (std::log(2.0) + log_t));
  c.entries.push_back(ledger_check_le("cert-endpoint-spread", k, lead * sup2, ExtReal(0.2)));

  c.entries.push_back(ledger_check_ge(
      "cert-eps-dominates-delta", k, ExtReal::exp_of((1.0 - 2.0 * s) * L + sc.log_w(L)),
      ExtReal(d * d)));
  c.entries.push_back(ledger_check_le(
      "cert-interp-slope", k,
      ExtReal(2.0 * d * d) * ExtReal::exp_of(-(2.0 - 4.0 * s) * Lp - sc.log_w(Lp)),
      ExtReal(0.2)));
  return c;
}

void precheck_inputs(const DgcsInputs& in) {
  if (!(in.sigma >= 0.0 && in.sigma < 0.5))
    throw DgcsRejection("sigma-range", "sigma must lie in [0, 1/2)");
  if (!(in.delta > 0.0)) throw DgcsRejection("delta-range", "delta must be positive");
  if (!in.omega.supports_log_domain())
    throw DgcsRejection("modulus-not-log-evaluable",
                        "tabulated moduli cannot drive the construction");
  if (!in.phi.supports_log_domain() || !in.psi.supports_log_domain())
    throw DgcsRejection("weight-not-log-evaluable",
                        "tabulated weights cannot drive the construction");

  // omega(e) / e^(1-2s) must blow up along e -> 0.
  auto ratio = [&](double le) { return in.omega.log_eval_of_log(le) - (1.0 - 2.0 * in.sigma) * le; };
  double prev = ratio(-2.0 * std::log(10.0));
  double first = prev;
  for (int j = 3; j <= 14; ++j) {
    double cur = ratio(-static_cast<double>(j) * std::log(10.0));
    if (cur < prev - 1e-12)
      throw DgcsRejection("omega-not-divergent",
                          "omega(e)/e^(1-2 sigma) is not increasing toward 0");
    prev = cur;
  }
  if (prev - first < std::log(2.0))
    throw DgcsRejection("omega-not-divergent", "omega(e)/e^(1-2 sigma) does not diverge");

  // x/w(x) * omega(1/x) must blow up for w = phi and w = psi.
  auto weight_ok = [&](const WeightFunction& w) {
    auto g = [&](double L) { return L - w.log_eval_of_log(L) + in.omega.log_eval_of_log(-L); };
    double lo = g(std::log(1e3)), hi = g(std::log(1e12));
    return hi > lo + std::log(2.0);
  };
  if (!weight_ok(in.phi))
    throw DgcsRejection("phi-too-large", "x/phi(x) omega(1/x) does not diverge");
  if (!weight_ok(in.psi))
    throw DgcsRejection("psi-too-large", "x/psi(x) omega(1/x) does not diverge");
}

}  // namespace

DgcsSelection select_subsequence(const DgcsInputs& in) {
  precheck_inputs(in);
  Scales sc{in.sigma, in.delta, &in.omega, &in.phi, &in.psi};
  const SpectralSequence& pool = in.base;
  if (pool.size() < 2) throw DgcsRejection("pool-too-small", "need at least two candidates");

  DgcsSelection sel;
  std::vector<std::vector<LedgerEntry>> cert_by_pos;  // certificate entries per position
  sel.log_lambda.push_back(pool.log_lambda(0));
  sel.pool_index.push_back(0);
  cert_by_pos.push_back({});
  int last_fail = 0;  // position 0 can never be certified (no predecessor)
  std::string last_fail_name = "no-predecessor";

  std::uint64_t cursor = 0;
  const int kMaxPositions = 64;
  while (static_cast<int>(sel.log_lambda.size()) - 1 - last_fail < in.k_max &&
         static_cast<int>(sel.log_lambda.size()) < kMaxPositions) {
    int k = static_cast<int>(sel.log_lambda.size());
    double Lp = sel.log_lambda.back();
    auto admissible = [&](std::uint64_t j) {
      return spacing_checks(sc, k, Lp, pool.log_lambda(j)).pass();
    };
    // Admissibility is monotone in lambda for log-domain inputs: gallop
    // forward, then bisect back to the least admissible index.
    std::uint64_t lo = cursor;  // known inadmissible (or the previous pick)
    std::uint64_t hi = cursor + 1;
    std::uint64_t step = 1;
    bool found = false;
    while (hi < pool.size()) {
      if (admissible(hi)) {
        found = true;
        break;
      }
      lo = hi;
      step *= 2;
      hi = (hi + step < pool.size()) ? hi + step : pool.size() - 1;
      if (hi == lo) break;
    }
    if (!found) {
      sel.pool_exhausted = true;
      break;
    }
    while (hi - lo > 1) {
      std::uint64_t mid = lo + (hi - lo) / 2;
      (admissible(mid) ? hi : lo) = mid;
    }
    cursor = hi;
    double L = pool.log_lambda(hi);
    sel.log_lambda.push_back(L);
    sel.pool_index.push_back(hi);
    for (auto& e : spacing_checks(sc, k, Lp, L).entries) sel.ledger.push_back(e);

    CandidateChecks cert = certificate_checks(sc, k, Lp, L);
    cert_by_pos.push_back(cert.entries);
    if (!cert.pass()) {
      last_fail = k;
      for (const auto& e : cert.entries)
        if (!e.pass) last_fail_name = e.name;
    }
  }

  int positions = static_cast<int>(sel.log_lambda.size());
  if (positions - 1 - last_fail <= 0)
    throw DgcsRejection("no-admissible-k0", "certificate never stabilized; last failure: " +
                                                last_fail_name);
  sel.k0 = last_fail + 1;
  if (positions - sel.k0 < in.k_max) sel.pool_exhausted = true;
  for (int k = 1; k < positions; ++k) {
    auto& dst = (k >= sel.k0) ? sel.ledger : sel.probes;
    for (const auto& e : cert_by_pos[k]) dst.push_back(e);
  }
  return sel;
}

std::vector<DgcsModeSetup> init_modes(const DgcsInputs& in, const DgcsSelection& sel) {
  if (sel.k0 < 1) throw DgcsRejection("no-admissible-k0", "selection carries no certified modes");
  Scales sc{in.sigma, in.delta, &in.omega, &in.phi, &in.psi};
  std::vector<DgcsModeSetup> modes;
  for (int k = sel.k0; k < static_cast<int>(sel.log_lambda.size()); ++k) {
    const double L = sel.log_lambda[k];
    const double Lp = sel.log_lambda[k - 1];
    DgcsModeSetup m;
    m.k = k;
    m.log_lambda = L;
    m.log_t = std::log(4.0 * kPi) - L;
    // s_k = (pi/lambda_k) floor(2 lambda_k / lambda_{k-1}), written as
    // (2 pi / lambda_{k-1}) * (floor(x)/x).  The floor defect is computed
    // directly (and is below log resolution for huge ratios), which keeps
    // s_k <= 2 pi / lambda_{k-1} exact in the ledger.
    double log_ratio = std::log(2.0) + L - Lp;
    double floor_defect = 0.0;
    if (log_ratio < 36.0) {
      double x = std::exp(log_ratio);
      floor_defect = std::min(0.0, std::log(std::floor(x)) - log_ratio);
    }
    m.log_s = std::log(2.0 * kPi) - Lp + floor_defect;
    m.log_eps = sc.log_eps(L);
    ExtReal pump = ExtReal::exp_of(m.log_eps + L);  // eps_k lambda_k
    ExtReal s_ext = ExtReal::exp_of(m.log_s);
    m.eps_lam_s = pump * s_ext;
    m.phi_val = ExtReal::exp_of(in.phi.log_eval_of_log(L));
    m.psi_val = ExtReal::exp_of(in.psi.log_eval_of_log(L));
    // b(t) = (2 eps lambda - delta lambda^(2s)) t - eps sin(2 lambda t);
    // the sine vanishes at t_k and s_k.
    m.b_at_t = 8.0 * kPi * std::exp(m.log_eps) -
               4.0 * kPi * in.delta * std::exp((2.0 * in.sigma - 1.0) * L);
    ExtReal drift =
        ExtReal(2.0) * pump - ExtReal(in.delta) * ExtReal::exp_of(2.0 * in.sigma * L);
    m.b_at_s = drift * s_ext;
    m.log_a = -ExtReal(std::log(static_cast<double>(k))) - ExtReal(L) -
              ExtReal(static_cast<double>(k)) * m.phi_val;
    m.log_u1 = ExtReal(L) + ExtReal(m.b_at_t);
    modes.push_back(m);
  }
  return modes;
}

namespace {

double power_shift(double delta, double sigma, double L) {
  // delta^2 lambda^(4 sigma - 2); underflows to 0 for huge lambda.
  return delta * delta * std::exp((4.0 * sigma - 2.0) * L);
}

void append_assembly_ledger(const DgcsInputs& in, const DgcsSelection& sel,
                            const std::vector<DgcsModeSetup>& modes,
                            std::vector<LedgerEntry>& ledger) {
  Scales sc{in.sigma, in.delta, &in.omega, &in.phi, &in.psi};
  const double d = in.delta, s = in.sigma;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const DgcsModeSetup& m = modes[i];
    int k = m.k;
    double Lp = sel.log_lambda[k - 1];
    double log_epl_prev = sc.log_eps(Lp) + Lp;

    ExtReal sk = ExtReal::exp_of(m.log_s);
    ledger.push_back(ledger_check_ge("interval-lower", k, sk, ExtReal::exp_of(std::log(kPi) - Lp)));
    ledger.push_back(
        ledger_check_le("interval-upper", k, sk, ExtReal::exp_of(std::log(2.0 * kPi) - Lp)));

    ExtReal eps_lam = ExtReal::exp_of(m.log_eps + m.log_lambda);
    ExtReal lam2s = ExtReal::exp_of(2.0 * s * m.log_lambda);
    ledger.push_back(ledger_check_ge("pump-beats-damping", k, eps_lam, ExtReal(d) * lam2s));

    ExtReal w = ExtReal::exp_of(sc.log_w(m.log_lambda));
    ledger.push_back(ledger_check_le("oscillation-vs-modulus", k,
                                     ExtReal(32.0 * kPi) * ExtReal::exp_of(m.log_eps),
                                     w / ExtReal(5.0)));

    ledger.push_back(ledger_check_ge(
        "window-growth-floor", k, m.eps_lam_s,
        ExtReal(d * d / 32.0) * ExtReal::exp_of((4.0 * s - 2.0) * Lp)));

    ExtReal epl_prev = ExtReal::exp_of(log_epl_prev);
    ExtReal two_k(2.0 * static_cast<double>(k));
    ledger.push_back(ledger_check_ge("rate-monotone", k, eps_lam, epl_prev));
    ledger.push_back(ledger_check_ge("window-vs-prev-rate", k, m.eps_lam_s, two_k * epl_prev));
    ledger.push_back(ledger_check_ge("window-absolute", k, m.eps_lam_s, two_k));
    ExtReal s3 = ExtReal::exp_of(sc.log_s3(m.log_lambda));
    ledger.push_back(ledger_check_ge("window-vs-weights", k, m.eps_lam_s, two_k * s3));
    ledger.push_back(ledger_check_ge(
        "window-combined", k, ExtReal(2.0) * m.eps_lam_s,
        ExtReal(static_cast<double>(k)) * epl_prev + two_k * s3 +
            ExtReal(static_cast<double>(k))));

    ExtReal eps = ExtReal::exp_of(m.log_eps);
    ledger.push_back(ledger_check_le(
        "speed-bound-oscillation", k,
        ExtReal(16.0) * eps * (ExtReal(4.0) * eps + ExtReal(1.0)) * ExtReal::exp_of(m.log_lambda),
        ExtReal(32.0) * eps_lam));
    if (i > 0) {
      // Affine interpolation slope over [s_k, t_{k-1}].
      const DgcsModeSetup& prev = modes[i - 1];
      ExtReal num = ExtReal(d * d) * (ExtReal::exp_of((4.0 * s - 2.0) * Lp) -
                                      ExtReal::exp_of((4.0 * s - 2.0) * m.log_lambda));
      ExtReal den = ExtReal::exp_of(prev.log_t) - sk;
      ledger.push_back(
          ledger_check_le("speed-bound-interp", k, num / den, ExtReal(32.0) * eps_lam));
    }
  }
  // The truncated construction ramps affinely from c(0) = 1 up to the last
  // activation level; its omega-continuity bound has the interp-slope form
  // at the deepest mode.
  const DgcsModeSetup& deepest = modes.back();
  ledger.push_back(ledger_check_le(
      "gap-ramp-omega", deepest.k + 1,
      ExtReal(2.0 * d * d) *
          ExtReal::exp_of(-(2.0 - 4.0 * s) * deepest.log_lambda - sc.log_w(deepest.log_lambda)),
      ExtReal(0.2)));
}

}  // namespace

DgcsConstruction build_construction(const DgcsInputs& in, const DgcsSelection& sel) {
  DgcsConstruction cons;
  cons.sigma = in.sigma;
  cons.delta = in.delta;
  cons.omega = in.omega;
  cons.phi = in.phi;
  cons.psi = in.psi;
  cons.selection = sel;
  cons.modes = init_modes(in, sel);
  cons.ledger = sel.ledger;
  append_assembly_ledger(in, sel, cons.modes, cons.ledger);

  // Piece table, ascending in time.  Modes are stored ascending in k, i.e.
  // descending in time.
  const auto& modes = cons.modes;
  auto level = [&](const DgcsModeSetup& m) {
    return 1.0 + power_shift(in.delta, in.sigma, m.log_lambda);
  };
  const DgcsModeSetup& deepest = modes.back();

  DgcsPiece ramp;
  ramp.kind = DgcsPiece::Kind::ramp;
  ramp.k = deepest.k + 1;
  ramp.log_t0 = -kInf;
  ramp.log_t1 = deepest.log_t;
  ramp.c_start = 1.0;
  ramp.c_end = level(deepest);
  ramp.mean = 0.5 * (ramp.c_start + ramp.c_end);
  cons.pieces.push_back(ramp);

  for (std::size_t i = modes.size(); i-- > 0;) {
    const DgcsModeSetup& m = modes[i];
    DgcsPiece g;
    g.kind = DgcsPiece::Kind::gamma;
    g.k = m.k;
    g.log_t0 = m.log_t;
    g.log_t1 = m.log_s;
    g.c_start = g.c_end = level(m);
    double eps = std::exp(m.log_eps);
    g.mean = level(m) - 6.0 * eps * eps;  // full-period average of the oscillation
    cons.pieces.push_back(g);

    if (i > 0) {
      const DgcsModeSetup& prev = modes[i - 1];
      DgcsPiece a;
      a.kind = DgcsPiece::Kind::affine;
      a.k = m.k;
      a.log_t0 = m.log_s;
      a.log_t1 = prev.log_t;
      a.c_start = level(m);
      a.c_end = level(prev);
      a.mean = 0.5 * (a.c_start + a.c_end);
      cons.pieces.push_back(a);
    } else {
      DgcsPiece tail;
      tail.kind = DgcsPiece::Kind::tail;
      tail.k = m.k;
      tail.log_t0 = m.log_s;
      tail.log_t1 = kInf;
      tail.c_start = tail.c_end = tail.mean = level(m);
      cons.pieces.push_back(tail);
    }
  }

  // Materialized double-range view.  Sub-resolution structure collapses to
  // the constant 1 (its oscillation amplitude is below one ulp there).
  std::vector<Segment> segs;
  double edge = 0.0;  // running right edge
  for (const DgcsPiece& p : cons.pieces) {
    if (p.log_t1 <= kLogTimeFloor && p.kind != DgcsPiece::Kind::tail) continue;
    double t1 = p.log_t1 == kInf ? kInf : std::exp(p.log_t1);
    if (segs.empty()) {
      double t0 = p.kind == DgcsPiece::Kind::ramp
                      ? 0.0
                      : std::exp(std::max(p.log_t0, kLogTimeFloor));
      segs.push_back(Segment{Segment::Tag::constant, -kInf, t0, 1.0, 0, 0, 0});
      edge = t0;
    }
    double t0 = edge;
    Segment seg;
    seg.t0 = t0;
    seg.t1 = t1;
    bool start_exact = p.kind == DgcsPiece::Kind::ramp || p.log_t0 > kLogTimeFloor;
    if (p.kind == DgcsPiece::Kind::gamma && start_exact &&
        cons.mode(p.k).log_lambda < kLogLambdaCeil) {
      const DgcsModeSetup& m = cons.mode(p.k);
      seg.tag = Segment::Tag::gamma;
      seg.p0 = std::exp(m.log_eps);
      seg.p1 = std::exp(m.log_lambda);
      seg.p2 = in.delta;
      seg.p3 = in.sigma;
    } else if ((p.kind == DgcsPiece::Kind::affine || p.kind == DgcsPiece::Kind::ramp) &&
               start_exact && std::fabs(p.c_end - p.c_start) > 0.0) {
      seg.tag = Segment::Tag::affine;
      seg.p0 = p.c_start;
      seg.p1 = (p.c_end - p.c_start) / (t1 - t0);
    } else {
      seg.tag = Segment::Tag::constant;
      seg.p0 = p.kind == DgcsPiece::Kind::tail ? p.c_end
               : start_exact                   ? 0.5 * (p.c_start + p.c_end)
                                               : p.mean;
    }
    segs.push_back(seg);
    edge = t1;
  }
  cons.coefficient = Coefficient::piecewise(std::move(segs), 0.5, 1.5, in.omega);

  // Junctions must match to 1e-12.  The analytic endpoint levels agree
  // exactly; pointwise evaluation can confirm this only while the
  // oscillation phase lambda*t is still resolvable in double.
  for (std::size_t i = 0; i + 1 < cons.pieces.size(); ++i) {
    if (std::fabs(cons.pieces[i].c_end - cons.pieces[i + 1].c_start) > 1e-12)
      throw std::logic_error("dgcs assembly: junction level mismatch beyond 1e-12");
  }
  const auto& ss = cons.coefficient.segments();
  for (std::size_t i = 0; i + 1 < ss.size(); ++i) {
    double t = ss[i + 1].t0;
    auto resolvable = [&](const Segment& s) {
      if (s.tag != Segment::Tag::gamma) return true;
      // Rounding of the phase perturbs gamma by ~amp * phase * eps_machine;
      // the 1e-12 comparison only makes sense while that stays below it.
      double amp = 16.0 * s.p0 * s.p0 + 8.0 * s.p0;
      return amp * (s.p1 * std::fabs(t)) < 1e3;
    };
    if (!resolvable(ss[i]) || !resolvable(ss[i + 1])) continue;
    double a = ss[i].eval(t), b = ss[i + 1].eval(t);
    if (std::fabs(a - b) > 1e-12 * std::max(1.0, std::fabs(a)))
      throw std::logic_error("dgcs assembly: junction mismatch beyond 1e-12");
  }
  return cons;
}

bool DgcsConstruction::all_ledger_pass() const {
  return std::all_of(ledger.begin(), ledger.end(), [](const LedgerEntry& e) { return e.pass; });
}

const DgcsModeSetup& DgcsConstruction::mode(int k) const {
  for (const auto& m : modes)
    if (m.k == k) return m;
  throw std::out_of_range("dgcs: no such certified mode");
}

namespace {

json ledger_json(const LedgerEntry& e) {
  return json{{"name", e.name},       {"k", e.k},
              {"lhs", e.lhs.to_string()}, {"rhs", e.rhs.to_string()},
              {"margin", e.margin.to_string()}, {"rel_margin", e.rel_margin},
              {"pass", e.pass}};
}

}  // namespace

std::string DgcsConstruction::to_json_string() const {
  json j;
  j["sigma"] = sigma;
  j["delta"] = delta;
  j["omega"] = json::parse(omega.to_json_string());
  j["phi"] = json::parse(phi.to_json_string());
  j["psi"] = json::parse(psi.to_json_string());
  j["k0"] = selection.k0;
  j["pool_exhausted"] = selection.pool_exhausted;
  j["pool_index"] = selection.pool_index;
  j["log_lambda"] = selection.log_lambda;
  json jm = json::array();
  for (const auto& m : modes) {
    jm.push_back(json{{"k", m.k},
                      {"log_lambda", m.log_lambda},
                      {"log_t", m.log_t},
                      {"log_s", m.log_s},
                      {"log_eps", m.log_eps},
                      {"eps_lam_s", m.eps_lam_s.to_string()},
                      {"b_at_t", m.b_at_t},
                      {"b_at_s", m.b_at_s.to_string()},
                      {"log_a", m.log_a.to_string()}});
  }
  j["modes"] = jm;
  json jp = json::array();
  for (const auto& p : pieces) {
    const char* kind = p.kind == DgcsPiece::Kind::ramp     ? "ramp"
                       : p.kind == DgcsPiece::Kind::gamma  ? "gamma"
                       : p.kind == DgcsPiece::Kind::affine ? "affine"
                       : p.kind == DgcsPiece::Kind::tail   ? "tail"
                                                           : "unit";
    jp.push_back(json{{"kind", kind},
                      {"k", p.k},
                      {"log_t0", p.log_t0},
                      {"log_t1", p.log_t1},
                      {"mean", p.mean}});
  }
  j["pieces"] = jp;
  json jl = json::array();
  for (const auto& e : ledger) jl.push_back(ledger_json(e));
  j["ledger"] = jl;
  j["coefficient"] = json::parse(coefficient.to_json_string());
  return j.dump(2);
}

DivergenceReport propagate_and_certify(const DgcsConstruction& cons, double t_eval,
                                       const std::vector<double>& R_grid,
                                       const std::vector<double>& r_grid, int monotone_tail,
                                       int jobs) {
  if (!(t_eval > 0)) throw std::invalid_argument("propagate_and_certify: t_eval > 0");
  DivergenceReport rep;
  rep.t_eval = t_eval;
  rep.monotone_tail = monotone_tail;
  const double s = cons.sigma, d = cons.delta;

  if (std::exp(cons.modes.front().log_s) >= t_eval) {
    rep.defects.push_back("t_eval lies inside the activation cascade");
    return rep;
  }

  rep.modes.resize(cons.modes.size());
  par::for_each_index(
      cons.modes.size(),
      [&](std::size_t i) {
        const DgcsModeSetup& m = cons.modes[i];
        ModeCertificate cert;
        cert.k = m.k;
        cert.log_lambda = m.log_lambda;
        ExtReal loglam(m.log_lambda);
        ExtReal lam2s = ExtReal::exp_of(2.0 * s * m.log_lambda);

        cert.logE_t = ExtReal(2.0) * (loglam + ExtReal(m.b_at_t));
        cert.logF_s = ExtReal(2.0) * (loglam + m.b_at_s);

        // Backward through every faster piece with its exact mean value;
        // phases of those pieces are orders of magnitude faster than this
        // mode and average out below double precision.
        double x = 0.0, y = 1.0;
        ExtReal ls = ExtReal(m.log_lambda) + ExtReal(m.b_at_t);
        cert.method_back = "piecewise-averaged closed form";
        for (std::size_t pi = cons.pieces.size(); pi-- > 0;) {
          const DgcsPiece& p = cons.pieces[pi];
          if (!(p.log_t1 <= m.log_t)) continue;
          ExtReal t_hi = ExtReal::exp_of(p.log_t1);
          ExtReal t_lo = p.log_t0 == -kInf ? ExtReal(0.0) : ExtReal::exp_of(p.log_t0);
          ExtReal dt = t_lo - t_hi;  // negative: walking backward
          double P = (ExtReal::exp_of(m.log_lambda) * dt).to_double();
          double A = (ExtReal(d) * lam2s * dt).to_double();
          ls += ExtReal(propagate_constant_scaled(P, A, p.mean, x, y));
          double mag = std::max(std::fabs(x), std::fabs(y));
          if (mag > 0.0 && (mag > 2.0 || mag < 0.5)) {
            x /= mag;
            y /= mag;
            ls += ExtReal(std::log(mag));
          }
        }
        cert.logE0 = ExtReal(2.0) * ls + ExtReal(std::log(x * x + y * y));

        // Forward from s_k: the remaining pieces oscillate far below this
        // mode's frequency, so the energy follows the damped adiabatic law
        // d(log F) = -2 delta lambda^(2s) dt + d(log c)/2.
        cert.method_fwd = "adiabatic log-energy transport";
        ExtReal logF = cert.logF_s;
        ExtReal teval(t_eval);
        for (const DgcsPiece& p : cons.pieces) {
          if (!(p.log_t0 >= m.log_s) || p.kind == DgcsPiece::Kind::ramp) continue;
          ExtReal t0 = ExtReal::exp_of(p.log_t0);
          if (!(t0 < teval)) break;
          ExtReal t1 = p.log_t1 == kInf ? teval : min(teval, ExtReal::exp_of(p.log_t1));
          ExtReal dt = t1 - t0;
          double c_end = p.c_end;
          if (p.log_t1 == kInf || ExtReal::exp_of(p.log_t1) > teval) {
            if (p.kind == DgcsPiece::Kind::gamma)
              c_end = p.mean;
            else if (p.kind == DgcsPiece::Kind::affine)
              c_end = p.c_start +
                      (dt / (ExtReal::exp_of(p.log_t1) - t0)).to_double() * (p.c_end - p.c_start);
            else
              c_end = p.c_start;
          }
          logF += ExtReal(-2.0 * d) * lam2s * dt +
                  ExtReal(0.5 * (std::log(c_end) - std::log(p.c_start)));
        }
        cert.logF_eval = logF;

        // Two-sided sanity brackets.
        ExtReal two_els = ExtReal(2.0) * m.eps_lam_s;
        cert.brackets.push_back(ledger_check_le("bracket-e0-upper", m.k, cert.logE0,
                                                ExtReal(2.0) * loglam + ExtReal(4.0 * kPi)));
        ExtReal window = ExtReal(16.0 * kPi * d) * ExtReal::exp_of((2.0 * s - 1.0) * m.log_lambda) +
                         ExtReal(2.0 * kPi);
        cert.brackets.push_back(
            ledger_check_ge("bracket-e0-lower", m.k, cert.logE0, cert.logE_t - window));
        cert.brackets.push_back(
            ledger_check_ge("bracket-fs-lower", m.k, cert.logF_s, ExtReal(2.0) * loglam + two_els));
        // Upper side: b(s_k) <= 2 eps_k lambda_k s_k since the damping term
        // is nonnegative; eps_lam_s shares the product structure of b_at_s,
        // so rounding cannot flip the sign of this margin.
        cert.brackets.push_back(ledger_check_le("bracket-fs-upper", m.k, cert.logF_s,
                                                ExtReal(2.0) * loglam + ExtReal(2.0) * two_els));
        // Persistence floor at t_eval, using the previous pick's pump rate.
        double Lp = cons.selection.log_lambda[m.k - 1];
        Scales sc{cons.sigma, cons.delta, &cons.omega, &cons.phi, &cons.psi};
        ExtReal epl_prev = ExtReal::exp_of(sc.log_eps(Lp) + Lp);
        ExtReal floor_rhs = ExtReal(2.0) * loglam + two_els -
                            ExtReal(8.0 * d) * lam2s * teval -
                            ExtReal(64.0) * epl_prev * teval;
        cert.brackets.push_back(
            ledger_check_ge("bracket-ft-lower", m.k, cert.logF_eval, floor_rhs));
        rep.modes[i] = std::move(cert);
      },
      jobs);

  for (const auto& cert : rep.modes)
    for (const auto& b : cert.brackets)
      if (!b.pass) rep.defects.push_back("mode " + std::to_string(cert.k) + ": " + b.name);

  auto monotone = [&](const std::vector<ExtReal>& terms, bool increasing) {
    int n = std::min<int>(monotone_tail, static_cast<int>(terms.size()));
    for (int i = static_cast<int>(terms.size()) - n; i + 1 < static_cast<int>(terms.size());
         ++i) {
      if (increasing ? !(terms[i] < terms[i + 1]) : !(terms[i] > terms[i + 1])) return false;
    }
    return true;
  };

  for (double r : r_grid) {
    SeriesRow row;
    row.weight_radius = r;
    for (std::size_t i = 0; i < cons.modes.size(); ++i) {
      const DgcsModeSetup& m = cons.modes[i];
      row.terms.push_back(ExtReal(2.0) * m.log_a + rep.modes[i].logE0 +
                          ExtReal(2.0 * r) * m.phi_val);
    }
    row.monotone_tail = monotone(row.terms, false);
    if (!row.monotone_tail)
      rep.defects.push_back("initial series terms not decreasing at r=" + std::to_string(r));
    rep.initial_rows.push_back(std::move(row));
  }
  for (double R : R_grid) {
    SeriesRow row;
    row.weight_radius = R;
    for (std::size_t i = 0; i < cons.modes.size(); ++i) {
      const DgcsModeSetup& m = cons.modes[i];
      row.terms.push_back(ExtReal(2.0) * m.log_a + rep.modes[i].logF_eval -
                          ExtReal(2.0 * R) * m.psi_val);
    }
    row.monotone_tail = monotone(row.terms, true);
    if (!row.monotone_tail)
      rep.defects.push_back("divergence terms not increasing at R=" + std::to_string(R));
    // Divergence floor: the last terms must clear exp(k)/k^2.
    int n = std::min<int>(monotone_tail, static_cast<int>(row.terms.size()));
    for (std::size_t i = row.terms.size() - static_cast<std::size_t>(n); i < row.terms.size();
         ++i) {
      double k = static_cast<double>(cons.modes[i].k);
      if (!(row.terms[i] >= ExtReal(k - 2.0 * std::log(k))))
        rep.defects.push_back("divergence floor missed at k=" +
                              std::to_string(cons.modes[i].k));
    }
    rep.final_rows.push_back(std::move(row));
  }
  return rep;
}

bool DivergenceReport::certified() const { return defects.empty() && !modes.empty(); }

std::string DivergenceReport::to_json_string() const {
  json j;
  j["t_eval"] = t_eval;
  j["monotone_tail"] = monotone_tail;
  j["certified"] = certified();
  j["defects"] = defects;
  json jm = json::array();
  for (const auto& m : modes) {
    json b = json::array();
    for (const auto& e : m.brackets) b.push_back(ledger_json(e));
    jm.push_back(json{{"k", m.k},
                      {"log_lambda", m.log_lambda},
                      {"logE_t", m.logE_t.to_string()},
                      {"logE0", m.logE0.to_string()},
                      {"logF_s", m.logF_s.to_string()},
                      {"logF_eval", m.logF_eval.to_string()},
                      {"method_back", m.method_back},
                      {"method_fwd", m.method_fwd},
                      {"brackets", b}});
  }
  j["modes"] = jm;
  auto rows_json = [](const std::vector<SeriesRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
      json terms = json::array();
      for (const auto& t : r.terms) terms.push_back(t.to_string());
      out.push_back(json{{"radius", r.weight_radius},
                         {"terms", terms},
                         {"monotone_tail", r.monotone_tail}});
    }
    return out;
  };
  j["initial_series"] = rows_json(initial_rows);
  j["final_series"] = rows_json(final_rows);
  return j.dump(2);
}

std::string DivergenceReport::to_csv() const {
  std::ostringstream os;
  os << "k,logE0,logF_t";
  for (const auto& r : initial_rows) os << ",initial_r" << r.weight_radius;
  for (const auto& r : final_rows) os << ",final_R" << r.weight_radius;
  os << "\n";
  for (std::size_t i = 0; i < modes.size(); ++i) {
    os << modes[i].k << "," << modes[i].logE0.to_string() << ","
       << modes[i].logF_eval.to_string();
    for (const auto& r : initial_rows) os << "," << r.terms[i].to_string();
    for (const auto& r : final_rows) os << "," << r.terms[i].to_string();
    os << "\n";
  }
  return os.str();
}

}  // namespace hypdamp
