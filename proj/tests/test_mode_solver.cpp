#include "doctest.h"

#include <cmath>
#include <random>

#include "hypdamp/logspace.hpp"
#include "hypdamp/mode_solver.hpp"

using namespace hypdamp;

namespace {

double physical_u(const ModeState& s) { return s.u_dir * std::exp(s.log_scale); }
double physical_v(const ModeState& s) { return s.v_dir * std::exp(s.log_scale); }

Coefficient gamma_coefficient(double eps, double lambda, double delta, double sigma,
                              double t1) {
  std::vector<Segment> segs{{Segment::Tag::gamma, 0.0, t1, eps, lambda, delta, sigma}};
  return Coefficient::piecewise(std::move(segs), 0.5, 1.5);
}

}  // namespace

TEST_CASE("undamped unit mode is the sine") {
  ModeParams p{1.0, 0.0, 0.0};
  Trajectory traj = integrate(p, Coefficient::constant(1.0), {0.0, 1.0}, 0.0, M_PI_2, 1e-12);
  CHECK(traj.ok);
  CHECK(physical_u(traj.final_state()) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(physical_v(traj.final_state()) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("critical damping: u(t) = t exp(-t)") {
  // sigma = 1/2, delta = 1, lambda = 1, c = 1: double root at -1.
  ModeParams p{1.0, 0.5, 1.0};
  ModeState s = closed_form_constant(p, 1.0, {0.0, 1.0}, 1.0);
  CHECK(physical_u(s) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  Trajectory traj = integrate(p, Coefficient::constant(1.0), {0.0, 1.0}, 0.0, 1.0, 1e-12);
  CHECK(physical_u(traj.final_state()) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("overdamped mode decays monotonically after the transient") {
  ModeParams p{10.0, 1.0, 1.0};  // roots -100 +- sqrt(10000 - 100)
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {0.1, 0.2, 0.5, 1.0, 2.0}) {
    ModeState s = closed_form_constant(p, 1.0, {1.0, 0.0}, t);
    double u = s.log_abs_u();
    CHECK(u < prev);
    prev = u;
  }
}

TEST_CASE("closed form vs fixed-step oracle") {
  ModeParams p{5.0, 0.75, 2.0};
  ModeState cf = closed_form_constant(p, 1.3, {1.0, 0.0}, 1.0);
  ModeState rk = oracle_integrate(p, Coefficient::constant(1.3), {1.0, 0.0}, 0.0, 1.0, 200000);
  CHECK(physical_u(rk) == doctest::Approx(physical_u(cf)).epsilon(1e-8));
  CHECK(physical_v(rk) == doctest::Approx(physical_v(cf)).epsilon(1e-8));
}

TEST_CASE("oracle contract") {
  ModeParams p{1.0, 0.0, 0.0};
  CHECK_THROWS_AS(
      oracle_integrate(p, Coefficient::constant(1.0), {0.0, 1.0}, 0.0, 1.0, 100),
      std::invalid_argument);
  // Harmonic drift at 1e5 steps over a full period.
  ModeState s =
      oracle_integrate(p, Coefficient::constant(1.0), {0.0, 1.0}, 0.0, 2.0 * M_PI, 100000);
  CHECK(physical_u(s) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  CHECK(physical_v(s) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("adaptive integrator vs oracle on a rough coefficient") {
  Coefficient c = synthesize_hoelder(0.6, 0.2, 21, 1.5);
  ModeParams p{12.0, 0.3, 0.7};
  Trajectory traj = integrate(p, c, {0.8, -0.3}, 0.0, 1.0, 1e-11);
  ModeState rk = oracle_integrate(p, c, {0.8, -0.3}, 0.0, 1.0, 400000);
  CHECK(traj.ok);
  CHECK(physical_u(traj.final_state()) == doctest::Approx(physical_u(rk)).epsilon(1e-6));
  CHECK(physical_v(traj.final_state()) == doctest::Approx(physical_v(rk)).epsilon(1e-6));
}

TEST_CASE("renormalization invariance: scaling data shifts only log_scale") {
  Coefficient c = synthesize_hoelder(0.5, 0.15, 4, 1.0);
  ModeParams p{30.0, 0.25, 1.0};
  double shift = 3.7;
  Trajectory a = integrate(p, c, {1.0, 0.2}, 0.0, 2.0, 1e-10);
  Trajectory b =
      integrate(p, c, {std::exp(shift) * 1.0, std::exp(shift) * 0.2}, 0.0, 2.0, 1e-10);
  CHECK(b.final_state().u_dir == doctest::Approx(a.final_state().u_dir).epsilon(1e-12));
  CHECK(b.final_state().v_dir == doctest::Approx(a.final_state().v_dir).epsilon(1e-12));
  CHECK(b.final_state().log_scale - a.final_state().log_scale ==
        doctest::Approx(shift).epsilon(1e-12));
}

TEST_CASE("mode state renormalization invariant") {
  ModeState s = ModeState::from_physical(0.0, 1e-210, 3e-212);
  CHECK(std::max(std::fabs(s.u_dir), std::fabs(s.v_dir)) == doctest::Approx(1.0));
  CHECK(s.log_abs_u() == doctest::Approx(std::log(1e-210)).epsilon(1e-12));
  ModeState z = ModeState::from_physical(0.0, 0.0, 0.0);
  CHECK(z.log_scale == 0.0);
  CHECK(z.log_abs_u() == -std::numeric_limits<double>::infinity());
}

TEST_CASE("energy identity along a smooth trajectory") {
  // dE/dt = -4 delta lambda^(2s) |u'|^2 - 2 lambda^2 (c - 1) u' u.
  double eps = 0.08, lambda = 15.0, delta = 0.4, sigma = 0.2;
  Coefficient c = gamma_coefficient(eps, lambda, delta, sigma, 2.0);
  ModeParams p{lambda, sigma, delta};
  IntegrateOptions opts;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) opts.sample_times.push_back(2.0 * i / n);
  Trajectory traj = integrate(p, c, {1.0, 0.0}, 0.0, 2.0, 1e-12, opts);
  REQUIRE(traj.ok);
  double a = p.damping();
  double quad = 0.0, prev_integrand = 0.0;
  bool first = true;
  double e_first = 0.0, e_last = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const ModeState& s = traj.states[i];
    double u = physical_u(s), v = physical_v(s);
    double integrand = -4.0 * a * v * v - 2.0 * lambda * lambda * (c(s.t) - 1.0) * v * u;
    double e = v * v + lambda * lambda * u * u;
    if (first) {
      e_first = e;
      first = false;
    } else {
      quad += 0.5 * (integrand + prev_integrand) * (traj.states[i].t - traj.states[i - 1].t);
    }
    prev_integrand = integrand;
    e_last = e;
  }
  CHECK(e_last - e_first == doctest::Approx(quad).epsilon(1e-5));
}

TEST_CASE("undamped growth envelope E(t) <= E(0) exp(lambda t + lambda int |c|)") {
  Coefficient c = synthesize_hoelder(0.35, 0.3, 13, 2.0);
  ModeParams p{25.0, 0.0, 0.0};
  IntegrateOptions opts;
  for (int i = 1; i <= 50; ++i) opts.sample_times.push_back(2.0 * i / 50.0);
  Trajectory traj = integrate(p, c, {0.5, 1.0}, 0.0, 2.0, 1e-10, opts);
  REQUIRE(traj.ok);
  double log_e0 = traj.energies.front().logE_classic;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    double t = traj.states[i].t;
    double bound = log_e0 + p.lambda * t + p.lambda * c.integral(0.0, t);
    CHECK(traj.energies[i].logE_classic <= bound + 1e-9);
  }
}

TEST_CASE("subcritical decay envelope matches exp(-delta lambda^(2s) t) scale") {
  ModeParams p{40.0, 0.25, 0.8};
  double a = p.damping();
  // Underdamped: energy decays like exp(-2 a t) up to bounded oscillation.
  ModeState s = closed_form_constant(p, 1.0, {1.0, 0.0}, 5.0);
  double logE = log_add(2.0 * s.log_abs_v(), 2.0 * std::log(p.lambda) + 2.0 * s.log_abs_u());
  double predicted = std::log(p.lambda * p.lambda) - 2.0 * a * 5.0;
  CHECK(logE == doctest::Approx(predicted).epsilon(0.2));
}

TEST_CASE("resonant closed form solves its own equation to 1e-9") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> ueps(0.0, 0.25), ulam(1.0, 1000.0), ut(0.0, 1.0);
  double sigma = 0.25, delta = 1.0;
  for (int i = 0; i < 1000; ++i) {
    double eps = ueps(rng), lambda = ulam(rng), t = ut(rng);
    GammaState g = closed_form_gamma(eps, lambda, delta, sigma, t);
    double dl = delta * std::pow(lambda, 2.0 * sigma);
    double drift = 2.0 * eps * lambda - dl;
    double bp = drift - 2.0 * eps * lambda * std::cos(2.0 * lambda * t);
    double bpp = 4.0 * eps * lambda * lambda * std::sin(2.0 * lambda * t);
    double sn = std::sin(lambda * t), cs = std::cos(lambda * t);
    double w = g.w_dir, wp = g.wp_dir;
    double wpp = -lambda * lambda * sn + 2.0 * lambda * bp * cs + (bpp + bp * bp) * sn;
    double gamma_t = 1.0 + delta * delta / std::pow(lambda, 2.0 - 4.0 * sigma) -
                     16.0 * eps * eps * sn * sn * sn * sn -
                     8.0 * eps * std::sin(2.0 * lambda * t);
    double residual = wpp + 2.0 * dl * wp + lambda * lambda * gamma_t * w;
    double scale =
        std::fabs(wpp) + std::fabs(2.0 * dl * wp) + std::fabs(lambda * lambda * gamma_t * w);
    CHECK(std::fabs(residual) <= 1e-9 * scale);
  }
}

TEST_CASE("resonant closed form endpoints") {
  double eps = 0.1, lambda = 37.0, delta = 0.9, sigma = 0.2;
  // b vanishes at t = 0 for all parameters.
  CHECK(closed_form_gamma(eps, lambda, delta, sigma, 0.0).b == 0.0);
  // eps = 0, delta = 0: pure sine.
  GammaState pure = closed_form_gamma(0.0, lambda, 0.0, 0.0, 0.4);
  CHECK(pure.w_dir == doctest::Approx(std::sin(lambda * 0.4)));
  CHECK(pure.b == 0.0);
  // At t_k = 4 pi / lambda the wave vanishes and |w'| = lambda e^b.
  double tk = 4.0 * M_PI / lambda;
  GammaState g = closed_form_gamma(eps, lambda, delta, sigma, tk);
  CHECK(g.w_dir == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(std::fabs(g.wp_dir) == doctest::Approx(lambda).epsilon(1e-12));
  ModeState ms = g.as_mode_state();
  CHECK(ms.log_abs_v() == doctest::Approx(std::log(lambda) + g.b).epsilon(1e-12));
}

TEST_CASE("integrator reproduces the resonant closed form") {
  double eps = 0.12, lambda = 24.0, delta = 0.6, sigma = 0.2;
  Coefficient c = gamma_coefficient(eps, lambda, delta, sigma, 3.0);
  ModeParams p{lambda, sigma, delta};
  GammaState g0 = closed_form_gamma(eps, lambda, delta, sigma, 0.3);
  double scale0 = std::exp(g0.log_scale);
  Trajectory traj =
      integrate(p, c, {g0.w_dir * scale0, g0.wp_dir * scale0}, 0.3, 2.7, 1e-12);
  REQUIRE(traj.ok);
  GammaState g1 = closed_form_gamma(eps, lambda, delta, sigma, 2.7);
  CHECK(physical_u(traj.final_state()) ==
        doctest::Approx(g1.w_dir * std::exp(g1.log_scale)).epsilon(1e-7));
  CHECK(physical_v(traj.final_state()) ==
        doctest::Approx(g1.wp_dir * std::exp(g1.log_scale)).epsilon(1e-7));
}

TEST_CASE("piecewise constant coefficients propagate by exact jumps") {
  std::vector<Segment> segs;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uc(0.0, 1.0);
  double t = 0.0;
  for (int i = 0; i < 8; ++i) {
    segs.push_back({Segment::Tag::constant, t, t + 0.25, uc(rng), 0, 0, 0});
    t += 0.25;
  }
  Coefficient c = Coefficient::piecewise(std::move(segs), 0.0, 1.0);
  ModeParams p{300.0, 0.8, 1.5};  // stiff: a = 1.5 * 300^1.6
  Trajectory traj = integrate(p, c, {1.0, 0.0}, 0.0, 2.0, 1e-10);
  CHECK(traj.ok);
  CHECK(traj.steps_accepted == 0);  // all segments jumped in closed form
  // Backward integration returns to the data.
  Trajectory back = integrate(p, c, {physical_u(traj.final_state()),
                                     physical_v(traj.final_state())},
                              2.0, 0.0, 1e-10);
  CHECK(back.ok);
  CHECK(physical_u(back.final_state()) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(physical_v(back.final_state()) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("zero data stays zero") {
  ModeParams p{5.0, 0.3, 1.0};
  Trajectory traj = integrate(p, Coefficient::constant(1.0), {0.0, 0.0}, 0.0, 1.0, 1e-10);
  CHECK(traj.ok);
  CHECK(traj.final_state().u_dir == 0.0);
  CHECK(traj.final_state().v_dir == 0.0);
  CHECK(traj.energies.back().logE_classic == -std::numeric_limits<double>::infinity());
}

TEST_CASE("trajectory csv export carries the contracted columns") {
  ModeParams p{3.0, 0.0, 0.1};
  IntegrateOptions opts;
  opts.sample_times = {0.5};
  Trajectory traj = integrate(p, Coefficient::constant(1.0), {1.0, 0.0}, 0.0, 1.0, 1e-10, opts);
  std::string csv = traj.to_csv();
  CHECK(csv.rfind("t,log_scale,u_dir,v_dir,logE_classic,logF_weighted\n", 0) == 0);
  CHECK(csv.find("\n0.5,") != std::string::npos);
}
