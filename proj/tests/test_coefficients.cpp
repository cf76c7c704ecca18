#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "hypdamp/coefficients.hpp"

using namespace hypdamp;

namespace {

// Test-side quadrature oracle, independent of Coefficient::integral.
double simpson_oracle(const std::function<double(double)>& f, double a, double b, int n = 4000) {
  double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("regularize: constants are fixed points") {
  Coefficient c = Coefficient::constant(1.0);
  RegularizedCoefficient ce = regularize(c, 0.37);
  for (double t : {-1.0, 0.0, 2.5}) {
    CHECK(ce(t) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ce.derivative(t) == 0.0);
  }
}

TEST_CASE("regularize: linear coefficient shifts by eps/2") {
  // c(t) = t on [0, 10] as an affine piece.
  std::vector<Segment> segs{{Segment::Tag::affine, 0.0, 10.0, 0.0, 1.0, 0, 0}};
  Coefficient c = Coefficient::piecewise(std::move(segs), 0.0, 10.0);
  RegularizedCoefficient ce = regularize(c, 1.0);
  for (double t : {0.5, 2.0, 7.5}) {
    CHECK(ce(t) == doctest::Approx(t + 0.5).epsilon(1e-12));
    CHECK(ce.derivative(t) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("regularize sin against the quadrature oracle") {
  // Sampled sine on a fine grid; c_eps(t) = (cos t - cos(t+pi))/pi = 2 cos(t)/pi.
  std::vector<double> ts, cs;
  for (int i = 0; i <= 20000; ++i) {
    double t = -1.0 + 12.0 * i / 20000.0;
    ts.push_back(t);
    cs.push_back(std::sin(t));
  }
  Coefficient c = Coefficient::sampled(ts, cs);
  RegularizedCoefficient ce = regularize(c, M_PI);
  for (double t : {0.0, 0.7, 2.0}) {
    double oracle = simpson_oracle([](double s) { return std::sin(s); }, t, t + M_PI) / M_PI;
    CHECK(ce(t) == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(ce(t) == doctest::Approx(2.0 * std::cos(t) / M_PI).epsilon(1e-5));
  }
}

TEST_CASE("regularized coefficient honors the three moving-average bounds") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ueps(0.01, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    Coefficient c = synthesize_hoelder(0.45, 0.25, 1000 + trial, 1.3);
    const ContinuityModulus& omega = *c.modulus();
    double eps = ueps(rng);
    RegularizedCoefficient ce = regularize(c, eps);
    for (int i = 0; i <= 60; ++i) {
      double t = 3.0 * i / 60.0;
      double v = ce(t);
      CHECK(v >= c.mu1() - 1e-9);
      CHECK(v <= c.mu2() + 1e-9);
      CHECK(std::fabs(c(t) - v) <= omega(eps) * (1.0 + 1e-9));
      CHECK(std::fabs(ce.derivative(t)) <= omega(eps) / eps * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("regularize is linear in the coefficient") {
  Coefficient c1 = synthesize_hoelder(0.5, 0.2, 7, 1.0);
  Coefficient c2 = synthesize_hoelder(0.7, 0.1, 8, 1.0);
  double a = 0.6, b = 0.4, eps = 0.21;
  RegularizedCoefficient r1 = regularize(c1, eps), r2 = regularize(c2, eps);
  // Combine through a sampled view of a c1 + b c2.
  std::vector<double> ts, cs;
  for (int i = 0; i <= 40000; ++i) {
    double t = 5.0 * i / 40000.0;
    ts.push_back(t);
    cs.push_back(a * c1(t) + b * c2(t));
  }
  RegularizedCoefficient rc = regularize(Coefficient::sampled(ts, cs), eps);
  for (double t : {0.3, 1.1, 2.9})
    CHECK(rc(t) == doctest::Approx(a * r1(t) + b * r2(t)).epsilon(1e-6));
}

TEST_CASE("synthesize_hoelder basics") {
  // M = 0 collapses to the unit coefficient.
  Coefficient flat = synthesize_hoelder(0.5, 0.0, 3, 1.0);
  for (double t : {0.0, 1.0, 2.0}) CHECK(flat(t) == 1.0);

  CHECK_THROWS_AS(synthesize_hoelder(0.5, 1.0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_hoelder(1.5, 0.1, 3, 1.0), std::invalid_argument);

  // Clamp rule: declared mu1 = 1 - M.
  Coefficient c = synthesize_hoelder(0.3, 0.2, 1, 1.0);
  CHECK(c.mu1() == doctest::Approx(0.8));
  CHECK(c.mu1() >= 0.6);
  CHECK(c.audit_bounds(4001, 0.0, 10.0));
}

TEST_CASE("synthesized hoelder field passes its own modulus audit") {
  for (std::uint64_t seed : {7ull, 99ull}) {
    Coefficient c = synthesize_hoelder(0.5, 0.1, seed, 1.0);
    REQUIRE(c.modulus().has_value());
    OmegaAuditReport rep = omega_continuity_audit([&](double t) { return c(t); }, 0.0, 4.0,
                                                  *c.modulus(), 4000, seed);
    CHECK(rep.max_ratio <= 1.0);
  }
}

TEST_CASE("hyperbolicity classification") {
  std::vector<double> grid;
  for (int i = 0; i <= 2000; ++i) grid.push_back(7.0 * i / 2000.0);

  HyperbolicityClass hc = hyperbolicity_class(Coefficient::constant(1.0), grid);
  CHECK(hc.kind == HyperbolicityClass::Kind::strict);
  CHECK(hc.mu1 == doctest::Approx(1.0));
  CHECK(hc.mu2 == doctest::Approx(1.0));

  // sin^2 vanishes at t = 0: degenerate with sup 1.
  std::vector<double> ts, cs;
  for (int i = 0; i <= 20000; ++i) {
    double t = 7.0 * i / 20000.0;
    ts.push_back(t);
    cs.push_back(std::sin(t) * std::sin(t));
  }
  hc = hyperbolicity_class(Coefficient::sampled(ts, cs), grid);
  CHECK(hc.kind == HyperbolicityClass::Kind::degenerate);
  CHECK(hc.mu2 == doctest::Approx(1.0).epsilon(1e-4));

  cs.clear();
  for (auto& t : ts) cs.push_back(std::cos(t));
  hc = hyperbolicity_class(Coefficient::sampled(ts, cs), grid);
  CHECK(hc.kind == HyperbolicityClass::Kind::none);

  CHECK_THROWS_AS(hyperbolicity_class(Coefficient::constant(1.0), {}), std::invalid_argument);
}

TEST_CASE("piecewise integral matches the quadrature oracle across junctions") {
  std::vector<Segment> segs;
  segs.push_back({Segment::Tag::constant, 0.0, 1.0, 1.0, 0, 0, 0});
  segs.push_back({Segment::Tag::gamma, 1.0, 2.0, 0.1, 40.0, 1.0, 0.2});
  segs.push_back({Segment::Tag::affine, 2.0, 4.0, 0.9, 0.05, 0, 0});
  Coefficient c = Coefficient::piecewise(std::move(segs), 0.2, 1.9);
  auto f = [&](double t) { return c(t); };
  for (auto [a, b] : std::vector<std::pair<double, double>>{{0.2, 0.8}, {0.5, 1.7},
                                                            {1.2, 3.5}, {-1.0, 5.0}}) {
    CHECK(c.integral(a, b) == doctest::Approx(simpson_oracle(f, a, b, 20000)).epsilon(1e-7));
  }
  CHECK(c.integral(3.0, 1.0) == doctest::Approx(-c.integral(1.0, 3.0)));
  // Constant extension on the left.
  CHECK(c(-5.0) == doctest::Approx(1.0));
}

TEST_CASE("piecewise constructor rejects gapped tilings") {
  std::vector<Segment> segs;
  segs.push_back({Segment::Tag::constant, 0.0, 1.0, 1.0, 0, 0, 0});
  segs.push_back({Segment::Tag::constant, 1.5, 2.0, 1.0, 0, 0, 0});
  CHECK_THROWS_AS(Coefficient::piecewise(std::move(segs), 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("coefficient serialization round trips") {
  Coefficient c = synthesize_hoelder(0.4, 0.15, 11, 2.0);
  Coefficient c2 = Coefficient::from_json_string(c.to_json_string());
  for (double t : {0.1, 0.9, 3.3}) CHECK(c2(t) == doctest::Approx(c(t)).epsilon(1e-14));
  CHECK(c2.modulus()->constant() == doctest::Approx(c.modulus()->constant()));

  std::vector<Segment> segs{{Segment::Tag::gamma, 0.0, 1.0, 0.05, 30.0, 1.0, 0.25}};
  Coefficient g = Coefficient::piecewise(std::move(segs), 0.5, 1.5);
  Coefficient g2 = Coefficient::from_json_string(g.to_json_string());
  for (double t : {0.0, 0.123, 0.77}) CHECK(g2(t) == doctest::Approx(g(t)).epsilon(1e-15));

  std::string csv = g.to_csv(0.0, 1.0, 11);
  CHECK(csv.substr(0, 4) == "t,c\n");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
}
