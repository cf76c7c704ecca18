#include "doctest.h"


#include <stdexcept>
#include <cmath>
#include <random>

#include "hypdamp/spaces.hpp"

using namespace hypdamp;

TEST_CASE("norm_squared on single-mode vectors") {
  // All weights collapse at alpha = 0, r = 0.
  ModeVector v{{{1.0, 1.0}}};
  WeightedNorm n;
  CHECK(norm_squared(v, n).value() == doctest::Approx(1.0));

  // Sobolev weight (1+lambda)^(4 alpha) at alpha = 1/2: (1+1)^2 = 4.
  n.alpha = 0.5;
  CHECK(norm_squared(v, n).value() == doctest::Approx(4.0));

  // Gevrey factor exp(2 r lambda) at lambda = 2, r = 1: e^4.
  ModeVector v2{{{2.0, 1.0}}};
  WeightedNorm g{WeightFunction::power(1.0), 1.0, 0.0, NormSign::gevrey};
  CHECK(norm_squared(v2, g).value() == doctest::Approx(std::exp(4.0)).epsilon(1e-12));
}

TEST_CASE("norm_squared edge cases and overflow policy") {
  ModeVector empty;
  WeightedNorm n;
  NormValue nv = norm_squared(empty, n);
  CHECK(nv.log_value == -std::numeric_limits<double>::infinity());
  CHECK(nv.value() == 0.0);
  CHECK(!nv.overflow);

  CHECK_THROWS_AS(norm_squared(ModeVector{{{1.0, 1.0}}},
                               WeightedNorm{WeightFunction::power(1.0), -1.0, 0.0,
                                            NormSign::gevrey}),
                  std::invalid_argument);

  // Huge weights overflow the linear value but keep a finite log.
  ModeVector v{{{1000.0, 1.0}}};
  WeightedNorm g{WeightFunction::power(1.0), 1.0, 0.0, NormSign::gevrey};
  NormValue big = norm_squared(v, g);
  CHECK(big.overflow);
  CHECK(big.log_value == doctest::Approx(2000.0));
  CHECK(std::isinf(big.value()));
}

TEST_CASE("log-safe accumulation agrees with naive summation in range") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ulam(0.5, 50.0);
  std::normal_distribution<double> uval(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    ModeVector v;
    double lam = 0;
    for (int k = 0; k < 30; ++k) {
      lam += ulam(rng);
      v.components.push_back({lam, uval(rng)});
    }
    WeightedNorm n{WeightFunction::power(0.5), 0.3, 0.25,
                   trial % 2 ? NormSign::gevrey : NormSign::ultra};
    double naive = 0.0;
    for (auto& [l, u] : v.components)
      naive += std::pow(1.0 + l, 4.0 * n.alpha) * u * u *
               std::exp(2.0 * n.radius * std::sqrt(l) * (trial % 2 ? 1.0 : -1.0));
    CHECK(norm_squared(v, n).value() == doctest::Approx(naive).epsilon(1e-12));
  }
}

TEST_CASE("norm monotone in radius: gevrey grows, ultra shrinks") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> uval(0.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    ModeVector v;
    for (int k = 1; k <= 12; ++k) v.components.push_back({std::pow(2.0, k), uval(rng)});
    WeightFunction w = WeightFunction::power(0.7);
    double prev_g = -1, prev_u = std::numeric_limits<double>::infinity();
    for (double r : {0.0, 0.01, 0.05, 0.1}) {
      double g = norm_squared(v, {w, r, 0.0, NormSign::gevrey}).log_value;
      double u = norm_squared(v, {w, r, 0.0, NormSign::ultra}).log_value;
      if (r > 0) {
        CHECK(g > prev_g);
        CHECK(u < prev_u);
      }
      prev_g = g;
      prev_u = u;
    }
  }
}

TEST_CASE("inclusion chain for power weights") {
  // Finite Gevrey norm forces finite Sobolev norm forces finite
  // ultradistribution norm; on finite vectors this shows up as ordering of
  // the values for unit data.
  ModeVector v;
  for (int k = 1; k <= 10; ++k) v.components.push_back({std::pow(2.0, k), 1e-3});
  WeightFunction w = WeightFunction::power(0.5);
  double gevrey = norm_squared(v, {w, 0.4, 0.25, NormSign::gevrey}).log_value;
  double sobolev = norm_squared(v, {w, 0.0, 0.25, NormSign::sobolev}).log_value;
  double ultra = norm_squared(v, {w, 0.4, 0.25, NormSign::ultra}).log_value;
  CHECK(gevrey >= sobolev);
  CHECK(sobolev >= ultra);
}

TEST_CASE("check_modulus accepts hoelder and rejects x^2") {
  auto grid = default_modulus_grid();
  CHECK(check_modulus(ContinuityModulus::hoelder(0.5, 1.0), grid).pass());
  CHECK(check_modulus(ContinuityModulus::lipschitz(2.0), grid).pass());
  CHECK(check_modulus(ContinuityModulus::log_type(), grid).pass());

  // x^2 has x/omega(x) = 1/x decreasing.
  LinearTable t;
  for (double x : {0.1, 0.2, 0.3, 0.4}) {
    t.x.push_back(x);
    t.y.push_back(x * x);
  }
  ModulusAudit audit = check_modulus(ContinuityModulus::tabulated(t), {0.1, 0.2, 0.3});
  CHECK(!audit.pass());
  bool found_ratio = false;
  for (auto& vio : audit.violations)
    if (vio.which == ModulusViolation::Which::ratio_decreasing) found_ratio = true;
  CHECK(found_ratio);

  CHECK_THROWS_AS(check_modulus(ContinuityModulus::lipschitz(1.0), {1.0}),
                  std::invalid_argument);
}

TEST_CASE("check_modulus flags a genuinely oscillating gauge") {
  // x (1 + sin(1/x)) + 2x: positive, but not monotone near 0; the numeric
  // audit is the oracle.
  LinearTable t;
  for (int i = 0; i < 1000; ++i) {
    double x = 0.001 + 0.999 * i / 999.0;
    t.x.push_back(x);
    t.y.push_back(x * (1.0 + std::sin(1.0 / x)) + 2.0 * x);
  }
  ModulusAudit audit = check_modulus(ContinuityModulus::tabulated(t), t.x);
  CHECK(!audit.pass());
}

TEST_CASE("omega_continuity_audit basics") {
  ContinuityModulus lin = ContinuityModulus::lipschitz(1.0);
  auto constant = [](double) { return 3.7; };
  CHECK(omega_continuity_audit(constant, 0.0, 1.0, lin, 200).max_ratio == 0.0);

  // c(t) = t against omega(x) = x attains ratio 1 exactly.
  auto ident = [](double t) { return t; };
  OmegaAuditReport rep = omega_continuity_audit(ident, 0.0, 1.0, lin, 500);
  CHECK(rep.max_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.pairs_checked > 500);

  // Deterministic for a fixed seed.
  OmegaAuditReport a = omega_continuity_audit(ident, 0.0, 1.0, lin, 100, 42);
  OmegaAuditReport b = omega_continuity_audit(ident, 0.0, 1.0, lin, 100, 42);
  CHECK(a.max_ratio == b.max_ratio);
  CHECK(a.arg_s == b.arg_s);
}

TEST_CASE("modulus and weight serialization round trips") {
  auto m = ContinuityModulus::hoelder(0.25, 2.5);
  auto m2 = ContinuityModulus::from_json_string(m.to_json_string());
  CHECK(m2(0.37) == doctest::Approx(m(0.37)));

  auto w = WeightFunction::power(0.625);
  auto w2 = WeightFunction::from_json_string(w.to_json_string());
  CHECK(w2(11.0) == doctest::Approx(w(11.0)));
  CHECK(w2.log_eval_of_log(200.0) == doctest::Approx(125.0));

  auto seq = SpectralSequence::geometric(2.0, 2.0, 1ull << 40);
  auto seq2 = SpectralSequence::from_json_string(seq.to_json_string());
  CHECK(seq2.size() == seq.size());
  CHECK(seq2.log_lambda(1000000) == doctest::Approx(seq.log_lambda(1000000)));

  auto ex = SpectralSequence::from_values({1.0, 2.0, 7.5});
  CHECK(SpectralSequence::from_json_string(ex.to_json_string()).lambda(2) ==
        doctest::Approx(7.5));
  CHECK_THROWS(SpectralSequence::from_values({2.0, 1.0}));
  CHECK_THROWS(SpectralSequence::from_values({-1.0, 1.0}));
}

TEST_CASE("log-domain modulus evaluation matches direct evaluation") {
  auto m = ContinuityModulus::hoelder(0.3, 1.7);
  for (double x : {1e-6, 1e-3, 0.5, 10.0})
    CHECK(m.log_eval_of_log(std::log(x)) == doctest::Approx(std::log(m(x))).epsilon(1e-12));
  auto lt = ContinuityModulus::log_type(0.8);
  for (double x : {1e-9, 1e-4, 0.3})
    CHECK(lt.log_eval_of_log(std::log(x)) == doctest::Approx(std::log(lt(x))).epsilon(1e-12));
}
