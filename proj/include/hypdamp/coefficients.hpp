#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypdamp/spaces.hpp"

namespace hypdamp {

// One piece of a piecewise-analytic propagation-speed coefficient.
// Tags: constant value; affine value0 + slope*(t-t0); gamma is the resonant
// oscillation 1 + delta^2 lambda^(4 sigma - 2)
//         - 16 eps^2 sin^4(lambda t) - 8 eps sin(2 lambda t).
struct Segment {
  enum class Tag { constant, affine, gamma };
  Tag tag = Tag::constant;
  double t0 = 0.0;
  double t1 = 0.0;  // +inf allowed on the last piece
  // constant: p0 = value
  // affine:   p0 = value at t0, p1 = slope
  // gamma:    p0 = eps, p1 = lambda, p2 = delta, p3 = sigma
  double p0 = 0, p1 = 0, p2 = 0, p3 = 0;

  double eval(double t) const;
  double integral(double a, double b) const;  // closed form, [a,b] inside [t0,t1]
  double min_value() const;                   // range bound over the piece
  double max_value() const;
};

double gamma_mean_level(double eps, double lambda, double delta, double sigma);

// Time-dependent propagation speed c(t) with declared bounds and optional
// declared continuity modulus.  Evaluation left of the covered range uses
// the left endpoint value (constant extension).
class Coefficient {
 public:
  enum class Kind { constant, piecewise, sampled, hoelder_synthetic };

  static Coefficient constant(double c0);
  static Coefficient piecewise(std::vector<Segment> segments, double mu1, double mu2,
                               std::optional<ContinuityModulus> modulus = std::nullopt);
  static Coefficient sampled(std::vector<double> t, std::vector<double> c);

  double operator()(double t) const;
  // Exact for constant/affine/gamma segments and sampled tables; adaptive
  // Simpson (abs tol 1e-12) otherwise.
  double integral(double a, double b) const;

  Kind kind() const { return kind_; }
  double mu1() const { return mu1_; }
  double mu2() const { return mu2_; }
  const std::optional<ContinuityModulus>& modulus() const { return modulus_; }
  void set_modulus(ContinuityModulus m) { modulus_ = std::move(m); }

  const std::vector<Segment>& segments() const { return segments_; }
  // Segment boundaries falling strictly inside (a, b).
  std::vector<double> breakpoints(double a, double b) const;
  const Segment* segment_at(double t) const;

  // Evaluation on a dense grid must stay within [mu1 - tol, mu2 + tol].
  bool audit_bounds(std::size_t grid_points, double a, double b, double tol = 1e-9) const;

  std::string to_json_string() const;
  static Coefficient from_json_string(const std::string& s);
  std::string to_csv(double a, double b, std::size_t points) const;  // two-column (t, c)

 private:
  friend Coefficient synthesize_hoelder(double, double, std::uint64_t, double);
  Kind kind_ = Kind::constant;
  double mu1_ = 0, mu2_ = 0;
  std::optional<ContinuityModulus> modulus_;
  std::vector<Segment> segments_;        // piecewise
  std::vector<double> ts_, cs_;          // sampled
  struct LacunaryTerm { double amp, freq, phase; };
  std::vector<LacunaryTerm> terms_;      // hoelder_synthetic, around level 1
  double hoelder_alpha_ = 0, hoelder_M_ = 0, hoelder_base_freq_ = 0;
  std::uint64_t hoelder_seed_ = 0;
};

// Forward moving average c_eps(t) = (1/eps) int_t^{t+eps} c, with the exact
// difference-quotient derivative (c(t+eps) - c(t)) / eps.
class RegularizedCoefficient {
 public:
  RegularizedCoefficient(Coefficient base, double eps);
  double operator()(double t) const;
  double derivative(double t) const;
  double eps() const { return eps_; }
  const Coefficient& base() const { return *base_; }

 private:
  std::shared_ptr<const Coefficient> base_;
  double eps_;
};

RegularizedCoefficient regularize(const Coefficient& c, double eps);

// Lacunary cosine series around 1:
//   c(t) = 1 + M * normalizer * sum_j 2^(-j alpha) cos(2^j b t + phase_j),
// truncated where terms drop below 1e-14, normalized so the total spread is
// exactly M.  Declared modulus is M' x^alpha with M' from geometric-series
// bounding of the increments.
Coefficient synthesize_hoelder(double alpha, double M, std::uint64_t seed,
                               double base_frequency);

// Measured hyperbolicity class on a grid.
struct HyperbolicityClass {
  enum class Kind { strict, degenerate, none } kind;
  double mu1 = 0, mu2 = 0;  // measured inf/sup
};
HyperbolicityClass hyperbolicity_class(const Coefficient& c, const std::vector<double>& grid,
                                       double degenerate_tol = 1e-12);

}  // namespace hypdamp
