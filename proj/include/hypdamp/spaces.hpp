#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hypdamp/ext_real.hpp"

namespace hypdamp {

// Piecewise-linear table on sorted abscissae, used by the "tabulated"
// variants of moduli and weight functions.
struct LinearTable {
  std::vector<double> x;
  std::vector<double> y;
  double operator()(double t) const;
};

// Gauge of uniform continuity: omega(0)=0, omega>0 on (0,inf),
// omega nondecreasing and x -> x/omega(x) nondecreasing.
class ContinuityModulus {
 public:
  enum class Kind { hoelder, lipschitz, log_type, tabulated };

  static ContinuityModulus hoelder(double alpha, double M);
  static ContinuityModulus lipschitz(double L);
  // M * x * (1 + max(0, -log x)); diverges against every positive power.
  static ContinuityModulus log_type(double M = 1.0);
  static ContinuityModulus tabulated(LinearTable table);

  double operator()(double x) const;
  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double constant() const { return M_; }

  // log omega(exp(lx)), valid for arguments far outside double range.
  // Only closed-form kinds support this.
  bool supports_log_domain() const { return kind_ != Kind::tabulated; }
  double log_eval_of_log(double lx) const;

  std::string to_json_string() const;
  static ContinuityModulus from_json_string(const std::string& s);

 private:
  Kind kind_ = Kind::lipschitz;
  double alpha_ = 1.0;  // hoelder exponent (1 for lipschitz/log_type)
  double M_ = 1.0;      // multiplicative constant
  LinearTable table_;
};

// Weight phi (or psi) appearing in exp(+-2 r phi(lambda)) norm factors.
class WeightFunction {
 public:
  enum class Kind { power, tabulated };

  static WeightFunction power(double p);
  static WeightFunction tabulated(LinearTable table);

  double operator()(double x) const;
  Kind kind() const { return kind_; }
  double exponent() const { return p_; }

  bool supports_log_domain() const { return kind_ == Kind::power; }
  double log_eval_of_log(double lx) const;  // p * lx

  std::string to_json_string() const;
  static WeightFunction from_json_string(const std::string& s);

 private:
  Kind kind_ = Kind::power;
  double p_ = 1.0;
  LinearTable table_;
};

// Strictly increasing positive eigenfrequencies lambda_k (the operator has
// eigenvalues lambda_k^2).  Stored in log form so that geometric ladders can
// extend far beyond double range; explicit double lists remain exact.
class SpectralSequence {
 public:
  static SpectralSequence from_values(std::vector<double> lambdas);
  // lambda_j = lambda0 * ratio^j for j = 0..count-1, lazily indexed.
  static SpectralSequence geometric(double lambda0, double ratio, std::uint64_t count);

  std::uint64_t size() const;
  double log_lambda(std::uint64_t i) const;
  double lambda(std::uint64_t i) const;  // +inf if not representable

  bool is_geometric() const { return geometric_; }
  std::string to_json_string() const;
  static SpectralSequence from_json_string(const std::string& s);

 private:
  bool geometric_ = false;
  double log_lambda0_ = 0.0;
  double log_ratio_ = 0.0;
  std::uint64_t count_ = 0;
  std::vector<double> log_values_;  // explicit form
};

// Finite mode expansion: components (lambda_k, u_k).
struct ModeVector {
  std::vector<std::pair<double, double>> components;
};

enum class NormSign { gevrey = +1, sobolev = 0, ultra = -1 };

// (weight, radius, sobolev exponent) triple defining a sequence-space norm.
struct WeightedNorm {
  WeightFunction weight = WeightFunction::power(1.0);
  double radius = 0.0;
  double alpha = 0.0;
  NormSign sign = NormSign::sobolev;
};

// Result of a log-safe norm accumulation.  `log_value` is always finite for
// nonzero vectors (it is a log-sum-exp); `overflow` marks results whose
// linear value exceeds double range.
struct NormValue {
  double log_value = -std::numeric_limits<double>::infinity();
  double max_log_term = -std::numeric_limits<double>::infinity();
  bool overflow = false;
  double value() const {
    if (overflow) return std::numeric_limits<double>::infinity();
    return std::exp(log_value);
  }
};

// sum_k (1+lambda_k)^(4 alpha) u_k^2 exp(+-2 radius weight(lambda_k)),
// accumulated as exponentials of log terms.
NormValue norm_squared(const ModeVector& v, const WeightedNorm& n);

// Monotonicity audit of a modulus on a sorted grid.
struct ModulusViolation {
  double x_lo = 0, x_hi = 0;
  enum class Which { omega_decreasing, ratio_decreasing } which;
};
struct ModulusAudit {
  std::vector<ModulusViolation> violations;
  std::size_t points_checked = 0;
  bool pass() const { return violations.empty(); }
};
// Default grid: 10^4 log-spaced points on [1e-8, 1e2].
std::vector<double> default_modulus_grid();
ModulusAudit check_modulus(const ContinuityModulus& omega, const std::vector<double>& grid);

// Worst |c(s)-c(t)| / omega(|s-t|) over seeded random pairs in [a,b] plus
// all adjacent pairs of the sampling grid.  ratio <= 1 certifies
// omega-continuity at the sampling resolution.
struct OmegaAuditReport {
  double max_ratio = 0.0;
  double arg_s = 0.0, arg_t = 0.0;  // pair attaining the max
  double resolution = 0.0;          // spacing of the uniform grid used
  std::size_t pairs_checked = 0;
};
OmegaAuditReport omega_continuity_audit(const std::function<double(double)>& c, double a,
                                        double b, const ContinuityModulus& omega,
                                        std::size_t pairs, std::uint64_t seed = 0x9e3779b9u);

}  // namespace hypdamp
