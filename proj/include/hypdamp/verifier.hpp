#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypdamp/mode_solver.hpp"
#include "hypdamp/spaces.hpp"

namespace hypdamp {

// Orthogonal split of a mode family at frequency nu: indices with
// lambda_k < nu and lambda_k >= nu.
struct FrequencySplit {
  double nu = 0.0;
  std::vector<std::size_t> low_modes;
  std::vector<std::size_t> high_modes;
};
FrequencySplit split_at(const std::vector<double>& lambdas, double nu);

// Per-mode action of the operator powers on a component with frequency
// lambda: A^a scales e_k by lambda^(2a).  Kept in one place so exponent
// conventions cannot drift between modules.
inline double log_mode_action(double log_lambda, double a) { return 2.0 * a * log_lambda; }
inline double mode_action(double lambda, double a) { return std::pow(lambda, 2.0 * a); }

// One checked inequality: margin = log_rhs - log_lhs (>= 0 passes; +inf when
// the left side vanishes).
struct BoundAudit {
  std::string bound_name;
  double t = 0.0;
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  double margin = 0.0;
  std::string params;  // compact parameter record for reports

  bool pass(double slack = 0.0) const { return margin >= -slack; }
};

struct LemmaAuditResult {
  std::vector<BoundAudit> audits;
  std::optional<std::string> rejection;     // violated precondition, if any
  std::optional<double> feasible_r;         // decay rate used, when found
  std::optional<std::string> decay_skipped; // why the decay audit was skipped
  bool rejected() const { return rejection.has_value(); }
  double min_margin() const;
};

// 256 log-spaced times over (0, horizon] plus t = 0.
std::vector<double> audit_sample_times(double horizon, std::size_t count = 256);

// Largest r satisfying the supercritical triple
//   delta lambda^(4s-2) > r mu2,  2 delta r <= 1,
//   4 delta^2 lambda^(4s-2) >= (1 + 2 r delta) mu2;
// nullopt when no positive r exists.
std::optional<double> supercritical_feasible_r(const ModeParams& p, double mu2);

// Largest r in (0, delta) with
//   4 (delta-r)(delta mu1 - r mu2) >= L^2 + 2 delta (1+2r) L + 8 r delta^3,
// where L = lambda^(1-2s) omega(1/lambda); found by bisection to relative
// 1e-10, resolved toward the smaller endpoint.
std::optional<double> subcritical_feasible_r(const ModeParams& p, double mu1, double mu2,
                                             double big_lambda_term);

// Supercritical single-mode audit: uniform bounds on |u| and |u'|, the
// phase-space bound for exponents with 1-s <= a-b <= s, and (when a feasible
// r exists) decay against exp(-2 r lambda^(2(1-s)) C(t)), C(t) = int_0^t c.
LemmaAuditResult verify_sup_lemma(const ModeParams& p, const Coefficient& c,
                                  std::pair<double, double> init, double horizon, double alpha,
                                  double beta, std::optional<double> r = std::nullopt,
                                  std::size_t samples = 256);

// Subcritical single-mode audit: the uniform energy bound and (when a
// feasible r exists) decay against exp(-2 r lambda^(2s) t).  The coefficient
// must carry a declared continuity modulus.
LemmaAuditResult verify_sub_lemma(const ModeParams& p, const Coefficient& c,
                                  std::pair<double, double> init, double horizon,
                                  std::optional<double> r = std::nullopt,
                                  std::size_t samples = 256);

// Low-frequency envelope: |u'|^2 + lambda^2 |u|^2 against
// E(0) exp(nu t + nu int_0^t |c|) with nu = lambda.
LemmaAuditResult verify_low_frequency(const ModeParams& p, const Coefficient& c,
                                      std::pair<double, double> init, double horizon,
                                      std::size_t samples = 256);

enum class FamilyTheorem { sup_reg, sub_reg, sup_gevrey, sub_gevrey };

struct FamilyData {
  std::vector<double> lambdas;  // strictly increasing
  std::vector<double> u0;
  std::vector<double> u1;
};

struct FamilyAuditResult {
  std::vector<BoundAudit> audits;  // one per sample time
  std::optional<std::string> rejection;
  std::optional<double> r_used;
  double bound_constant = 0.0;  // the K in front of the data norms
  FrequencySplit split;
  double min_margin() const;
};

// Aggregates per-mode audits over the high-frequency block lambda_k >= nu.
// sup_* require sigma >= 1/2 and 4 delta^2 lambda^(4s-2) >= mu2 at each high
// mode; sub_* require the modulus smallness condition at each high mode.
// Weighted norms use phi(x) = x^(2(1-s)) with radius r C(t) (sup_gevrey) and
// phi(x) = x^(2s) with radius r t (sub_gevrey).
FamilyAuditResult verify_family(FamilyTheorem theorem, const FamilyData& data,
                                const Coefficient& c, double sigma, double delta, double nu,
                                double horizon, double alpha = 0.5, double beta = 0.0,
                                std::size_t samples = 100, int jobs = 0);

}  // namespace hypdamp
