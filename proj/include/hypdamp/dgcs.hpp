#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypdamp/coefficients.hpp"
#include "hypdamp/ext_real.hpp"
#include "hypdamp/spaces.hpp"

namespace hypdamp {

// Inputs for the derivative-loss construction: a subcritical exponent, a
// modulus rough enough that omega(e)/e^(1-2s) diverges, weight functions
// growing strictly slower than x omega(1/x), and a candidate eigenvalue pool.
struct DgcsInputs {
  double sigma = 0.25;      // in [0, 1/2)
  double delta = 1.0;       // > 0
  ContinuityModulus omega = ContinuityModulus::hoelder(0.25, 1.0);
  WeightFunction phi = WeightFunction::power(0.625);
  WeightFunction psi = WeightFunction::power(0.625);
  SpectralSequence base = SpectralSequence::geometric(2.0, 2.0, 1ull << 40);
  int k_max = 8;            // certified modes wanted
  double t_eval = 0.1;      // default divergence evaluation time
};

// Typed rejection for inputs or pools that cannot produce a construction.
class DgcsRejection : public std::runtime_error {
 public:
  DgcsRejection(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// One audited inequality; margin is oriented so that >= 0 passes.
struct LedgerEntry {
  std::string name;
  int k = 0;
  ExtReal lhs;
  ExtReal rhs;
  ExtReal margin;
  double rel_margin = 0.0;  // margin / max(|lhs|, |rhs|, 1)
  bool pass = false;
};

LedgerEntry ledger_check_le(std::string name, int k, const ExtReal& lhs, const ExtReal& rhs);
LedgerEntry ledger_check_ge(std::string name, int k, const ExtReal& lhs, const ExtReal& rhs);

struct DgcsSelection {
  std::vector<double> log_lambda;        // picks, position-indexed from 0
  std::vector<std::uint64_t> pool_index;
  int k0 = -1;                           // first certified position
  bool pool_exhausted = false;
  std::vector<LedgerEntry> ledger;       // spacing inequalities for every pick
  std::vector<LedgerEntry> probes;       // non-binding certificate probes below k0
  int certified_count() const {
    return k0 < 0 ? 0 : static_cast<int>(log_lambda.size()) - k0;
  }
};

// Greedy least-admissible scan of the pool: each pick is the smallest
// element exceeding the previous one for which the five spacing
// inequalities hold; k0 is the least position from which the seven
// certificate inequalities hold through the last pick.
DgcsSelection select_subsequence(const DgcsInputs& in);

// Per-mode data derived from a selection (for certified positions).
struct DgcsModeSetup {
  int k = 0;
  double log_lambda = 0.0;
  double log_t = 0.0;    // activation start  t_k = 4 pi / lambda_k
  double log_s = 0.0;    // activation end    s_k = (pi/lambda_k) floor(2 lambda_k / lambda_{k-1})
  double log_eps = 0.0;
  ExtReal eps_lam_s;     // eps_k lambda_k s_k
  ExtReal phi_val, psi_val;
  double b_at_t = 0.0;   // envelope exponent at t_k (always tiny)
  ExtReal b_at_s;        // envelope exponent at s_k
  ExtReal log_a;         // log of the mode amplitude a_k
  ExtReal log_u1;        // log of u'_k(t_k) = log lambda_k + b_at_t
};

std::vector<DgcsModeSetup> init_modes(const DgcsInputs& in, const DgcsSelection& sel);

// Log-domain segment table.  Times are natural logs; the ramp piece starts
// at t = 0 (log_t0 is -inf there).
struct DgcsPiece {
  enum class Kind { unit_left, ramp, gamma, affine, tail };
  Kind kind = Kind::unit_left;
  int k = 0;              // owning mode for gamma/affine
  double log_t0 = 0.0;
  double log_t1 = 0.0;
  double c_start = 1.0;   // junction values (doubles; they are 1 + tiny)
  double c_end = 1.0;
  double mean = 1.0;      // exact average over the piece
};

struct DgcsConstruction {
  double sigma = 0.0, delta = 0.0;
  ContinuityModulus omega = ContinuityModulus::hoelder(0.25, 1.0);
  WeightFunction phi = WeightFunction::power(1.0);
  WeightFunction psi = WeightFunction::power(1.0);
  DgcsSelection selection;
  std::vector<DgcsModeSetup> modes;
  std::vector<DgcsPiece> pieces;        // ascending in time
  Coefficient coefficient = Coefficient::constant(1.0);  // double-range view
  std::vector<LedgerEntry> ledger;      // selection + certificate + assembly
  bool all_ledger_pass() const;
  const DgcsModeSetup& mode(int k) const;
  std::string to_json_string() const;
};

// Builds pieces, the materialized coefficient, mode data and the full
// inequality ledger from a selection.
DgcsConstruction build_construction(const DgcsInputs& in, const DgcsSelection& sel);

// Per-mode certification: backward energy at t = 0, activation energy at
// s_k, energy at t_eval, and the bracket checks tying them to the a-priori
// two-sided envelopes.
struct ModeCertificate {
  int k = 0;
  double log_lambda = 0.0;
  ExtReal logE_t;       // at activation start
  ExtReal logE0;        // at time 0 (backward)
  ExtReal logF_s;       // at activation end
  ExtReal logF_eval;    // at t_eval
  std::vector<LedgerEntry> brackets;
  std::string method_back, method_fwd;
};

struct SeriesRow {
  double weight_radius = 0.0;            // the r or R of the row
  std::vector<ExtReal> terms;            // one per certified mode
  bool monotone_tail = false;            // over the last `tail` modes
};

struct DivergenceReport {
  double t_eval = 0.0;
  int monotone_tail = 3;
  std::vector<ModeCertificate> modes;
  std::vector<SeriesRow> initial_rows;   // log(a_k^2 E_k(0)) + 2 r phi(lambda_k), decreasing
  std::vector<SeriesRow> final_rows;     // log(a_k^2 F_k(t)) - 2 R psi(lambda_k), increasing
  std::vector<std::string> defects;
  bool certified() const;
  std::string to_json_string() const;
  std::string to_csv() const;
};

DivergenceReport propagate_and_certify(const DgcsConstruction& cons, double t_eval,
                                       const std::vector<double>& R_grid,
                                       const std::vector<double>& r_grid,
                                       int monotone_tail = 3, int jobs = 0);

}  // namespace hypdamp
