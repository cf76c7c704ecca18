#include "hypdamp/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace hypdamp {

using nlohmann::json;

double LinearTable::operator()(double t) const {
  if (x.empty()) throw std::invalid_argument("LinearTable: empty table");
  if (t <= x.front()) return y.front();
  if (t >= x.back()) return y.back();
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t i = static_cast<std::size_t>(it - x.begin());
  double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + w * (y[i] - y[i - 1]);
}

ContinuityModulus ContinuityModulus::hoelder(double alpha, double M) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("hoelder: alpha in (0,1)");
  if (!(M > 0.0)) throw std::invalid_argument("hoelder: M > 0");
  ContinuityModulus m;
  m.kind_ = Kind::hoelder;
  m.alpha_ = alpha;
  m.M_ = M;
  return m;
}

ContinuityModulus ContinuityModulus::lipschitz(double L) {
  if (!(L > 0.0)) throw std::invalid_argument("lipschitz: L > 0");
  ContinuityModulus m;
  m.kind_ = Kind::lipschitz;
  m.alpha_ = 1.0;
  m.M_ = L;
  return m;
}

ContinuityModulus ContinuityModulus::log_type(double M) {
  if (!(M > 0.0)) throw std::invalid_argument("log_type: M > 0");
  ContinuityModulus m;
  m.kind_ = Kind::log_type;
  m.alpha_ = 1.0;
  m.M_ = M;
  return m;
}

ContinuityModulus ContinuityModulus::tabulated(LinearTable table) {
  if (table.x.size() < 2 || table.x.size() != table.y.size())
    throw std::invalid_argument("tabulated modulus: need >= 2 (x,y) rows");
  ContinuityModulus m;
  m.kind_ = Kind::tabulated;
  m.table_ = std::move(table);
  return m;
}

double ContinuityModulus::operator()(double x) const {
  if (x < 0) throw std::domain_error("modulus argument must be >= 0");
  switch (kind_) {
    case Kind::hoelder:
      return M_ * std::pow(x, alpha_);
    case Kind::lipschitz:
      return M_ * x;
    case Kind::log_type:
      return x == 0 ? 0.0 : M_ * x * (1.0 + std::max(0.0, -std::log(x)));
    case Kind::tabulated:
      return table_(x);
  }
  return 0;
}

double ContinuityModulus::log_eval_of_log(double lx) const {
  switch (kind_) {
    case Kind::hoelder:
      return std::log(M_) + alpha_ * lx;
    case Kind::lipschitz:
      return std::log(M_) + lx;
    case Kind::log_type:
      return std::log(M_) + lx + std::log1p(std::max(0.0, -lx));
    case Kind::tabulated:
      throw std::domain_error("tabulated modulus has no log-domain evaluation");
  }
  return 0;
}

std::string ContinuityModulus::to_json_string() const {
  json j;
  switch (kind_) {
    case Kind::hoelder:
      j = {{"kind", "hoelder"}, {"alpha", alpha_}, {"M", M_}};
      break;
    case Kind::lipschitz:
      j = {{"kind", "lipschitz"}, {"L", M_}};
      break;
    case Kind::log_type:
      j = {{"kind", "log"}, {"M", M_}};
      break;
    case Kind::tabulated:
      j = {{"kind", "tabulated"}, {"x", table_.x}, {"y", table_.y}};
      break;
  }
  return j.dump();
}

ContinuityModulus ContinuityModulus::from_json_string(const std::string& s) {
  json j = json::parse(s);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "hoelder") return hoelder(j.at("alpha").get<double>(), j.at("M").get<double>());
  if (kind == "lipschitz") return lipschitz(j.at("L").get<double>());
  if (kind == "log") return log_type(j.value("M", 1.0));
  if (kind == "tabulated") {
    LinearTable t;
    t.x = j.at("x").get<std::vector<double>>();
    t.y = j.at("y").get<std::vector<double>>();
    return tabulated(std::move(t));
  }
  throw std::invalid_argument("unknown modulus kind: " + kind);
}

WeightFunction WeightFunction::power(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("weight power: p > 0");
  WeightFunction w;
  w.kind_ = Kind::power;
  w.p_ = p;
  return w;
}

WeightFunction WeightFunction::tabulated(LinearTable table) {
  if (table.x.size() < 2 || table.x.size() != table.y.size())
    throw std::invalid_argument("tabulated weight: need >= 2 (x,y) rows");
  WeightFunction w;
  w.kind_ = Kind::tabulated;
  w.table_ = std::move(table);
  return w;
}

double WeightFunction::operator()(double x) const {
  if (!(x > 0)) throw std::domain_error("weight argument must be > 0");
  return kind_ == Kind::power ? std::pow(x, p_) : table_(x);
}

double WeightFunction::log_eval_of_log(double lx) const {
  if (kind_ != Kind::power)
    throw std::domain_error("tabulated weight has no log-domain evaluation");
  return p_ * lx;
}

std::string WeightFunction::to_json_string() const {
  json j;
  if (kind_ == Kind::power)
    j = {{"kind", "power"}, {"p", p_}};
  else
    j = {{"kind", "tabulated"}, {"x", table_.x}, {"y", table_.y}};
  return j.dump();
}

WeightFunction WeightFunction::from_json_string(const std::string& s) {
  json j = json::parse(s);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "power") return power(j.at("p").get<double>());
  if (kind == "tabulated") {
    LinearTable t;
    t.x = j.at("x").get<std::vector<double>>();
    t.y = j.at("y").get<std::vector<double>>();
    return tabulated(std::move(t));
  }
  throw std::invalid_argument("unknown weight kind: " + kind);
}

SpectralSequence SpectralSequence::from_values(std::vector<double> lambdas) {
  SpectralSequence s;
  s.geometric_ = false;
  s.log_values_.reserve(lambdas.size());
  double prev = 0.0;
  for (double l : lambdas) {
    if (!(l > 0.0)) throw std::invalid_argument("spectral sequence entries must be > 0");
    if (!(l > prev)) throw std::invalid_argument("spectral sequence must be strictly increasing");
    prev = l;
    s.log_values_.push_back(std::log(l));
  }
  s.count_ = s.log_values_.size();
  return s;
}

SpectralSequence SpectralSequence::geometric(double lambda0, double ratio, std::uint64_t count) {
  if (!(lambda0 > 0.0) || !(ratio > 1.0) || count == 0)
    throw std::invalid_argument("geometric spectrum: lambda0 > 0, ratio > 1, count > 0");
  SpectralSequence s;
  s.geometric_ = true;
  s.log_lambda0_ = std::log(lambda0);
  s.log_ratio_ = std::log(ratio);
  s.count_ = count;
  return s;
}

std::uint64_t SpectralSequence::size() const { return count_; }

double SpectralSequence::log_lambda(std::uint64_t i) const {
  if (i >= count_) throw std::out_of_range("spectral sequence index");
  if (geometric_) return log_lambda0_ + static_cast<double>(i) * log_ratio_;
  return log_values_[i];
}

double SpectralSequence::lambda(std::uint64_t i) const {
  double ll = log_lambda(i);
  return ll > 709.0 ? std::numeric_limits<double>::infinity() : std::exp(ll);
}

std::string SpectralSequence::to_json_string() const {
  json j;
  if (geometric_) {
    j = {{"kind", "geometric"},
         {"lambda0", std::exp(log_lambda0_)},
         {"ratio", std::exp(log_ratio_)},
         {"count", count_}};
  } else {
    std::vector<double> vals;
    vals.reserve(log_values_.size());
    for (double l : log_values_) vals.push_back(std::exp(l));
    j = {{"kind", "explicit"}, {"values", vals}};
  }
  return j.dump();
}

SpectralSequence SpectralSequence::from_json_string(const std::string& s) {
  json j = json::parse(s);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "geometric")
    return geometric(j.at("lambda0").get<double>(), j.at("ratio").get<double>(),
                     j.at("count").get<std::uint64_t>());
  if (kind == "explicit") return from_values(j.at("values").get<std::vector<double>>());
  throw std::invalid_argument("unknown spectrum kind: " + kind);
}

NormValue norm_squared(const ModeVector& v, const WeightedNorm& n) {
  if (n.radius < 0) throw std::invalid_argument("norm radius must be >= 0");
  // Streaming log-sum-exp over log terms
  //   4 alpha log(1+lambda) + 2 log|u| +- 2 radius weight(lambda).
  double max_log = -std::numeric_limits<double>::infinity();
  double acc = 0.0;  // sum of exp(term - max_log)
  for (const auto& [lambda, u] : v.components) {
    if (!(lambda > 0)) throw std::invalid_argument("mode frequency must be > 0");
    if (u == 0.0) continue;
    double term = 4.0 * n.alpha * std::log1p(lambda) + 2.0 * std::log(std::fabs(u));
    if (n.sign != NormSign::sobolev && n.radius != 0.0)
      term += 2.0 * n.radius * n.weight(lambda) * (n.sign == NormSign::gevrey ? 1.0 : -1.0);
    if (term > max_log) {
      acc = acc * std::exp(max_log - term) + 1.0;
      max_log = term;
    } else {
      acc += std::exp(term - max_log);
    }
  }
  NormValue out;
  if (acc == 0.0) return out;  // empty sum
  out.max_log_term = max_log;
  out.log_value = max_log + std::log(acc);
  out.overflow = out.log_value > std::log(std::numeric_limits<double>::max());
  return out;
}

std::vector<double> default_modulus_grid() {
  constexpr std::size_t n = 10000;
  std::vector<double> g(n);
  double l0 = std::log(1e-8), l1 = std::log(1e2);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (n - 1));
  return g;
}

ModulusAudit check_modulus(const ContinuityModulus& omega, const std::vector<double>& grid) {
  if (grid.size() < 2) throw std::invalid_argument("check_modulus: grid needs >= 2 points");
  ModulusAudit audit;
  double prev_x = grid.front();
  double prev_w = omega(prev_x);
  if (!(prev_w > 0)) audit.violations.push_back({0.0, prev_x, ModulusViolation::Which::omega_decreasing});
  for (std::size_t i = 1; i < grid.size(); ++i) {
    double x = grid[i];
    if (!(x > prev_x)) throw std::invalid_argument("check_modulus: grid must be increasing");
    double w = omega(x);
    // Tolerate one part in 1e12 of rounding slack.
    double tol = 1e-12 * std::max(w, prev_w);
    if (w < prev_w - tol)
      audit.violations.push_back({prev_x, x, ModulusViolation::Which::omega_decreasing});
    if (x / w < prev_x / prev_w - 1e-12 * prev_x / prev_w)
      audit.violations.push_back({prev_x, x, ModulusViolation::Which::ratio_decreasing});
    prev_x = x;
    prev_w = w;
  }
  audit.points_checked = grid.size();
  return audit;
}

OmegaAuditReport omega_continuity_audit(const std::function<double(double)>& c, double a,
                                        double b, const ContinuityModulus& omega,
                                        std::size_t pairs, std::uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("omega_continuity_audit: pairs >= 1");
  if (!(b > a)) throw std::invalid_argument("omega_continuity_audit: need b > a");
  OmegaAuditReport rep;
  std::size_t grid_n = std::max<std::size_t>(2, std::min<std::size_t>(pairs, 1 << 16));
  rep.resolution = (b - a) / static_cast<double>(grid_n - 1);

  auto consider = [&](double s, double t) {
    if (s == t) return;
    double gap = std::fabs(s - t);
    double w = omega(gap);
    if (!(w > 0)) return;
    double ratio = std::fabs(c(s) - c(t)) / w;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.arg_s = s;
      rep.arg_t = t;
    }
    ++rep.pairs_checked;
  };

  double prev = a;
  for (std::size_t i = 1; i < grid_n; ++i) {
    double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(grid_n - 1);
    consider(prev, t);
    prev = t;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(a, b);
  for (std::size_t i = 0; i < pairs; ++i) consider(uni(rng), uni(rng));
  return rep;
}

}  // namespace hypdamp
