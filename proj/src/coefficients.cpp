#include "hypdamp/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hypdamp {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  if (a == b) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Antiderivative pieces for the gamma oscillation.
double int_sin4(double lambda, double t) {
  return 0.375 * t - std::sin(2.0 * lambda * t) / (4.0 * lambda) +
         std::sin(4.0 * lambda * t) / (32.0 * lambda);
}
double int_sin2l(double lambda, double t) { return -std::cos(2.0 * lambda * t) / (2.0 * lambda); }

}  // namespace

double gamma_mean_level(double eps, double lambda, double delta, double sigma) {
  (void)eps;
  // delta^2 lambda^(4 sigma - 2) evaluated in log form; underflows to 0 for
  // very large lambda in the subcritical range, which is the exact limit.
  double shift = delta * delta * std::exp((4.0 * sigma - 2.0) * std::log(lambda));
  return 1.0 + shift;
}

double Segment::eval(double t) const {
  switch (tag) {
    case Tag::constant:
      return p0;
    case Tag::affine:
      return p0 + p1 * (t - t0);
    case Tag::gamma: {
      double eps = p0, lambda = p1, delta = p2, sigma = p3;
      double mean = gamma_mean_level(eps, lambda, delta, sigma);
      double amp = 16.0 * eps * eps + 8.0 * eps;
      if (amp < 1e-18) return mean;  // oscillation below double resolution
      double s = std::sin(lambda * t);
      double s2 = std::sin(2.0 * lambda * t);
      return mean - 16.0 * eps * eps * s * s * s * s - 8.0 * eps * s2;
    }
  }
  return 0;
}

double Segment::integral(double a, double b) const {
  switch (tag) {
    case Tag::constant:
      return p0 * (b - a);
    case Tag::affine:
      return (b - a) * (p0 + 0.5 * p1 * ((a - t0) + (b - t0)));
    case Tag::gamma: {
      double eps = p0, lambda = p1, delta = p2, sigma = p3;
      double mean = gamma_mean_level(eps, lambda, delta, sigma);
      double amp = 16.0 * eps * eps + 8.0 * eps;
      if (amp < 1e-18) return mean * (b - a);
      return mean * (b - a) -
             16.0 * eps * eps * (int_sin4(lambda, b) - int_sin4(lambda, a)) -
             8.0 * eps * (int_sin2l(lambda, b) - int_sin2l(lambda, a));
    }
  }
  return 0;
}

double Segment::min_value() const {
  switch (tag) {
    case Tag::constant:
      return p0;
    case Tag::affine:
      return std::min(p0, p0 + p1 * (t1 - t0));
    case Tag::gamma:
      return gamma_mean_level(p0, p1, p2, p3) - (16.0 * p0 * p0 + 8.0 * p0);
  }
  return 0;
}

double Segment::max_value() const {
  switch (tag) {
    case Tag::constant:
      return p0;
    case Tag::affine:
      return std::max(p0, p0 + p1 * (t1 - t0));
    case Tag::gamma:
      return gamma_mean_level(p0, p1, p2, p3) + (16.0 * p0 * p0 + 8.0 * p0);
  }
  return 0;
}

Coefficient Coefficient::constant(double c0) {
  Coefficient c;
  c.kind_ = Kind::constant;
  c.segments_ = {Segment{Segment::Tag::constant, -kInf, kInf, c0, 0, 0, 0}};
  c.mu1_ = c.mu2_ = c0;
  return c;
}

Coefficient Coefficient::piecewise(std::vector<Segment> segments, double mu1, double mu2,
                                   std::optional<ContinuityModulus> modulus) {
  if (segments.empty()) throw std::invalid_argument("piecewise coefficient: no segments");
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    double gap = segments[i + 1].t0 - segments[i].t1;
    double scale = std::max({std::fabs(segments[i].t1), std::fabs(segments[i + 1].t0), 1e-300});
    if (std::fabs(gap) > 1e-9 * scale)
      throw std::invalid_argument("piecewise coefficient: segments must tile without gaps");
    segments[i + 1].t0 = segments[i].t1;  // snap away rounding slack
  }
  Coefficient c;
  c.kind_ = Kind::piecewise;
  c.segments_ = std::move(segments);
  c.mu1_ = mu1;
  c.mu2_ = mu2;
  c.modulus_ = std::move(modulus);
  return c;
}

Coefficient Coefficient::sampled(std::vector<double> t, std::vector<double> c) {
  if (t.size() < 2 || t.size() != c.size())
    throw std::invalid_argument("sampled coefficient: need >= 2 (t,c) rows");
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    if (!(t[i + 1] > t[i])) throw std::invalid_argument("sampled coefficient: t not increasing");
  Coefficient out;
  out.kind_ = Kind::sampled;
  out.ts_ = std::move(t);
  out.cs_ = std::move(c);
  auto [mn, mx] = std::minmax_element(out.cs_.begin(), out.cs_.end());
  out.mu1_ = *mn;
  out.mu2_ = *mx;
  return out;
}

const Segment* Coefficient::segment_at(double t) const {
  if (segments_.empty()) return nullptr;
  if (t <= segments_.front().t0) return &segments_.front();
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const Segment& s) { return v < s.t1; });
  if (it == segments_.end()) return &segments_.back();
  return &*it;
}

double Coefficient::operator()(double t) const {
  switch (kind_) {
    case Kind::constant:
      return segments_.front().p0;
    case Kind::piecewise: {
      const Segment* s = segment_at(t);
      if (t <= s->t0 && std::isfinite(s->t0))
        return s->eval(s->t0);  // constant extension on the left
      if (t >= s->t1 && std::isfinite(s->t1)) return s->eval(s->t1);
      return s->eval(t);
    }
    case Kind::sampled: {
      if (t <= ts_.front()) return cs_.front();
      if (t >= ts_.back()) return cs_.back();
      auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
      std::size_t i = static_cast<std::size_t>(it - ts_.begin());
      double w = (t - ts_[i - 1]) / (ts_[i] - ts_[i - 1]);
      return cs_[i - 1] + w * (cs_[i] - cs_[i - 1]);
    }
    case Kind::hoelder_synthetic: {
      double v = 1.0;
      for (const auto& term : terms_) v += term.amp * std::cos(term.freq * t + term.phase);
      return v;
    }
  }
  return 0;
}

double Coefficient::integral(double a, double b) const {
  if (a == b) return 0.0;
  if (a > b) return -integral(b, a);
  switch (kind_) {
    case Kind::constant:
      return segments_.front().p0 * (b - a);
    case Kind::piecewise: {
      double total = 0.0;
      double lo = a;
      // Left of the covered range: constant extension.
      double first_t0 = segments_.front().t0;
      if (lo < first_t0) {
        double hi = std::min(b, first_t0);
        total += segments_.front().eval(first_t0) * (hi - lo);
        lo = hi;
      }
      for (const Segment& s : segments_) {
        if (lo >= b) break;
        if (s.t1 <= lo) continue;
        double hi = std::min(b, s.t1);
        double from = std::max(lo, s.t0);
        total += s.integral(from, hi);
        lo = hi;
      }
      if (lo < b) total += segments_.back().eval(segments_.back().t1) * (b - lo);
      return total;
    }
    case Kind::sampled: {
      // Piecewise linear, so the trapezoid rule on table nodes is exact.
      auto f = [this](double t) { return (*this)(t); };
      double total = 0.0;
      double lo = a;
      for (std::size_t i = 0; i < ts_.size() && lo < b; ++i) {
        if (ts_[i] <= lo) continue;
        double hi = std::min(b, ts_[i]);
        total += 0.5 * (f(lo) + f(hi)) * (hi - lo);
        lo = hi;
      }
      if (lo < b) total += 0.5 * (f(lo) + f(b)) * (b - lo);
      return total;
    }
    case Kind::hoelder_synthetic: {
      double total = b - a;
      for (const auto& term : terms_)
        total += term.amp / term.freq *
                 (std::sin(term.freq * b + term.phase) - std::sin(term.freq * a + term.phase));
      return total;
    }
  }
  return adaptive_simpson([this](double t) { return (*this)(t); }, a, b);
}

std::vector<double> Coefficient::breakpoints(double a, double b) const {
  std::vector<double> out;
  if (kind_ == Kind::piecewise) {
    for (const Segment& s : segments_) {
      if (s.t0 > a && s.t0 < b) out.push_back(s.t0);
      if (s.t1 > a && s.t1 < b) out.push_back(s.t1);
    }
  } else if (kind_ == Kind::sampled) {
    for (double t : ts_)
      if (t > a && t < b) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Coefficient::audit_bounds(std::size_t grid_points, double a, double b, double tol) const {
  for (std::size_t i = 0; i < grid_points; ++i) {
    double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    double v = (*this)(t);
    if (v < mu1_ - tol || v > mu2_ + tol) return false;
  }
  return true;
}

std::string Coefficient::to_json_string() const {
  json j;
  switch (kind_) {
    case Kind::constant:
      j = {{"kind", "constant"}, {"value", segments_.front().p0}};
      break;
    case Kind::piecewise: {
      json segs = json::array();
      for (const Segment& s : segments_) {
        json e;
        e["t0"] = s.t0;
        e["t1"] = s.t1;
        switch (s.tag) {
          case Segment::Tag::constant:
            e["tag"] = "constant";
            e["value"] = s.p0;
            break;
          case Segment::Tag::affine:
            e["tag"] = "affine";
            e["value0"] = s.p0;
            e["slope"] = s.p1;
            break;
          case Segment::Tag::gamma:
            e["tag"] = "gamma";
            e["eps"] = s.p0;
            e["lambda"] = s.p1;
            e["delta"] = s.p2;
            e["sigma"] = s.p3;
            break;
        }
        segs.push_back(e);
      }
      j = {{"kind", "piecewise"}, {"segments", segs}, {"mu1", mu1_}, {"mu2", mu2_}};
      break;
    }
    case Kind::sampled:
      j = {{"kind", "sampled"}, {"t", ts_}, {"c", cs_}};
      break;
    case Kind::hoelder_synthetic:
      j = {{"kind", "hoelder"},
           {"alpha", hoelder_alpha_},
           {"M", hoelder_M_},
           {"seed", hoelder_seed_},
           {"base_frequency", hoelder_base_freq_}};
      break;
  }
  if (modulus_) j["modulus"] = json::parse(modulus_->to_json_string());
  return j.dump();
}

Coefficient Coefficient::from_json_string(const std::string& str) {
  json j = json::parse(str);
  std::string kind = j.at("kind").get<std::string>();
  Coefficient out;
  if (kind == "constant") {
    out = constant(j.at("value").get<double>());
  } else if (kind == "piecewise") {
    std::vector<Segment> segs;
    for (const auto& e : j.at("segments")) {
      Segment s;
      s.t0 = e.at("t0").get<double>();
      s.t1 = e.at("t1").get<double>();
      std::string tag = e.at("tag").get<std::string>();
      if (tag == "constant") {
        s.tag = Segment::Tag::constant;
        s.p0 = e.at("value").get<double>();
      } else if (tag == "affine") {
        s.tag = Segment::Tag::affine;
        s.p0 = e.at("value0").get<double>();
        s.p1 = e.at("slope").get<double>();
      } else if (tag == "gamma") {
        s.tag = Segment::Tag::gamma;
        s.p0 = e.at("eps").get<double>();
        s.p1 = e.at("lambda").get<double>();
        s.p2 = e.at("delta").get<double>();
        s.p3 = e.at("sigma").get<double>();
      } else {
        throw std::invalid_argument("unknown segment tag: " + tag);
      }
      segs.push_back(s);
    }
    out = piecewise(std::move(segs), j.at("mu1").get<double>(), j.at("mu2").get<double>());
  } else if (kind == "sampled") {
    out = sampled(j.at("t").get<std::vector<double>>(), j.at("c").get<std::vector<double>>());
  } else if (kind == "hoelder") {
    out = synthesize_hoelder(j.at("alpha").get<double>(), j.at("M").get<double>(),
                             j.at("seed").get<std::uint64_t>(),
                             j.at("base_frequency").get<double>());
  } else {
    throw std::invalid_argument("unknown coefficient kind: " + kind);
  }
  if (j.contains("modulus"))
    out.set_modulus(ContinuityModulus::from_json_string(j.at("modulus").dump()));
  return out;
}

std::string Coefficient::to_csv(double a, double b, std::size_t points) const {
  std::ostringstream os;
  os.precision(17);
  os << "t,c\n";
  for (std::size_t i = 0; i < points; ++i) {
    double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    os << t << "," << (*this)(t) << "\n";
  }
  return os.str();
}

RegularizedCoefficient::RegularizedCoefficient(Coefficient base, double eps)
    : base_(std::make_shared<Coefficient>(std::move(base))), eps_(eps) {
  if (!(eps > 0)) throw std::invalid_argument("regularize: eps > 0 required");
}

double RegularizedCoefficient::operator()(double t) const {
  return base_->integral(t, t + eps_) / eps_;
}

double RegularizedCoefficient::derivative(double t) const {
  return ((*base_)(t + eps_) - (*base_)(t)) / eps_;
}

RegularizedCoefficient regularize(const Coefficient& c, double eps) {
  return RegularizedCoefficient(c, eps);
}

Coefficient synthesize_hoelder(double alpha, double M, std::uint64_t seed,
                               double base_frequency) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("synthesize_hoelder: alpha in (0,1)");
  if (M < 0.0) throw std::invalid_argument("synthesize_hoelder: M >= 0");
  if (M >= 1.0)
    throw std::invalid_argument("synthesize_hoelder: spread >= 1 breaks strict hyperbolicity");
  if (!(base_frequency > 0)) throw std::invalid_argument("synthesize_hoelder: base frequency > 0");
  if (M == 0.0) {
    Coefficient c = Coefficient::constant(1.0);
    c.set_modulus(ContinuityModulus::hoelder(alpha, 1e-30));
    return c;
  }

  // Geometric normalizer makes the total spread exactly M.
  double norm = 1.0 - std::exp2(-alpha);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);

  Coefficient c;
  c.kind_ = Coefficient::Kind::hoelder_synthetic;
  c.hoelder_alpha_ = alpha;
  c.hoelder_M_ = M;
  c.hoelder_seed_ = seed;
  c.hoelder_base_freq_ = base_frequency;
  for (int j = 0;; ++j) {
    double amp = M * norm * std::exp2(-j * alpha);
    if (amp < 1e-14) break;
    c.terms_.push_back({amp, std::exp2(j) * base_frequency, uni(rng)});
  }
  c.mu1_ = 1.0 - M;
  c.mu2_ = 1.0 + M;

  // Increment bound: split the series at 2^j ~ 2/(b h); the low block is
  // bounded by its derivatives, the tail by twice its amplitudes.  Both
  // blocks sum to a multiple of (b h)^alpha.
  double geom = 1.0 / (1.0 - std::exp2(alpha - 1.0)) + 1.0 / (1.0 - std::exp2(-alpha));
  double Mprime = M * norm * std::exp2(1.0 - alpha) * geom * std::pow(base_frequency, alpha);
  c.modulus_ = ContinuityModulus::hoelder(alpha, Mprime);
  return c;
}

HyperbolicityClass hyperbolicity_class(const Coefficient& c, const std::vector<double>& grid,
                                       double degenerate_tol) {
  if (grid.empty()) throw std::invalid_argument("hyperbolicity_class: empty grid");
  double lo = kInf, hi = -kInf;
  for (double t : grid) {
    double v = c(t);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  HyperbolicityClass out;
  out.mu1 = lo;
  out.mu2 = hi;
  if (lo > degenerate_tol)
    out.kind = HyperbolicityClass::Kind::strict;
  else if (lo >= -degenerate_tol)
    out.kind = HyperbolicityClass::Kind::degenerate;
  else
    out.kind = HyperbolicityClass::Kind::none;
  return out;
}

}  // namespace hypdamp
