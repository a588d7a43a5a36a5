#include "blenderlab/skewproduct.hpp"

#include "blenderlab/errors.hpp"
#include "blenderlab/symplectic.hpp"

#include <cmath>
#include <random>

namespace blenderlab {

// ---------------------------------------------------------------- words

Word::Word(int half_window, std::vector<int> symbols) : Word(-half_window, half_window, std::move(symbols)) {}

Word::Word(int lo, int hi, std::vector<int> symbols) : lo_(lo), hi_(hi), s_(std::move(symbols)) {
  if (hi < lo) throw ParamError("empty word window");
  if (static_cast<int>(s_.size()) != hi - lo + 1) throw ParamError("word length does not match its window");
  for (int v : s_)
    if (v < 1) throw ParamError("symbols are 1-based");
}

Word Word::constant(int half_window, int symbol) {
  return Word(half_window, std::vector<int>(2 * half_window + 1, symbol));
}

int Word::at(int i) const {
  if (i < lo_ || i > hi_) throw WindowError("symbol index " + std::to_string(i) + " outside the window");
  return s_[i - lo_];
}

void Word::set(int i, int symbol) {
  if (i < lo_ || i > hi_) throw WindowError("symbol index " + std::to_string(i) + " outside the window");
  if (symbol < 1) throw ParamError("symbols are 1-based");
  s_[i - lo_] = symbol;
}

Word Word::shifted(int k) const { return Word(lo_ - k, hi_ - k, s_); }

MetricValue sequence_metric(const Word& xi, const Word& zeta, double nu) {
  if (!xi.same_window(zeta)) throw ParamError("words have different windows");
  if (!(nu > 0.0 && nu < 1.0)) throw ParamError("nu must lie in (0, 1)");
  const int n = xi.half_window();
  for (int i = 0; i <= n; ++i)
    if (xi.at(i) != zeta.at(i) || xi.at(-i) != zeta.at(-i)) return {std::pow(nu, i), false};
  return {std::pow(nu, n + 1), true};
}

// ---------------------------------------------------------------- systems

OneStepSystem::OneStepSystem(double nu, double alpha, std::vector<FiberMap> maps, int window)
    : nu_(nu), alpha_(alpha), maps_(std::move(maps)), window_(window) {
  if (!(nu > 0.0 && nu < 1.0)) throw ParamError("nu must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParamError("alpha must lie in (0, 1]");
  if (maps_.size() < 2) throw ParamError("a one-step system needs at least two symbols");
  if (window < 1) throw ParamError("window must be positive");
  for (const auto& m : maps_)
    if (m.dimension() != maps_.front().dimension()) throw DimensionError("fiber maps differ in dimension");
  for (int i = 1; i <= static_cast<int>(maps_.size()); ++i) subset_.push_back(i);
}

FiberMap OneStepSystem::fiber(const Word& w, int k) const { return map(w.at(k)); }

const FiberMap& OneStepSystem::map(int symbol) const {
  if (symbol < 1 || symbol > static_cast<int>(maps_.size())) throw ParamError("symbol out of range");
  return maps_[symbol - 1];
}

void OneStepSystem::set_subset(std::vector<int> s) {
  for (int v : s)
    if (v < 1 || v > alphabet()) throw ParamError("subset symbol out of range");
  subset_ = std::move(s);
}

OneStepSystem OneStepSystem::with_maps(std::vector<FiberMap> maps) const {
  OneStepSystem o(nu_, alpha_, std::move(maps), window_);
  if (o.alphabet() == alphabet()) o.subset_ = subset_;
  return o;
}

OneStepSystem OneStepSystem::with_nu(double nu) const {
  OneStepSystem o = *this;
  if (!(nu > 0.0 && nu < 1.0)) throw ParamError("nu must lie in (0, 1)");
  o.nu_ = nu;
  return o;
}

json OneStepSystem::to_json() const {
  json maps = json::array();
  for (const auto& m : maps_) maps.push_back(m.to_json());
  return json{{"dimension", dimension()}, {"nu", nu_}, {"alpha", alpha_}, {"maps", maps}, {"window", window_}};
}

OneStepSystem OneStepSystem::from_json(const json& j) {
  std::vector<FiberMap> maps;
  for (const auto& m : j.at("maps")) maps.push_back(FiberMap::from_json(m));
  OneStepSystem s(j.at("nu").get<double>(), j.value("alpha", 1.0), std::move(maps), j.value("window", 32));
  if (j.contains("dimension") && j.at("dimension").get<int>() != s.dimension())
    throw DimensionError("declared dimension does not match the maps");
  return s;
}

Vec iterate(const SkewSystem& sys, const Word& w, const Vec& x, int n) {
  if (x.size() != sys.dimension()) throw DimensionError("point dimension does not match the system");
  Vec y = x;
  if (n > 0) {
    if (!w.covers(-sys.past(), n - 1 + sys.future())) throw WindowError("window too short for the iterate");
    for (int k = 0; k < n; ++k) y = sys.fiber(w, k).apply(y);
  } else if (n < 0) {
    if (!w.covers(n - sys.past(), -1 + sys.future())) throw WindowError("window too short for the iterate");
    for (int k = -1; k >= n; --k) y = sys.fiber(w, k).apply_inverse(y);
  }
  return y;
}

// ---------------------------------------------------------------- hyperbolicity

json HyperbolicityReport::to_json() const {
  return json{{"gamma", gamma},
              {"gamma_hat", gamma_hat},
              {"gamma_hat_inv", gamma_hat_inv},
              {"nu_alpha", nu_alpha},
              {"partially_hyperbolic", partially_hyperbolic},
              {"fiber_bunched", fiber_bunched},
              {"exact", exact},
              {"samples", samples}};
}

HyperbolicityReport hyperbolicity_flags(double gamma, double gamma_hat_inv, double nu, double alpha) {
  HyperbolicityReport r;
  r.gamma = gamma;
  r.gamma_hat_inv = gamma_hat_inv;
  r.gamma_hat = 1.0 / gamma_hat_inv;
  r.nu_alpha = std::pow(nu, alpha);
  r.partially_hyperbolic = r.nu_alpha < gamma && gamma <= 1.0 && 1.0 <= gamma_hat_inv && gamma_hat_inv < 1.0 / r.nu_alpha;
  r.fiber_bunched = r.nu_alpha < gamma * r.gamma_hat;
  return r;
}

HyperbolicityReport hyperbolicity_constants(const OneStepSystem& sys, const Region& r, int samples,
                                            std::uint64_t seed) {
  if (r.dimension() != sys.dimension()) throw DimensionError("region dimension does not match the system");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool exact = true;
  std::size_t used = 0;
  std::mt19937_64 rng(seed);
  const Vec a = r.lower(), b = r.upper();
  std::vector<Vec> pts;
  pts.push_back(r.center());
  const int c = sys.dimension();
  int guard = 0;
  while (static_cast<int>(pts.size()) < std::max(1, samples) && guard++ < 100 * std::max(1, samples)) {
    Vec p(c);
    for (int i = 0; i < c; ++i) p(i) = std::uniform_real_distribution<double>(a(i), b(i))(rng);
    if (r.contains_closed(p)) pts.push_back(p);
  }
  for (const auto& m : sys.maps()) {
    if (m.is_affine()) {
      Eigen::JacobiSVD<Mat> svd(m.linear_part());
      lo = std::min(lo, svd.singularValues()(c - 1));
      hi = std::max(hi, svd.singularValues()(0));
      continue;
    }
    exact = false;
    for (const auto& p : pts) {
      Eigen::JacobiSVD<Mat> svd(m.jacobian(p));
      lo = std::min(lo, svd.singularValues()(c - 1));
      hi = std::max(hi, svd.singularValues()(0));
      ++used;
    }
  }
  HyperbolicityReport rep = hyperbolicity_flags(lo, hi, sys.nu(), sys.alpha());
  rep.exact = exact;
  rep.samples = used;
  return rep;
}

std::optional<FixedPoint> hyperbolic_fixed_point(const FiberMap& phi, const std::optional<Vec>& seed) {
  const int c = phi.dimension();
  const Mat id = Mat::Identity(c, c);
  FixedPoint fp;
  Mat lin;
  if (phi.is_affine()) {
    lin = phi.linear_part();
    const Vec b = phi.offset();
    const Mat m = id - lin;
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smin = svd.singularValues()(c - 1);
    if (smin <= 1e-12 * std::max(1.0, svd.singularValues()(0))) {
      const Vec x = svd.solve(b);
      if ((m * x - b).norm() <= 1e-9 * std::max(1.0, b.norm()))
        throw NoIsolatedFixedPoint("I - linear part is singular and the fixed set is not isolated");
      return std::nullopt;
    }
    fp.point = m.fullPivLu().solve(b);
  } else {
    if (!seed) throw ParamError("non-affine fixed point search needs a seed");
    Vec x = *seed;
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
      const Vec r = phi.apply(x) - x;
      if (r.norm() <= 1e-12 * std::max(1.0, x.norm())) {
        ok = true;
        break;
      }
      x -= (phi.jacobian(x) - id).fullPivLu().solve(r);
    }
    if (!ok) return std::nullopt;
    fp.point = x;
    lin = phi.jacobian(x);
  }
  Eigen::EigenSolver<Mat> es(lin);
  fp.hyperbolic = true;
  for (int i = 0; i < c; ++i) {
    const auto ev = es.eigenvalues()(i);
    fp.eigenvalues.push_back(ev);
    const double mod = std::abs(ev);
    if (mod < 1.0) ++fp.s_index;
    if (mod >= 1.0 - 1e-9 && mod <= 1.0 + 1e-9) fp.hyperbolic = false;
  }
  return fp;
}

// ---------------------------------------------------------------- holonomy

PastDependentTranslations::PastDependentTranslations(double nu, double alpha, std::vector<Vec> a, std::vector<Vec> b,
                                                     int memory)
    : nu_(nu), alpha_(alpha), a_(std::move(a)), b_(std::move(b)), memory_(memory) {
  if (a_.size() < 2 || a_.size() != b_.size()) throw ParamError("need matching offset tables with d >= 2");
  if (memory < 1) throw ParamError("memory must be positive");
}

FiberMap PastDependentTranslations::fiber(const Word& w, int k) const {
  Vec t = a_.at(w.at(k) - 1);
  const double q = std::pow(nu_, alpha_);
  double wgt = 1.0;
  for (int j = 1; j <= memory_; ++j) {
    wgt *= q;
    t += wgt * b_.at(w.at(k - j) - 1);
  }
  return FiberMap::translation(t);
}

double holder_constant(const SkewSystem& sys, const Vec& x, int pairs, int half_window, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int d = sys.alphabet();
  std::uniform_int_distribution<int> sym(1, d);
  std::uniform_int_distribution<int> agree(1, half_window);
  double best = 0.0;
  const int width = 2 * half_window + 1;
  for (int p = 0; p < pairs; ++p) {
    std::vector<int> s(width);
    for (auto& v : s) v = sym(rng);
    Word xi(half_window, s);
    Word zeta = xi;
    const int l = agree(rng);
    for (int i = -half_window; i <= half_window; ++i)
      if (std::abs(i) >= l) zeta.set(i, sym(rng));
    const auto dist = sequence_metric(xi, zeta, sys.nu());
    if (dist.bound_only) continue;
    if (!xi.covers(-sys.past(), sys.future())) continue;
    const double num = (sys.fiber(xi, 0).apply(x) - sys.fiber(zeta, 0).apply(x)).norm();
    best = std::max(best, num / std::pow(dist.value, sys.alpha()));
  }
  return best;
}

HolonomyResult strong_stable_holonomy(const SkewSystem& sys, const Word& xi, const Word& zeta, const Vec& x,
                                      int depth, double holder, double gamma) {
  if (depth < 0) throw ParamError("depth must be non-negative");
  if (!xi.same_window(zeta)) throw ParamError("words have different windows");
  for (int i = 0; i < depth + sys.future(); ++i)
    if (xi.at(i) != zeta.at(i)) throw ParamError("zeta is not forward compatible with xi");
  HolonomyResult r;
  if (depth == 0 || sys.past() == 0) {
    // without past dependence both words apply the same fibers and the composition cancels
    r.point = x;
  } else {
    Vec y = iterate(sys, xi, x, depth);
    for (int k = depth - 1; k >= 0; --k) y = sys.fiber(zeta, k).apply_inverse(y);
    r.point = y;
  }
  const double c0 = holder >= 0.0 ? holder : holder_constant(sys, x, 10000, xi.half_window(), 0);
  const double q = std::pow(sys.nu(), sys.alpha()) / gamma;
  r.error_bound = q < 1.0 ? c0 * std::pow(q, depth + 1) / (1.0 - q) : std::numeric_limits<double>::infinity();
  if (c0 == 0.0) r.error_bound = 0.0;
  return r;
}

// ---------------------------------------------------------------- perturbation

OneStepSystem perturb_system(const OneStepSystem& sys, double eta, std::uint64_t seed, bool symplectic,
                             const Region& domain) {
  if (eta < 0.0) throw ParamError("eta must be non-negative");
  if (eta == 0.0) return sys;
  const int c = sys.dimension();
  if (symplectic && c % 2 != 0) throw DimensionError("symplectic perturbation needs an even dimension");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vec lo = domain.lower(), hi = domain.upper();
  // large enough that the domain and its images under moderately expanding maps sit in the plateau
  const double r_inner = 8.0 * domain.circumradius();
  const double r_outer = r_inner + std::max(4.0 * eta, r_inner);
  std::vector<FiberMap> out;
  for (const auto& m : sys.maps()) {
    Vec center(c), dir(c);
    for (int i = 0; i < c; ++i) center(i) = std::uniform_real_distribution<double>(lo(i), hi(i))(rng);
    do {
      for (int i = 0; i < c; ++i) dir(i) = normal(rng);
    } while (dir.norm() < 1e-12);
    const Vec v = eta * dir.normalized();
    FiberMap bump;
    if (symplectic) {
      bump = hamiltonian_bump_translation(center, r_inner, r_outer, v);
    } else {
      BumpSpec s;
      s.core = BumpCore::point(center);
      s.plateau = r_inner + eta;
      s.outer = r_outer;
      s.velocity = v;
      s.hamiltonian = false;
      s.r_inner = r_inner;
      bump = FiberMap::bump(std::move(s));
    }
    out.push_back(m.then(bump));
  }
  return sys.with_maps(std::move(out));
}

}  // namespace blenderlab
