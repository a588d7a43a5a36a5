#pragma once

#include "blenderlab/fiber_map.hpp"
#include "blenderlab/region.hpp"

#include <algorithm>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace blenderlab {

// Symbols xi_lo..xi_hi (normally lo = -N, hi = N), each in 1..d.
class Word {
 public:
  Word() = default;
  Word(int half_window, std::vector<int> symbols);
  Word(int lo, int hi, std::vector<int> symbols);
  static Word constant(int half_window, int symbol);

  int lo() const { return lo_; }
  int hi() const { return hi_; }
  // largest N with [-N, N] inside the window
  int half_window() const { return std::min(hi_, -lo_); }
  int at(int i) const;  // WindowError outside the window
  void set(int i, int symbol);
  bool covers(int lo, int hi) const { return lo >= lo_ && hi <= hi_; }
  // tau^k: (shifted)_i = xi_{i+k}; the window moves with it, nothing is invented
  Word shifted(int k) const;
  const std::vector<int>& symbols() const { return s_; }
  bool same_window(const Word& o) const { return lo_ == o.lo_ && hi_ == o.hi_; }

 private:
  int lo_ = 0;
  int hi_ = 0;
  std::vector<int> s_;
};

struct MetricValue {
  double value = 0.0;
  bool bound_only = false;
};

MetricValue sequence_metric(const Word& xi, const Word& zeta, double nu);

// Skew-product whose fiber map at xi may depend on several symbols.
class SkewSystem {
 public:
  virtual ~SkewSystem() = default;
  virtual int dimension() const = 0;
  virtual int alphabet() const = 0;
  virtual double nu() const = 0;
  virtual double alpha() const = 0;
  // fiber map phi_{tau^k xi}
  virtual FiberMap fiber(const Word& w, int k) const = 0;
  // symbols of tau^k xi read by fiber(): indices k - past .. k + future
  virtual int past() const = 0;
  virtual int future() const = 0;
};

class OneStepSystem : public SkewSystem {
 public:
  OneStepSystem() = default;
  OneStepSystem(double nu, double alpha, std::vector<FiberMap> maps, int window = 32);

  int dimension() const override { return maps_.front().dimension(); }
  int alphabet() const override { return static_cast<int>(maps_.size()); }
  double nu() const override { return nu_; }
  double alpha() const override { return alpha_; }
  FiberMap fiber(const Word& w, int k) const override;
  int past() const override { return 0; }
  int future() const override { return 0; }

  int window() const { return window_; }
  const std::vector<FiberMap>& maps() const { return maps_; }
  const FiberMap& map(int symbol) const;  // 1-based
  const std::vector<int>& subset() const { return subset_; }
  void set_subset(std::vector<int> s);
  OneStepSystem with_maps(std::vector<FiberMap> maps) const;
  OneStepSystem with_nu(double nu) const;

  json to_json() const;
  static OneStepSystem from_json(const json& j);

 private:
  double nu_ = 0.5;
  double alpha_ = 1.0;
  std::vector<FiberMap> maps_;
  int window_ = 32;
  std::vector<int> subset_;
};

// phi^n_xi(x) for n > 0, (phi^{-n}_{tau^n xi})^{-1}(x) for n < 0.
Vec iterate(const SkewSystem& sys, const Word& w, const Vec& x, int n);

struct HyperbolicityReport {
  double gamma = 0.0;          // smallest fiber contraction
  double gamma_hat = 0.0;      // inverse of the largest fiber expansion
  double gamma_hat_inv = 0.0;
  double nu_alpha = 0.0;
  bool partially_hyperbolic = false;
  bool fiber_bunched = false;
  bool exact = false;          // true when every map is affine
  std::size_t samples = 0;     // sample budget actually used for non-affine maps
  json to_json() const;
};

HyperbolicityReport hyperbolicity_constants(const OneStepSystem& sys, const Region& r, int samples,
                                            std::uint64_t seed = 0);
HyperbolicityReport hyperbolicity_flags(double gamma, double gamma_hat_inv, double nu, double alpha);

struct FixedPoint {
  Vec point;
  std::vector<std::complex<double>> eigenvalues;
  int s_index = 0;
  bool hyperbolic = false;
};

// Affine maps are solved exactly; other maps need a seed for Newton's method.
std::optional<FixedPoint> hyperbolic_fixed_point(const FiberMap& phi, const std::optional<Vec>& seed = std::nullopt);

struct HolonomyResult {
  Vec point;
  double error_bound = 0.0;
};

// Holder constant of the fiber dependence on the past, estimated over random pairs with xi_0 = zeta_0.
double holder_constant(const SkewSystem& sys, const Vec& x, int pairs, int half_window, std::uint64_t seed);

HolonomyResult strong_stable_holonomy(const SkewSystem& sys, const Word& xi, const Word& zeta, const Vec& x,
                                      int depth, double holder = -1.0, double gamma = 1.0);

// Fiber translation t(xi) = a_{xi_0} + sum_{k=1..memory} nu^{alpha k} b_{xi_{-k}}: not one-step.
class PastDependentTranslations : public SkewSystem {
 public:
  PastDependentTranslations(double nu, double alpha, std::vector<Vec> a, std::vector<Vec> b, int memory);
  int dimension() const override { return static_cast<int>(a_.front().size()); }
  int alphabet() const override { return static_cast<int>(a_.size()); }
  double nu() const override { return nu_; }
  double alpha() const override { return alpha_; }
  FiberMap fiber(const Word& w, int k) const override;
  int past() const override { return memory_; }
  int future() const override { return 0; }

 private:
  double nu_, alpha_;
  std::vector<Vec> a_, b_;
  int memory_;
};

// Post-composes every map with a bump translation by a seeded vector of norm eta; the
// bump is a pure translation on `domain` and on the images of `domain`.
OneStepSystem perturb_system(const OneStepSystem& sys, double eta, std::uint64_t seed, bool symplectic,
                             const Region& domain);

}  // namespace blenderlab
