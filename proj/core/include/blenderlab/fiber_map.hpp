#pragma once

#include "blenderlab/linalg.hpp"
#include "blenderlab/region.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace blenderlab {

// Set from which a bump flow measures distance. A point core is a ball of radius 0.
struct BumpCore {
  enum class Kind { Point, Ball, Box };
  Kind kind = Kind::Point;
  Vec center;
  double radius = 0.0;
  Vec half_widths;

  static BumpCore point(Vec c);
  static BumpCore ball(Vec c, double r);
  static BumpCore box(Vec c, Vec hw);
  static BumpCore from_region(const Region& r);

  int dimension() const { return static_cast<int>(center.size()); }
  double distance(const Vec& z) const;
  // distance, unit gradient and (optionally) Hessian of the distance; only valid where distance > 0
  double distance_derivatives(const Vec& z, Vec& grad, Mat* hess) const;
  // largest |z - center| over the core
  double extent() const;
  // lower bound on the distance between two cores
  double gap_to(const BumpCore& other) const;

  json to_json() const;
  static BumpCore from_json(const json& j);
};

// Time-one map of the field X = chi(dist(z, core)) * velocity (hamiltonian == false) or of the
// compactly supported Hamiltonian chi(dist) * <J velocity, z - center> (hamiltonian == true).
// chi is 1 up to `plateau` and 0 from `outer` on.
struct BumpSpec {
  BumpCore core;
  double plateau = 0.0;
  double outer = 0.0;
  Vec velocity;
  bool hamiltonian = true;
  int steps = 0;              // 0: calibrate
  double accuracy = 1e-6;     // step doubling stops when N vs 2N differ by <= accuracy * |velocity|
  double solver_tol = 1e-13;  // Newton tolerance of each implicit midpoint step
  std::optional<double> r_inner;  // set for maps built as bump translations (serialization form)
};

namespace detail {
struct Node;
}

class FiberMap {
 public:
  enum class Kind { Affine, Bump, Composite, Glued };

  FiberMap() = default;

  static FiberMap affine(Mat linear, Vec offset);
  static FiberMap identity(int c);
  static FiberMap translation(Vec t);
  static FiberMap bump(BumpSpec spec);
  // maps[0] is applied first
  static FiberMap composite(const std::vector<FiberMap>& maps);
  // pieces must be bump maps with pairwise disjoint supports; identity elsewhere
  static FiberMap glued(const std::vector<FiberMap>& pieces);

  bool valid() const { return static_cast<bool>(node_); }
  Kind kind() const;
  int dimension() const;

  Vec apply(const Vec& x) const;
  Vec apply_inverse(const Vec& y) const;
  Mat jacobian(const Vec& x) const;
  Mat inverse_jacobian(const Vec& y) const;

  // global Lipschitz bounds of the map and of its inverse
  double lipschitz() const;
  double inverse_lipschitz() const;
  // bounds restricted to the closed ball B(center, radius)
  double lipschitz_on(const Vec& center, double radius) const;
  double inverse_lipschitz_on(const Vec& center, double radius) const;

  FiberMap inverse() const;
  // other after this
  FiberMap then(const FiberMap& other) const;

  bool is_affine() const;
  Mat linear_part() const;  // ShapeError unless affine
  Vec offset() const;

  // the bump spec of a Bump map
  const BumpSpec& bump_spec() const;
  int bump_steps() const;
  // sub-maps of a Composite or Glued map
  std::vector<FiberMap> parts() const;

  json to_json() const;
  static FiberMap from_json(const json& j);

 private:
  explicit FiberMap(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
  friend struct detail::Node;
};

// Sampled sup |f(x) - x| over the given points.
double sup_displacement(const FiberMap& f, const std::vector<Vec>& points);

// Central finite-difference Jacobian, used as an independent check of analytic Jacobians.
Mat finite_difference_jacobian(const FiberMap& f, const Vec& x, double step = 1e-6);

}  // namespace blenderlab
