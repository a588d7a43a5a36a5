#pragma once

#include "blenderlab/linalg.hpp"

#include <vector>

namespace blenderlab {

// Ball or axis-aligned box in R^c.
class Region {
 public:
  enum class Kind { Ball, Box };

  static Region ball(Vec center, double radius);
  static Region box(Vec center, Vec half_widths);
  static Region box_from_corners(const Vec& lo, const Vec& hi);

  Kind kind() const { return kind_; }
  int dimension() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }
  const Vec& half_widths() const { return half_widths_; }

  bool contains_closed(const Vec& x) const;
  bool contains_open(const Vec& x) const;
  // Signed distance to the complement: positive inside, negative outside.
  double depth(const Vec& x) const;
  // Nearest point of the closure.
  Vec project(const Vec& x) const;
  // Radius of the smallest ball about center() containing the region.
  double circumradius() const;
  Vec lower() const;
  Vec upper() const;

  Region inflated(double by) const;

  json to_json() const;
  static Region from_json(const json& j);

 private:
  Kind kind_ = Kind::Ball;
  Vec center_;
  double radius_ = 0.0;
  Vec half_widths_;
};

// Finite set of points of the closure of R such that every point of the closure
// lies within h of one of them.
std::vector<Vec> make_net(const Region& r, double h);

}  // namespace blenderlab
