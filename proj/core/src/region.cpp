#include "blenderlab/region.hpp"

#include "blenderlab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace blenderlab {

Region Region::ball(Vec center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ParamError("ball radius must be positive");
  Region r;
  r.kind_ = Kind::Ball;
  r.center_ = std::move(center);
  r.radius_ = radius;
  return r;
}

Region Region::box(Vec center, Vec half_widths) {
  if (center.size() != half_widths.size()) throw DimensionError("box center/half-width size mismatch");
  for (int i = 0; i < half_widths.size(); ++i)
    if (!(half_widths(i) > 0.0)) throw ParamError("box half-widths must be positive");
  Region r;
  r.kind_ = Kind::Box;
  r.center_ = std::move(center);
  r.half_widths_ = std::move(half_widths);
  return r;
}

Region Region::box_from_corners(const Vec& lo, const Vec& hi) {
  return box(0.5 * (lo + hi), 0.5 * (hi - lo));
}

bool Region::contains_closed(const Vec& x) const {
  if (kind_ == Kind::Ball) return (x - center_).squaredNorm() <= radius_ * radius_;
  return ((x - center_).cwiseAbs() - half_widths_).maxCoeff() <= 0.0;
}

bool Region::contains_open(const Vec& x) const {
  if (kind_ == Kind::Ball) return (x - center_).squaredNorm() < radius_ * radius_;
  return ((x - center_).cwiseAbs() - half_widths_).maxCoeff() < 0.0;
}

double Region::depth(const Vec& x) const {
  if (kind_ == Kind::Ball) return radius_ - (x - center_).norm();
  Vec excess = (x - center_).cwiseAbs() - half_widths_;
  const double worst = excess.maxCoeff();
  if (worst <= 0.0) return -worst;
  return -excess.cwiseMax(0.0).norm();
}

Vec Region::project(const Vec& x) const {
  if (kind_ == Kind::Ball) {
    Vec d = x - center_;
    const double n = d.norm();
    if (contains_closed(x)) return x;
    // rounding can leave the scaled point a few ulps outside the closed ball
    double scale = radius_ / n;
    Vec q = center_ + d * scale;
    while (!contains_closed(q)) {
      scale *= 1.0 - 1e-15;
      q = center_ + d * scale;
    }
    return q;
  }
  Vec q = x.cwiseMax(center_ - half_widths_).cwiseMin(center_ + half_widths_);
  for (int i = 0; i < q.size(); ++i)
    while (std::abs(q(i) - center_(i)) > half_widths_(i)) q(i) = std::nextafter(q(i), center_(i));
  return q;
}

double Region::circumradius() const {
  return kind_ == Kind::Ball ? radius_ : half_widths_.norm();
}

Vec Region::lower() const {
  return kind_ == Kind::Ball ? Vec(center_.array() - radius_) : Vec(center_ - half_widths_);
}

Vec Region::upper() const {
  return kind_ == Kind::Ball ? Vec(center_.array() + radius_) : Vec(center_ + half_widths_);
}

Region Region::inflated(double by) const {
  if (kind_ == Kind::Ball) return ball(center_, radius_ + by);
  return box(center_, half_widths_.array() + by);
}

json Region::to_json() const {
  if (kind_ == Kind::Ball)
    return json{{"kind", "ball"}, {"center", vec_to_json(center_)}, {"radius", radius_}};
  return json{{"kind", "box"}, {"center", vec_to_json(center_)}, {"half_widths", vec_to_json(half_widths_)}};
}

Region Region::from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ball") return ball(vec_from_json(j.at("center")), j.at("radius").get<double>());
  if (kind == "box") {
    if (j.contains("lower"))
      return box_from_corners(vec_from_json(j.at("lower")), vec_from_json(j.at("upper")));
    return box(vec_from_json(j.at("center")), vec_from_json(j.at("half_widths")));
  }
  throw ParamError("unknown region kind '" + kind + "'");
}

std::vector<Vec> make_net(const Region& r, double h) {
  if (!(h > 0.0)) throw ParamError("net spacing must be positive");
  const int c = r.dimension();
  // grid step g keeps every point within (g/2)*sqrt(c) <= h of a node
  const double g = std::min(h, 2.0 * h / std::sqrt(static_cast<double>(c)));
  const Vec lo = r.lower();
  const Vec hi = r.upper();
  std::vector<int> counts(c);
  std::vector<double> steps(c);
  for (int i = 0; i < c; ++i) {
    const double len = hi(i) - lo(i);
    counts[i] = static_cast<int>(std::ceil(len / g - 1e-12)) + 1;
    steps[i] = counts[i] > 1 ? len / (counts[i] - 1) : 0.0;
  }
  std::vector<Vec> net;
  std::vector<int> idx(c, 0);
  Vec p(c);
  while (true) {
    for (int i = 0; i < c; ++i) p(i) = lo(i) + steps[i] * idx[i];
    if (r.contains_closed(p)) {
      net.push_back(p);
    } else {
      // nearest-point projection is 1-Lipschitz and fixes the closure, so projected
      // nodes keep the covering radius
      Vec q = r.project(p);
      if ((q - p).norm() <= h) net.push_back(q);
    }
    int k = 0;
    while (k < c && ++idx[k] == counts[k]) idx[k++] = 0;
    if (k == c) break;
  }
  return net;
}

}  // namespace blenderlab
