#pragma once

#include "blenderlab/errors.hpp"
#include "blenderlab/linalg.hpp"

#include <random>
#include <vector>

namespace testutil {

using blenderlab::Mat;
using blenderlab::Vec;

inline Vec uniform_in_box(std::mt19937_64& rng, const Vec& lo, const Vec& hi) {
  Vec x(lo.size());
  for (int i = 0; i < lo.size(); ++i) x(i) = std::uniform_real_distribution<double>(lo(i), hi(i))(rng);
  return x;
}

// uniform in the closed ball
inline Vec uniform_in_ball(std::mt19937_64& rng, const Vec& center, double radius) {
  const int c = static_cast<int>(center.size());
  std::normal_distribution<double> g;
  Vec d(c);
  for (int i = 0; i < c; ++i) d(i) = g(rng);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return center + radius * std::pow(u, 1.0 / c) * d.normalized();
}

inline Vec unit(int c, int i) {
  Vec v = Vec::Zero(c);
  v(i) = 1.0;
  return v;
}

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

inline Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace testutil
