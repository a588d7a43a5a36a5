#include "blenderlab/cover.hpp"

#include "blenderlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blenderlab {

json CoverCertificate::to_json() const {
  json w = json::array();
  for (const auto& p : witness_failures) w.push_back(vec_to_json(p));
  return json{{"pass", pass},
              {"margin", margin},
              {"net_spacing", net_spacing},
              {"lipschitz_bound", lipschitz_bound},
              {"witness_failures", w},
              {"failure_count", failure_count},
              {"net_size", net_size},
              {"map_count", map_count}};
}

double default_net_spacing(double margin_target, double lipschitz) {
  return margin_target / (4.0 * std::max(1.0, lipschitz));
}

namespace {
Vec preimage(const FiberMap& f, CoverDirection d, const Vec& p) {
  return d == CoverDirection::Forward ? f.apply_inverse(p) : f.apply(p);
}
}  // namespace

CoverCertificate verify_open_cover(const std::vector<FiberMap>& maps, const Region& b, CoverDirection direction,
                                   double h, const CoverOptions& opts) {
  if (!(h > 0.0)) throw ParamError("net spacing must be positive");
  if (!opts.lipschitz.empty() && opts.lipschitz.size() != maps.size())
    throw ContractError("one Lipschitz bound per map is required");
  CoverCertificate cert;
  cert.net_spacing = h;
  cert.map_count = maps.size();

  const double reach = b.circumradius();
  double lip = 0.0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    double l;
    if (!opts.lipschitz.empty())
      l = opts.lipschitz[i];
    else
      l = direction == CoverDirection::Forward ? maps[i].inverse_lipschitz_on(b.center(), reach)
                                               : maps[i].lipschitz_on(b.center(), reach);
    if (!std::isfinite(l) || l <= 0.0) throw ContractError("missing or invalid Lipschitz bound");
    lip = std::max(lip, l);
  }
  cert.lipschitz_bound = lip;

  const auto net = make_net(b, h);
  cert.net_size = net.size();
  const double gap = lip * h;
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& p : net) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& f : maps) {
      best = std::max(best, b.depth(preimage(f, direction, p)));
      if (best > gap && best >= margin) break;  // cannot lower the running minimum
    }
    margin = std::min(margin, best);
    if (!(best > gap)) {
      ++cert.failure_count;
      if (cert.witness_failures.size() < opts.max_witnesses) cert.witness_failures.push_back(p);
    }
  }
  if (net.empty()) margin = -std::numeric_limits<double>::infinity();
  cert.margin = margin;
  cert.pass = !maps.empty() && cert.failure_count == 0 && margin > gap;
  return cert;
}

bool in_some_open_image(const std::vector<FiberMap>& maps, const Region& b, CoverDirection direction,
                        const Vec& p) {
  for (const auto& f : maps)
    if (b.contains_open(preimage(f, direction, p))) return true;
  return false;
}

std::vector<Vec> simplex_directions(int c) {
  if (c < 1) throw ParamError("dimension must be positive");
  // vertices e_i - centroid of the standard simplex in R^{c+1}, expressed in the Helmert basis
  std::vector<Vec> dirs;
  for (int i = 0; i <= c; ++i) {
    Vec v(c);
    for (int k = 1; k <= c; ++k) {
      // h_k = (1,...,1,-k,0,...) / sqrt(k(k+1)) with k leading ones
      double comp;
      if (i < k)
        comp = 1.0;
      else if (i == k)
        comp = -static_cast<double>(k);
      else
        comp = 0.0;
      v(k - 1) = comp / std::sqrt(static_cast<double>(k) * (k + 1));
    }
    dirs.push_back(v.normalized());
  }
  return dirs;
}

double direction_set_constant(const std::vector<Vec>& dirs) {
  if (dirs.empty()) throw ParamError("empty direction set");
  const int c = static_cast<int>(dirs.front().size());
  const int m = static_cast<int>(dirs.size());
  if (c == 1) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& d : dirs) {
      lo = std::min(lo, d(0));
      hi = std::max(hi, d(0));
    }
    return std::min(hi, -lo);
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(c);
  for (int i = 0; i < c; ++i) pick[i] = i;
  while (true) {
    // hyperplane through the picked vertices: n . x = off
    Mat a(c - 1, c);
    for (int k = 1; k < c; ++k) a.row(k - 1) = (dirs[pick[k]] - dirs[pick[0]]).transpose();
    Mat ns = null_space(a, 1e-12);
    if (ns.cols() == 1) {
      Vec n = ns.col(0);
      double off = n.dot(dirs[pick[0]]);
      if (off < 0) {
        n = -n;
        off = -off;
      }
      bool facet = true;
      for (int j = 0; j < m && facet; ++j)
        if (n.dot(dirs[j]) > off + 1e-12) facet = false;
      if (facet) best = std::min(best, off);
    }
    int k = c - 1;
    while (k >= 0 && pick[k] == m - c + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int j = k + 1; j < c; ++j) pick[j] = pick[j - 1] + 1;
  }
  // origin outside the hull: some direction has no positive support
  return std::isfinite(best) ? best : 0.0;
}

CoverCertificate cover_ball_by_translates(double eps, double delta, const std::vector<Vec>& dirs, double h) {
  if (!(eps > 0.0) || !(delta > 0.0)) throw ParamError("eps and delta must be positive");
  if (dirs.empty()) throw ParamError("empty direction set");
  const int c = static_cast<int>(dirs.front().size());
  std::vector<FiberMap> maps;
  for (const auto& u : dirs) maps.push_back(FiberMap::translation(delta * u));
  return verify_open_cover(maps, Region::ball(Vec::Zero(c), eps), CoverDirection::Forward, h);
}

LatticeResult lattice_translate_centers(double target_radius, const FiberMap& image_shape, double safety,
                                        std::optional<double> h) {
  return lattice_translate_centers(target_radius, image_shape.linear_part(), safety, h);
}

LatticeResult lattice_translate_centers(double target_radius, const Mat& linear, double safety,
                                        std::optional<double> h) {
  if (!(target_radius > 0.0)) throw ParamError("target radius must be positive");
  if (!(safety > 0.0 && safety < 1.0)) throw ParamError("safety must lie in (0, 1)");
  const int c = static_cast<int>(linear.rows());
  Eigen::JacobiSVD<Mat> svd(linear, Eigen::ComputeFullU);
  const Vec sv = svd.singularValues();
  std::vector<int> contracted;
  double min_expand = std::numeric_limits<double>::infinity();
  for (int k = 0; k < c; ++k) {
    if (std::abs(sv(k) - 1.0) <= 1e-6) throw ShapeError("a singular value is indistinguishable from 1");
    if (sv(k) < 1.0)
      contracted.push_back(k);
    else
      min_expand = std::min(min_expand, sv(k));
  }
  if (contracted.empty()) throw ShapeError("no contracted direction for a contracting cover");
  const int s = static_cast<int>(contracted.size());
  // worst-case slice of the image over the expanding coordinates
  const double f = std::isfinite(min_expand) ? std::sqrt(1.0 - 1.0 / (min_expand * min_expand)) : 1.0;
  std::vector<double> axes(s);
  for (int i = 0; i < s; ++i) axes[i] = sv(contracted[i]) * target_radius * f;
  const double sp = 2.0 * safety / std::sqrt(static_cast<double>(s));

  const FiberMap shape = FiberMap::affine(linear, Vec::Zero(c));
  const Region target = Region::ball(Vec::Zero(c), target_radius);
  const double lip = shape.inverse_lipschitz();
  const double spacing = h ? *h : default_net_spacing(target_radius / 10.0, lip);

  std::vector<int> counts(s);
  for (int i = 0; i < s; ++i) {
    const double need = target_radius / axes[i] + 0.5 * (1.0 - safety);
    counts[i] = std::max(1, static_cast<int>(std::ceil((need - 1.0) / (0.5 * sp) - 1e-12)) + 1);
  }
  double amax = *std::max_element(axes.begin(), axes.end());

  LatticeResult res;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<Vec> centers;
    std::vector<int> idx(s, 0);
    while (true) {
      Vec t = Vec::Zero(c);
      for (int i = 0; i < s; ++i) {
        const double u = (idx[i] - 0.5 * (counts[i] - 1)) * sp;
        t += u * axes[i] * svd.matrixU().col(contracted[i]);
      }
      if (t.norm() < target_radius + amax) centers.push_back(t);
      int k = 0;
      while (k < s && ++idx[k] == counts[k]) idx[k++] = 0;
      if (k == s) break;
    }
    std::vector<FiberMap> maps;
    for (const auto& t : centers) maps.push_back(FiberMap::affine(linear, t));
    res.centers = centers;
    res.axis_counts = counts;
    res.spacing = sp * amax;
    res.certificate = verify_open_cover(maps, target, CoverDirection::Forward, spacing);
    if (res.certificate.pass) return res;
    for (auto& n : counts) ++n;
  }
  return res;
}

}  // namespace blenderlab
