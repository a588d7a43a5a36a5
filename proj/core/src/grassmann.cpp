#include "blenderlab/grassmann.hpp"

#include "blenderlab/errors.hpp"
#include "blenderlab/globalization.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace blenderlab {

namespace {

double condition_number(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

Vec random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v(i) = g(rng);
  } while (v.norm() < 1e-12);
  return v.normalized();
}

Vec random_point(std::mt19937_64& rng, const Region& r) {
  const int c = r.dimension();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (r.kind() == Region::Kind::Ball)
    return r.center() + r.radius() * std::pow(u(rng), 1.0 / c) * random_unit(rng, c);
  Vec x(c);
  for (int i = 0; i < c; ++i) x(i) = r.center()(i) + r.half_widths()(i) * (2.0 * u(rng) - 1.0);
  return x;
}

// Graph coordinates L with |L|_2 <= tan(r), spaced so every such L lies within h (Frobenius) of one.
std::vector<Mat> cap_net(int rows, int cols, double r, double h) {
  const double t = std::tan(r);
  const int m = rows * cols;
  const double g = std::min(h, 2.0 * h / std::sqrt(static_cast<double>(m)));
  const int n = static_cast<int>(std::ceil(t / g));
  std::vector<Mat> out;
  std::vector<int> idx(m, -n);
  while (true) {
    Mat l(rows, cols);
    for (int k = 0; k < m; ++k) l(k % rows, k / rows) = std::clamp(idx[k] * g, -t, t);
    const double nrm = spectral_norm(l);
    if (nrm <= t) {
      out.push_back(l);
    } else if (nrm <= t + h) {
      out.push_back(l * (t / nrm));
    }
    int ax = 0;
    while (ax < m && idx[ax] == n) {
      idx[ax] = -n;
      ++ax;
    }
    if (ax == m) break;
    ++idx[ax];
  }
  return out;
}

Vec vec_of(const Vec& x, const Mat& l) {
  Vec out(x.size() + l.size());
  out << x, Eigen::Map<const Vec>(l.data(), l.size());
  return out;
}

}  // namespace

PlaneFrame push_plane(const Mat& m, const PlaneFrame& e) {
  const Mat y = m * e.frame();
  if (y.cols() == 1) {
    const double n = y.norm();
    if (!(n > 1e-300)) throw RankError("plane collapses under the matrix");
    return PlaneFrame(y / n);
  }
  Eigen::JacobiSVD<Mat> svd(y);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-12 * std::max(1.0, s(0)))) throw RankError("plane collapses under the matrix");
  return PlaneFrame::span(y);
}

PointPlane LiftedMap::apply(const PointPlane& z) const {
  return {phi_.apply(z.point), push_plane(phi_.jacobian(z.point), z.plane)};
}

PointPlane LiftedMap::apply_inverse(const PointPlane& z) const {
  return {phi_.apply_inverse(z.point), push_plane(phi_.inverse_jacobian(z.point), z.plane)};
}

LiftedMap lift_map(const FiberMap& phi) { return LiftedMap(phi); }

double grassmann_distance(const PlaneFrame& e, const PlaneFrame& f) {
  if (e.ambient() != f.ambient() || e.dim() != f.dim()) throw ParamError("planes differ in dimension");
  const Mat& a = e.frame();
  const Mat& b = f.frame();
  if (a.cols() == 1) {
    const double cs = std::abs(a.col(0).dot(b.col(0)));
    const double sn = (b.col(0) - a.col(0) * a.col(0).dot(b.col(0))).norm();
    return std::atan2(sn, cs);
  }
  const Mat m = a.transpose() * b;
  const Mat resid = b - a * m;
  return std::atan2(spectral_norm(resid), smallest_singular_value(m));
}

Mat graph_coordinates(const PlaneFrame& e, const PlaneFrame& f) {
  if (e.ambient() != f.ambient() || e.dim() != f.dim()) throw ParamError("planes differ in dimension");
  const Mat comp = orthogonal_complement(e.frame());
  const Mat a = e.frame().transpose() * f.frame();
  if (!(smallest_singular_value(a) > 1e-12)) throw ShapeError("plane is not a graph over the base plane");
  return comp.transpose() * f.frame() * a.inverse();
}

PlaneFrame graph_plane(const PlaneFrame& e, const Mat& l) {
  const Mat comp = orthogonal_complement(e.frame());
  if (l.rows() != comp.cols() || l.cols() != e.dim()) throw DimensionError("graph coordinates have the wrong shape");
  return PlaneFrame::span(e.frame() + comp * l);
}

json ConeSpec::to_json() const {
  return json{{"base_frame", base.to_json()},
              {"opening", opening},
              {"type", type == ConeType::Unstable ? "uu" : "ss"},
              {"expansion", expansion}};
}

json ConeCertificate::to_json() const {
  return json{{"pass", pass},
              {"invariance_margin", invariance_margin},
              {"min_expansion", min_expansion},
              {"expansion_margin", expansion_margin},
              {"points", points},
              {"planes", planes}};
}

ConeCertificate verify_unstable_cone(const std::vector<FiberMap>& maps, const ConeSpec& cone, const Region& r,
                                     int samples, std::uint64_t seed) {
  if (!(cone.opening > 0.0)) throw ParamError("cone opening must be positive");
  if (samples < 1) throw ParamError("samples must be positive");
  const int c = cone.base.ambient();
  const int ell = cone.base.dim();
  if (ell >= c) throw ParamError("cone base must be a proper subspace");
  const Mat e = cone.base.frame();
  const Mat comp = orthogonal_complement(e);
  const double rho = cone.opening;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // boundary graph maps: signed coordinate rank-one maps plus random ones
  std::vector<Mat> boundary;
  for (int i = 0; i < c - ell; ++i)
    for (int j = 0; j < ell; ++j)
      for (double s : {-1.0, 1.0}) {
        Mat l = Mat::Zero(c - ell, ell);
        l(i, j) = s * rho;
        boundary.push_back(l);
      }
  if (c - ell > 1 || ell > 1) {
    for (int k = 0; k < samples; ++k) {
      boundary.push_back(rho * random_unit(rng, c - ell) * random_unit(rng, ell).transpose());
      Mat g(c - ell, ell);
      std::normal_distribution<double> nd;
      for (int a = 0; a < g.size(); ++a) g.data()[a] = nd(rng);
      boundary.push_back(g * (rho / spectral_norm(g)));
    }
  }

  ConeCertificate cert;
  cert.planes = boundary.size();
  double max_graph = 0.0;
  double min_exp = std::numeric_limits<double>::infinity();
  for (const auto& phi : maps) {
    const FiberMap g = cone.type == ConeType::Unstable ? phi : phi.inverse();
    std::vector<Vec> pts;
    if (g.is_affine()) {
      pts.push_back(r.center());
    } else {
      for (int tries = 0; tries < 20 * samples && static_cast<int>(pts.size()) < samples; ++tries) {
        const Vec x = random_point(rng, r);
        if (r.contains_closed(g.apply(x))) pts.push_back(x);
      }
      if (pts.empty()) pts.push_back(r.center());
    }
    for (const auto& x : pts) {
      const Mat a = g.jacobian(x);
      ++cert.points;
      for (const auto& l : boundary) {
        const Mat y = a * (e + comp * l);
        const Mat base = e.transpose() * y;
        if (!(smallest_singular_value(base) > 1e-12)) {
          max_graph = std::numeric_limits<double>::infinity();
        } else {
          max_graph = std::max(max_graph, spectral_norm(comp.transpose() * y * base.inverse()));
        }
      }
      auto ratio = [&](const Mat& l, const Vec& dir) {
        const Vec v = e * dir + comp * (l * dir);
        return (a * v).norm() / v.norm();
      };
      for (const auto& l : boundary) {
        // the boundary vector of a rank-one map rho u v^T is attained at v
        Eigen::JacobiSVD<Mat> svd(l, Eigen::ComputeFullV);
        const Vec dir = svd.matrixV().col(0);
        min_exp = std::min(min_exp, ratio(l, dir));
        for (int k = 0; k < 10; ++k) {
          const Vec d = random_unit(rng, ell);
          min_exp = std::min(min_exp, ratio(unif(rng) * l, d));
        }
      }
    }
  }
  cert.invariance_margin = rho - max_graph;
  cert.min_expansion = min_exp;
  cert.expansion_margin = min_exp - cone.expansion;
  cert.pass = !maps.empty() && cert.invariance_margin > 0.0 && cert.expansion_margin >= 0.0;
  return cert;
}

Classification check_tangency_plane_class(const PlaneFrame& e) {
  const Classification cl = classify_subspace(e);
  if (e.dim() % 2 == 0 && cl.cls != SubspaceClass::Symplectic)
    throw SubspaceClassError("an even-dimensional tangency plane must be symplectic, got " + to_string(cl.cls));
  if (e.dim() % 2 == 1 && cl.cls != SubspaceClass::Coisotropic)
    throw SubspaceClassError("an odd-dimensional tangency plane must be coisotropic, got " + to_string(cl.cls));
  return cl;
}

PlaneFrame dominant_plane(const Mat& m, int ell) {
  const int c = static_cast<int>(m.rows());
  if (m.cols() != c) throw DimensionError("matrix must be square");
  if (ell < 1 || ell >= c) throw ParamError("plane dimension out of range");
  Eigen::EigenSolver<Mat> es(m);
  const auto vals = es.eigenvalues();
  const auto vecs = es.eigenvectors();
  std::vector<int> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(vals(a)) > std::abs(vals(b)); });
  if (!(std::abs(vals(order[ell - 1])) > std::abs(vals(order[ell])) * (1.0 + 1e-9)))
    throw ParamError("no dominated splitting at this dimension");
  Mat cols(c, ell);
  for (int k = 0; k < ell; ++k) {
    if (std::abs(vals(order[k]).imag()) > 1e-12) throw ParamError("dominant eigenvalues must be real");
    cols.col(k) = vecs.col(order[k]).real();
  }
  return PlaneFrame::span(cols);
}

TangencyRotations build_tangency_rotations(const Mat& lambda, int ell, double r, std::optional<double> h_plane) {
  const int c = static_cast<int>(lambda.rows());
  if (lambda.cols() != c || c % 2 != 0) throw DimensionError("expected an even square matrix");
  if (ell < 1 || ell > c / 2) throw ParamError("tangency dimension must satisfy 0 < l <= c/2");
  if (!(r > 0.0 && r < M_PI / 4.0)) throw ParamError("cap radius must lie in (0, pi/4)");
  if (!is_symplectic_matrix(lambda, 1e-9).pass) throw ParamError("linear model is not symplectic");
  TangencyRotations out;
  out.strong_unstable = dominant_plane(lambda, ell);
  out.plane_class = check_tangency_plane_class(out.strong_unstable).cls;
  out.cap_radius = r;
  if (c != 2) throw ParamError("tangency rotations are constructed for c = 2 only");

  Eigen::EigenSolver<Mat> es(lambda);
  const double l0 = std::abs(es.eigenvalues()(0));
  const double l1 = std::abs(es.eigenvalues()(1));
  out.contraction = std::min(l0, l1) / std::max(l0, l1);
  // each image of the cap is an arc of half-width hw about its rotation angle
  const double hw = std::atan(out.contraction * std::tan(r));
  const double step = 1.6 * hw;
  const int kmax = static_cast<int>(std::ceil((r - 0.8 * hw) / step - 1e-9));
  for (int j = -kmax; j <= kmax; ++j) {
    const double a = j * step;
    Mat rot(2, 2);
    rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    out.angles.push_back(a);
    out.rotations.push_back(rot);
  }

  std::vector<Mat> pre;
  double lp = 1.0;
  for (const auto& rot : out.rotations) {
    const Mat m = rot * lambda;
    pre.push_back(m.inverse());
    lp = std::max(lp, 1.01 * condition_number(m));
  }
  const double h = h_plane ? *h_plane : default_net_spacing(r / 10.0, lp);
  const auto net = cap_net(1, 1, r, h);
  CoverCertificate& cert = out.certificate;
  cert.net_spacing = h;
  cert.lipschitz_bound = lp;
  cert.net_size = net.size();
  cert.map_count = pre.size();
  cert.margin = std::numeric_limits<double>::infinity();
  for (const auto& l : net) {
    const PlaneFrame f = graph_plane(out.strong_unstable, l);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pre) best = std::max(best, r - grassmann_distance(push_plane(p, f), out.strong_unstable));
    cert.margin = std::min(cert.margin, best);
    if (!(best > 0.0)) {
      ++cert.failure_count;
      if (cert.witness_failures.size() < 64) cert.witness_failures.push_back(f.frame().col(0));
    }
  }
  cert.pass = cert.failure_count == 0 && cert.margin > cert.soundness_gap();
  return out;
}

json TangencyBlendingSpec::to_json() const {
  return json{{"base", base.to_json()},
              {"cap", {{"base_frame", cap_center.to_json()}, {"radius_angle", cap_radius}}},
              {"maps", maps.size()},
              {"ell", ell}};
}

json TangencyCertificate::to_json() const {
  json j = cover.to_json();
  j["base_spacing"] = base_spacing;
  j["plane_spacing"] = plane_spacing;
  j["base_lipschitz"] = base_lipschitz;
  j["plane_lipschitz"] = plane_lipschitz;
  j["base_margin"] = base_margin;
  j["plane_margin"] = plane_margin;
  j["soundness_gap"] = soundness_gap();
  return j;
}

double tangency_depth(const TangencyBlendingSpec& spec, const PointPlane& z) {
  return std::min(spec.base.depth(z.point), spec.cap_radius - grassmann_distance(z.plane, spec.cap_center));
}

TangencyCertificate verify_tangency_blending(const TangencyBlendingSpec& spec, double h_base, double h_plane) {
  if (!(h_base > 0.0) || !(h_plane > 0.0)) throw ParamError("net spacings must be positive");
  if (!(spec.cap_radius > 0.0 && spec.cap_radius < M_PI / 2.0)) throw ParamError("cap radius out of range");
  const int c = spec.base.dimension();
  const int ell = spec.cap_center.dim();
  if (spec.cap_center.ambient() != c) throw DimensionError("cap plane and base region differ in dimension");
  const Region& b = spec.base;
  const PlaneFrame& e = spec.cap_center;
  const double r = spec.cap_radius;

  const auto base_net = make_net(b, h_base);
  const auto plane_coords = cap_net(c - ell, ell, r, h_plane);
  std::vector<PlaneFrame> planes;
  planes.reserve(plane_coords.size());
  for (const auto& l : plane_coords) planes.push_back(graph_plane(e, l));

  TangencyCertificate out;
  CoverCertificate& cert = out.cover;
  out.base_spacing = h_base;
  out.plane_spacing = h_plane;
  cert.net_size = base_net.size() * planes.size();
  cert.map_count = spec.maps.size();
  double lb = 1.0;
  for (const auto& f : spec.maps) lb = std::max(lb, f.inverse_lipschitz_on(b.center(), b.circumradius()));
  out.base_lipschitz = lb;

  const std::size_t nm = spec.maps.size();
  std::vector<double> base_depth(nm);
  std::vector<Mat> jac(nm);
  double lp = 1.0;
  double margin = std::numeric_limits<double>::infinity();
  double base_margin = std::numeric_limits<double>::infinity();
  std::vector<int> order(nm);
  for (const auto& x : base_net) {
    double best_base = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nm; ++j) {
      base_depth[j] = b.depth(spec.maps[j].apply_inverse(x));
      jac[j] = spec.maps[j].inverse_jacobian(x);
      // plane Lipschitz from the Jacobians met on the net; the plane factor of an affine map
      // does not depend on the base point
      lp = std::max(lp, 1.01 * condition_number(jac[j]));
      best_base = std::max(best_base, base_depth[j]);
    }
    base_margin = std::min(base_margin, best_base);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a2, int b2) { return base_depth[a2] > base_depth[b2]; });
    for (std::size_t p = 0; p < planes.size(); ++p) {
      double best = -std::numeric_limits<double>::infinity();
      for (int j : order) {
        if (base_depth[j] <= best) break;  // min(base, plane) cannot beat best any more
        if (best > 0.0 && best >= margin) break;  // this net point no longer lowers the minimum
        const double pd = r - grassmann_distance(push_plane(jac[j], planes[p]), e);
        best = std::max(best, std::min(base_depth[j], pd));
      }
      margin = std::min(margin, best);
      if (!(best > 0.0)) {
        ++cert.failure_count;
        if (cert.witness_failures.size() < 64) cert.witness_failures.push_back(vec_of(x, plane_coords[p]));
      }
    }
  }
  out.plane_lipschitz = lp;
  out.base_margin = base_margin;

  // plane factor alone, with the Jacobians at the centre of B
  double plane_margin = std::numeric_limits<double>::infinity();
  std::vector<Mat> jc;
  for (const auto& f : spec.maps) jc.push_back(f.inverse_jacobian(b.center()));
  for (const auto& pl : planes) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : jc) best = std::max(best, r - grassmann_distance(push_plane(m, pl), e));
    plane_margin = std::min(plane_margin, best);
  }
  out.plane_margin = plane_margin;

  cert.margin = margin;
  cert.net_spacing = std::max(h_base, h_plane);
  // scaled so that cover.soundness_gap() is the product-metric gap
  cert.lipschitz_bound = out.soundness_gap() / cert.net_spacing;
  cert.pass = nm > 0 && cert.failure_count == 0 && margin > out.soundness_gap();
  return out;
}

PointPlane replay(const std::vector<FiberMap>& maps, const std::vector<int>& word, const PointPlane& from) {
  PointPlane z = from;
  for (int s : word) {
    if (s < 1 || s > static_cast<int>(maps.size())) throw ParamError("word symbol out of range");
    z = LiftedMap(maps[s - 1]).apply(z);
  }
  return z;
}

std::optional<TransitionWitness> find_transition(const std::vector<FiberMap>& maps, const PointPlane& from,
                                                 const TangencyBlendingSpec& to_region, int max_len,
                                                 std::size_t node_budget) {
  if (max_len < 1) throw ParamError("max_len must be at least 1");
  struct Node {
    PointPlane z;
    std::vector<int> word;
  };
  std::vector<Node> layer{{from, {}}};
  std::size_t nodes = 0;
  for (int len = 1; len <= max_len && !maps.empty(); ++len) {
    std::vector<Node> next;
    for (const auto& n : layer) {
      for (std::size_t j = 0; j < maps.size(); ++j) {
        PointPlane z;
        try {
          z = LiftedMap(maps[j]).apply(n.z);
        } catch (const RankError&) {
          continue;
        }
        auto w = n.word;
        w.push_back(static_cast<int>(j) + 1);
        const double d = tangency_depth(to_region, z);
        if (d > 0.0) return TransitionWitness{w, z, d};
        if (++nodes > node_budget) throw BudgetError("transition search exceeded its node budget", nullptr);
        if (len < max_len) next.push_back({z, std::move(w)});
      }
    }
    layer = std::move(next);
  }
  return std::nullopt;
}

TangencyCodimension tangency_codimension(int ind_cu_1, int ind_cs_2, int ell, int c) {
  TangencyCodimension out;
  out.c_t = c - (ind_cu_1 + ind_cs_2 - ell);
  const int i1 = c - ind_cu_1;
  const int i2 = ind_cs_2;
  const bool indices_ok = ind_cu_1 > 0 && ind_cu_1 < c && ind_cs_2 > 0 && ind_cs_2 < c;
  out.admissible = indices_ok && std::max(0, i2 - i1) < ell && ell <= std::min(c - i1, i2);
  return out;
}

}  // namespace blenderlab
