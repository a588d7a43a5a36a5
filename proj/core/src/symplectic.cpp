#include "blenderlab/symplectic.hpp"

#include "blenderlab/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

namespace blenderlab {

namespace {

constexpr double kZeroTol = 1e-9;
constexpr double kNonzeroTol = 1e-6;

void require_even(int c) {
  if (c <= 0 || c % 2 != 0) throw DimensionError("symplectic operations need an even dimension");
}

Vec apply_j(const Vec& u) {
  const int n = static_cast<int>(u.size()) / 2;
  Vec r(u.size());
  r.head(n) = u.tail(n);
  r.tail(n) = -u.head(n);
  return r;
}

struct Pair {
  Vec e, f;
};

// removes the symplectic components along a pair with omega(e, f) = 1
void project_out(Vec& v, const Pair& p) { v = v - omega(v, p.f) * p.e + omega(v, p.e) * p.f; }

// greedy symplectic Gram-Schmidt choosing the pair with the largest |omega|
std::vector<Pair> max_pivot_pairs(std::vector<Vec> pool) {
  std::vector<Pair> out;
  while (pool.size() >= 2) {
    double best = -1.0;
    std::size_t ia = 0, ib = 1;
    for (std::size_t a = 0; a < pool.size(); ++a)
      for (std::size_t b = a + 1; b < pool.size(); ++b) {
        const double w = std::abs(omega(pool[a], pool[b]));
        if (w > best) {
          best = w;
          ia = a;
          ib = b;
        }
      }
    if (best < kNonzeroTol) throw NumericalRankError("symplectic Gram-Schmidt pivot vanished");
    const double w = omega(pool[ia], pool[ib]);
    const double s = std::sqrt(std::abs(w));
    Pair p{pool[ia] / s, pool[ib] * ((w > 0 ? 1.0 : -1.0) / s)};
    pool.erase(pool.begin() + static_cast<long>(ib));
    pool.erase(pool.begin() + static_cast<long>(ia));
    for (auto& v : pool) project_out(v, p);
    out.push_back(std::move(p));
  }
  if (!pool.empty()) throw NumericalRankError("odd number of vectors left in symplectic Gram-Schmidt");
  return out;
}

// Gram-Schmidt keeping the given pairing and order
std::vector<Pair> ordered_pairs(std::vector<Pair> guesses, const std::vector<Pair>& done) {
  std::vector<Pair> out;
  for (std::size_t k = 0; k < guesses.size(); ++k) {
    Pair p = guesses[k];
    for (const auto& d : done) {
      project_out(p.e, d);
      project_out(p.f, d);
    }
    for (const auto& d : out) {
      project_out(p.e, d);
      project_out(p.f, d);
    }
    const double w = omega(p.e, p.f);
    if (std::abs(w) < 0.25) throw NumericalRankError("guided pivot too small");
    p.f /= w;
    out.push_back(std::move(p));
  }
  return out;
}

struct Structure {
  Mat radical;  // orthonormal basis of E intersected with its symplectic complement
  Mat rest;     // orthonormal complement of the radical inside E
};

Structure structure_of(const PlaneFrame& e) {
  const Mat& q = e.frame();
  const Mat g = q.transpose() * canonical_j(e.ambient()) * q;
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > kNonzeroTol)
      ++rank;
    else if (s(i) > kZeroTol)
      throw NumericalRankError("Gram matrix of the plane is numerically ambiguous");
  }
  const int l = e.dim();
  Structure st;
  st.rest = q * svd.matrixV().leftCols(rank);
  st.radical = q * svd.matrixV().rightCols(l - rank);
  return st;
}

std::vector<Vec> columns(const Mat& m) {
  std::vector<Vec> v;
  for (int i = 0; i < m.cols(); ++i) v.push_back(m.col(i));
  return v;
}

// partners f_i with omega(r_i, f_j) = delta_ij, omega(f_i, f_j) = 0, orthogonal to the given pairs
std::vector<Vec> radical_partners(const std::vector<Vec>& rad, std::vector<Vec> guess, const std::vector<Pair>& w) {
  const int r = static_cast<int>(rad.size());
  if (r == 0) return {};
  for (auto& f : guess)
    for (const auto& p : w) project_out(f, p);
  Mat m(r, r);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) m(i, k) = omega(rad[i], guess[k]);
  Eigen::FullPivLU<Mat> lu(m);
  if (!lu.isInvertible() || smallest_singular_value(m) < kNonzeroTol)
    throw NumericalRankError("radical partners are degenerate");
  const Mat minv = lu.inverse();
  std::vector<Vec> f(r, Vec::Zero(rad.empty() ? 0 : rad[0].size()));
  for (int k = 0; k < r; ++k)
    for (int i = 0; i < r; ++i) f[k] += guess[i] * minv(i, k);
  Mat s(r, r);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) s(i, k) = omega(f[i], f[k]);
  std::vector<Vec> out = f;
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) out[i] -= 0.5 * s(i, k) * rad[k];
  return out;
}

Mat assemble(const std::vector<Vec>& rad, const std::vector<Vec>& partners, const std::vector<Pair>& w,
             const std::vector<Pair>& v, int c) {
  const int n = c / 2;
  Mat b(c, c);
  int col = 0;
  for (const auto& x : rad) b.col(col++) = x;
  for (const auto& p : w) b.col(col++) = p.e;
  for (const auto& p : v) b.col(col++) = p.e;
  col = n;
  for (const auto& x : partners) b.col(col++) = x;
  for (const auto& p : w) b.col(col++) = p.f;
  for (const auto& p : v) b.col(col++) = p.f;
  return b;
}

std::vector<Pair> remaining_pairs(const std::vector<Vec>& rad, const std::vector<Vec>& partners,
                                  const std::vector<Pair>& w, int c) {
  std::vector<Vec> used;
  for (const auto& x : rad) used.push_back(x);
  for (const auto& x : partners) used.push_back(x);
  for (const auto& p : w) {
    used.push_back(p.e);
    used.push_back(p.f);
  }
  if (static_cast<int>(used.size()) == c) return {};
  Mat m(c, static_cast<int>(used.size()));
  for (int i = 0; i < m.cols(); ++i) m.col(i) = used[i];
  const Mat comp = null_space(m.transpose() * canonical_j(c), 1e-10);
  return max_pivot_pairs(columns(comp));
}

Mat unguided_basis(const PlaneFrame& e) {
  const int c = e.ambient();
  const Structure st = structure_of(e);
  const auto rad = columns(st.radical);
  const auto w = max_pivot_pairs(columns(st.rest));
  std::vector<Vec> guess;
  for (const auto& x : rad) guess.push_back(-apply_j(x));
  const auto partners = radical_partners(rad, guess, w);
  const auto v = remaining_pairs(rad, partners, w, c);
  return assemble(rad, partners, w, v, c);
}

// rebuilds a basis adapted to F starting from a nearby basis (T * B_E)
Mat guided_basis(const PlaneFrame& f, const Mat& guess, int r, int m) {
  const int c = f.ambient();
  const int n = c / 2;
  const Structure st = structure_of(f);
  if (st.radical.cols() != r || st.rest.cols() != 2 * m) throw NotSameClass("planes have different structure");
  const Mat pr = st.radical * st.radical.transpose();
  const Mat pf = f.projector();
  std::vector<Vec> rad;
  for (int i = 0; i < r; ++i) rad.push_back(pr * guess.col(i));
  if (r > 0) {
    Mat rm(c, r);
    for (int i = 0; i < r; ++i) rm.col(i) = rad[i];
    if (smallest_singular_value(rm) < 0.25) throw NumericalRankError("radical guess degenerate");
  }
  std::vector<Pair> wg;
  for (int k = 0; k < m; ++k) {
    Vec e = pf * guess.col(r + k);
    Vec ff = pf * guess.col(n + r + k);
    // remove radical directions so the pair lives in a complement of the radical
    e -= pr * e;
    ff -= pr * ff;
    wg.push_back({e, ff});
  }
  const auto w = ordered_pairs(wg, {});
  std::vector<Vec> pg;
  for (int i = 0; i < r; ++i) pg.push_back(guess.col(n + i));
  const auto partners = radical_partners(rad, pg, w);
  std::vector<Pair> done = w;
  for (int i = 0; i < r; ++i) done.push_back({rad[i], partners[i]});
  std::vector<Pair> vg;
  for (int k = r + m; k < n; ++k) vg.push_back({guess.col(k), guess.col(n + k)});
  const auto v = ordered_pairs(vg, done);
  return assemble(rad, partners, w, v, c);
}

}  // namespace

Mat canonical_j(int c) {
  require_even(c);
  const int n = c / 2;
  Mat j = Mat::Zero(c, c);
  j.topRightCorner(n, n) = Mat::Identity(n, n);
  j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return j;
}

double omega(const Vec& u, const Vec& v) { return u.dot(apply_j(v)); }

SymplecticCheck is_symplectic_matrix(const Mat& m, double tol) {
  if (m.rows() != m.cols()) throw DimensionError("matrix must be square");
  const int c = static_cast<int>(m.rows());
  require_even(c);
  const Mat j = canonical_j(c);
  SymplecticCheck r;
  r.defect = max_abs(m.transpose() * j * m - j);
  r.pass = std::isfinite(r.defect) && r.defect <= tol;
  return r;
}

PlaneFrame::PlaneFrame(Mat frame) : q_(std::move(frame)) {
  if (q_.cols() < 1 || q_.cols() > q_.rows()) throw FrameError("frame must have 1 <= l <= c columns");
  const double err = max_abs(q_.transpose() * q_ - Mat::Identity(q_.cols(), q_.cols()));
  if (!(err <= 1e-12)) throw FrameError("frame columns are not orthonormal");
}

PlaneFrame PlaneFrame::span(const Mat& columns) {
  Mat q = orthonormal_basis(columns, 1e-12);
  if (q.cols() != columns.cols()) throw RankError("spanning columns are linearly dependent");
  // re-orthonormalize to full working precision
  Eigen::HouseholderQR<Mat> qr(q);
  Mat thin = qr.householderQ() * Mat::Identity(q.rows(), q.cols());
  return PlaneFrame(thin);
}

PlaneFrame PlaneFrame::coordinate(int c, std::initializer_list<int> axes) {
  Mat q = Mat::Zero(c, static_cast<int>(axes.size()));
  int k = 0;
  for (int a : axes) {
    if (a < 0 || a >= c) throw DimensionError("axis out of range");
    q(a, k++) = 1.0;
  }
  return PlaneFrame(q);
}

bool PlaneFrame::same_plane(const PlaneFrame& other, double tol) const {
  if (ambient() != other.ambient() || dim() != other.dim()) return false;
  return (projector() - other.projector()).norm() <= tol;
}

std::string to_string(SubspaceClass c) {
  switch (c) {
    case SubspaceClass::Symplectic:
      return "symplectic";
    case SubspaceClass::Isotropic:
      return "isotropic";
    case SubspaceClass::Coisotropic:
      return "coisotropic";
    case SubspaceClass::Mixed:
      return "mixed";
  }
  return "mixed";
}

Classification classify_subspace(const PlaneFrame& e, double tol) {
  const int c = e.ambient();
  require_even(c);
  const Mat& q = e.frame();
  const Mat j = canonical_j(c);
  const Mat g = q.transpose() * j * q;
  Eigen::JacobiSVD<Mat> svd(g);
  const auto& s = svd.singularValues();
  Classification out;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) <= tol) ++out.radical_dim;
  const double smin = s(s.size() - 1);
  if (smin > tol) {
    out.cls = SubspaceClass::Symplectic;
    out.witness = smin;
    return out;
  }
  // E^omega = kernel of v -> Q^T J v
  const Mat comp = null_space(q.transpose() * j, 1e-12);
  const double co_residual = comp.cols() ? max_abs(comp - q * (q.transpose() * comp)) : 0.0;
  if (co_residual <= tol) {
    out.cls = SubspaceClass::Coisotropic;
    out.witness = co_residual;
    return out;
  }
  const double iso_residual = max_abs(g);
  if (iso_residual <= tol) {
    out.cls = SubspaceClass::Isotropic;
    out.witness = iso_residual;
    return out;
  }
  out.cls = SubspaceClass::Mixed;
  out.witness = smin;
  return out;
}

Mat adapted_symplectic_basis(const PlaneFrame& e) {
  require_even(e.ambient());
  return unguided_basis(e);
}

Mat symplectic_map_between_planes(const PlaneFrame& e, const PlaneFrame& f) {
  if (e.ambient() != f.ambient() || e.dim() != f.dim()) throw NotSameClass("planes differ in dimension");
  const int c = e.ambient();
  require_even(c);
  const auto ce = classify_subspace(e);
  const auto cf = classify_subspace(f);
  if (ce.cls != cf.cls || ce.radical_dim != cf.radical_dim)
    throw NotSameClass("planes are " + to_string(ce.cls) + " and " + to_string(cf.cls));

  const Mat be = unguided_basis(e);
  const int r = ce.radical_dim;
  const int m = (e.dim() - r) / 2;

  // direct rotation taking E to F; fall back to an independent basis when the planes are far apart
  const Mat pe = e.projector();
  const Mat pf = f.projector();
  const Mat id = Mat::Identity(c, c);
  const Mat blend = pf * pe + (id - pf) * (id - pe);
  Eigen::JacobiSVD<Mat> svd(blend, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat bf;
  bool guided = false;
  if (svd.singularValues()(c - 1) > 1e-3) {
    const Mat t = svd.matrixU() * svd.matrixV().transpose();
    try {
      bf = guided_basis(f, t * be, r, m);
      guided = true;
    } catch (const NumericalRankError&) {
      guided = false;
    }
  }
  if (!guided) bf = unguided_basis(f);
  return bf * be.inverse();
}

FiberMap hamiltonian_bump_translation(const Vec& center, double r_inner, double r_outer, const Vec& vector) {
  const int c = static_cast<int>(center.size());
  require_even(c);
  if (vector.size() != c) throw DimensionError("translation vector dimension mismatch");
  if (!(r_inner > 0.0) || !(r_outer > r_inner)) throw ParamError("need 0 < r_inner < r_outer");
  if (vector.norm() > 0.25 * (r_outer - r_inner))
    throw StepSizeError("translation vector longer than (r_outer - r_inner)/4");
  BumpSpec s;
  s.core = BumpCore::point(center);
  // the whole path of every point of the inner ball stays in the plateau
  s.plateau = r_inner + vector.norm();
  s.outer = r_outer;
  s.velocity = vector;
  s.hamiltonian = true;
  s.r_inner = r_inner;
  return FiberMap::bump(std::move(s));
}

Mat random_near_identity_symplectic(int c, double scale, std::uint64_t seed) {
  require_even(c);
  if (scale < 0.0) throw ParamError("scale must be non-negative");
  if (scale == 0.0) return Mat::Identity(c, c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(c, c);
  for (int i = 0; i < c; ++i)
    for (int k = 0; k < c; ++k) a(i, k) = normal(rng);
  Mat sym = 0.5 * (a + a.transpose());
  sym /= spectral_norm(sym);
  // exp of a Hamiltonian matrix with norm `scale`
  Mat x = canonical_j(c) * sym * scale;
  return x.exp();
}

}  // namespace blenderlab
