#pragma once

#include "blenderlab/fiber_map.hpp"
#include "blenderlab/linalg.hpp"

#include <cstdint>
#include <string>

namespace blenderlab {

// Canonical skew matrix [[0, I], [-I, 0]] in coordinates (x1..xn, y1..yn).
Mat canonical_j(int c);

// omega(u, v) = u^T J v
double omega(const Vec& u, const Vec& v);

struct SymplecticCheck {
  bool pass = false;
  double defect = 0.0;
};

SymplecticCheck is_symplectic_matrix(const Mat& m, double tol = 1e-10);

// An l-plane of R^c held as an orthonormal frame (c x l).
class PlaneFrame {
 public:
  PlaneFrame() = default;
  // frame columns must be orthonormal to 1e-12
  explicit PlaneFrame(Mat frame);
  // orthonormalizes arbitrary spanning columns; RankError if they are dependent
  static PlaneFrame span(const Mat& columns);
  static PlaneFrame coordinate(int c, std::initializer_list<int> axes);

  const Mat& frame() const { return q_; }
  int ambient() const { return static_cast<int>(q_.rows()); }
  int dim() const { return static_cast<int>(q_.cols()); }
  Mat projector() const { return q_ * q_.transpose(); }
  bool same_plane(const PlaneFrame& other, double tol = 1e-9) const;

  json to_json() const { return mat_to_json(q_); }
  static PlaneFrame from_json(const json& j) { return PlaneFrame(mat_from_json(j)); }

 private:
  Mat q_;
};

enum class SubspaceClass { Symplectic, Isotropic, Coisotropic, Mixed };
std::string to_string(SubspaceClass c);

struct Classification {
  SubspaceClass cls = SubspaceClass::Mixed;
  double witness = 0.0;
  int radical_dim = 0;  // dim of E intersected with its symplectic complement
};

Classification classify_subspace(const PlaneFrame& e, double tol = 1e-9);

// Symplectic matrix S with S E = F; continuous in (E, F) near E = F.
Mat symplectic_map_between_planes(const PlaneFrame& e, const PlaneFrame& f);

// Full symplectic basis B (B^T J B = J) whose first columns span E in the layout
// [radical | symplectic part x | rest x ; radical partners | symplectic part y | rest y].
Mat adapted_symplectic_basis(const PlaneFrame& e);

// Time-one map of chi * <J v, z - center>: translation by v on B(center, r_inner),
// identity outside B(center, r_outer).
FiberMap hamiltonian_bump_translation(const Vec& center, double r_inner, double r_outer, const Vec& vector);

Mat random_near_identity_symplectic(int c, double scale, std::uint64_t seed);

}  // namespace blenderlab
