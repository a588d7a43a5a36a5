#pragma once

#include "blenderlab/cover.hpp"
#include "blenderlab/fiber_map.hpp"
#include "blenderlab/region.hpp"
#include "blenderlab/symplectic.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace blenderlab {

struct PointPlane {
  Vec point;
  PlaneFrame plane;
};

// (x, E) -> (phi(x), Dphi(x) E)
class LiftedMap {
 public:
  explicit LiftedMap(FiberMap phi) : phi_(std::move(phi)) {}
  const FiberMap& base() const { return phi_; }
  PointPlane apply(const PointPlane& z) const;
  PointPlane apply_inverse(const PointPlane& z) const;

 private:
  FiberMap phi_;
};

LiftedMap lift_map(const FiberMap& phi);
// image of a plane under a matrix; RankError on rank loss
PlaneFrame push_plane(const Mat& m, const PlaneFrame& e);

// largest principal angle
double grassmann_distance(const PlaneFrame& e, const PlaneFrame& f);

// graph coordinates of F over E: F = span(E + E_perp L); ShapeError if F is not a graph over E
Mat graph_coordinates(const PlaneFrame& e, const PlaneFrame& f);
PlaneFrame graph_plane(const PlaneFrame& e, const Mat& l);

enum class ConeType { Unstable, Stable };

struct ConeSpec {
  PlaneFrame base;
  double opening = 0.0;    // graph-norm bound
  ConeType type = ConeType::Unstable;
  double expansion = 1.0;  // claimed lower bound on |Dphi v| / |v| over the cone (inverse maps for Stable)
  json to_json() const;
};

struct ConeCertificate {
  bool pass = false;
  double invariance_margin = 0.0;  // opening - max image graph norm
  double min_expansion = 0.0;
  double expansion_margin = 0.0;   // min_expansion - claimed expansion
  std::size_t points = 0;
  std::size_t planes = 0;
  json to_json() const;
};

// Samples points x in R with phi(x) in R (the centre of R when none is found), cone boundary planes
// and boundary vectors plus ten times as many interior vectors.
ConeCertificate verify_unstable_cone(const std::vector<FiberMap>& maps, const ConeSpec& cone, const Region& r,
                                     int samples, std::uint64_t seed = 0);

// Raises SubspaceClassError unless E is symplectic (even dimension) or coisotropic (odd dimension).
Classification check_tangency_plane_class(const PlaneFrame& e);

// dominant l-dimensional eigenspace of a real diagonalizable matrix; ParamError without a gap
PlaneFrame dominant_plane(const Mat& m, int ell);

struct TangencyRotations {
  std::vector<Mat> rotations;
  std::vector<double> angles;
  PlaneFrame strong_unstable;
  double cap_radius = 0.0;
  double contraction = 0.0;  // induced Grassmannian contraction rate
  SubspaceClass plane_class = SubspaceClass::Mixed;
  CoverCertificate certificate;  // plane factor only
};

// Rotations A_j such that the lifts of A_j Lambda cover the closed cap of radius r about E^uu.
// Constructed for c = 2; other dimensions raise ParamError after the class checks.
TangencyRotations build_tangency_rotations(const Mat& lambda, int ell, double r,
                                           std::optional<double> h_plane = std::nullopt);

struct TangencyBlendingSpec {
  Region base;
  PlaneFrame cap_center;
  double cap_radius = 0.0;
  std::vector<FiberMap> maps;
  int ell = 1;
  json to_json() const;
};

struct TangencyCertificate {
  CoverCertificate cover;  // margin in the product metric
  double base_spacing = 0.0;
  double plane_spacing = 0.0;
  double base_lipschitz = 0.0;
  double plane_lipschitz = 0.0;
  double base_margin = 0.0;   // min over net of the best base depth alone
  double plane_margin = 0.0;  // min over net of the best plane depth alone
  double soundness_gap() const { return std::max(base_lipschitz * base_spacing, plane_lipschitz * plane_spacing); }
  json to_json() const;
};

// Cover of closure(B x G) by lifted images; membership via preimages in both factors.
TangencyCertificate verify_tangency_blending(const TangencyBlendingSpec& spec, double h_base, double h_plane);

// depth of (x, F) in the product region: min(base depth, cap radius - angle)
double tangency_depth(const TangencyBlendingSpec& spec, const PointPlane& z);

struct TransitionWitness {
  std::vector<int> word;  // 1-based, first applied first
  PointPlane endpoint;
  double depth = 0.0;
};

std::optional<TransitionWitness> find_transition(const std::vector<FiberMap>& maps, const PointPlane& from,
                                                 const TangencyBlendingSpec& to_region, int max_len,
                                                 std::size_t node_budget = 2'000'000);

PointPlane replay(const std::vector<FiberMap>& maps, const std::vector<int>& word, const PointPlane& from);

struct TangencyCodimension {
  int c_t = 0;
  bool admissible = false;
};

TangencyCodimension tangency_codimension(int ind_cu_1, int ind_cs_2, int ell, int c);

}  // namespace blenderlab
