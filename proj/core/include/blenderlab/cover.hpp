#pragma once

#include "blenderlab/fiber_map.hpp"
#include "blenderlab/region.hpp"

#include <optional>
#include <vector>

namespace blenderlab {

enum class CoverDirection { Forward, Inverse };

struct CoverCertificate {
  bool pass = false;
  double margin = 0.0;          // min over net of max over maps of preimage depth
  double net_spacing = 0.0;     // h
  double lipschitz_bound = 0.0; // L of the preimage maps near the region
  std::vector<Vec> witness_failures;
  std::size_t failure_count = 0;  // witness_failures may be truncated
  std::size_t net_size = 0;
  std::size_t map_count = 0;

  double soundness_gap() const { return lipschitz_bound * net_spacing; }
  json to_json() const;
};

struct CoverOptions {
  // explicit Lipschitz bounds of the preimage maps; computed from the maps when empty
  std::vector<double> lipschitz;
  std::size_t max_witnesses = 64;
};

// Membership p in phi_i(B) is decided by phi_i^{-1}(p) in B (Forward) or phi_i(p) in B (Inverse).
CoverCertificate verify_open_cover(const std::vector<FiberMap>& maps, const Region& b, CoverDirection direction,
                                   double h, const CoverOptions& opts = {});

// Exact open-image membership of a single point, used by sampling audits.
bool in_some_open_image(const std::vector<FiberMap>& maps, const Region& b, CoverDirection direction,
                        const Vec& p);

// c + 1 unit vertices of a regular simplex centred at the origin.
std::vector<Vec> simplex_directions(int c);

// min over unit p of max over i of <p, u_i>, via the facets of the convex hull.
double direction_set_constant(const std::vector<Vec>& dirs);

CoverCertificate cover_ball_by_translates(double eps, double delta, const std::vector<Vec>& dirs, double h);

struct LatticeResult {
  std::vector<Vec> centers;      // translation vectors, relative to the target centre
  std::vector<int> axis_counts;  // lattice points per contracted axis before pruning
  double spacing = 0.0;          // lattice spacing along the widest contracted axis, chart units
  CoverCertificate certificate;
};

// Translates of linear(B_R(0)) covering the closed ball B_R(0); centres lie in the contracted
// subspace. ShapeError when nothing is contracted or a singular value is ~1.
LatticeResult lattice_translate_centers(double target_radius, const Mat& linear, double safety = 0.6,
                                        std::optional<double> h = std::nullopt);
LatticeResult lattice_translate_centers(double target_radius, const FiberMap& image_shape, double safety = 0.6,
                                        std::optional<double> h = std::nullopt);

// spacing rule shared by the cover builders: margin_target / (4 L)
double default_net_spacing(double margin_target, double lipschitz);

}  // namespace blenderlab
