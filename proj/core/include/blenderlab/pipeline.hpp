#pragma once

#include "blenderlab/blender.hpp"
#include "blenderlab/fiber_map.hpp"
#include "blenderlab/globalization.hpp"
#include "blenderlab/grassmann.hpp"
#include "blenderlab/skewproduct.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace blenderlab {

inline constexpr const char* kCertificateSchema = "blenderlab-cert/1";

struct PipelineConfig {
  int dimension = 2;
  int ell = 1;
  double epsilon = 0.5;
  double nu = 0.2;
  double alpha = 1.0;
  int window = 32;

  double lattice_safety = 0.6;
  std::optional<double> blend_net;        // blending cover spacing; default (radius/10)/(4L)
  double cap_fraction = 0.2;              // cap radius = cap_fraction * epsilon (radians)
  double tangency_base_net = 0.005;
  double tangency_plane_net = 0.0025;
  double cone_opening = 0.5;
  double cone_expansion = 1.5;
  int cone_samples = 64;

  std::vector<double> domain_lower{0.0, 0.0};
  std::vector<double> domain_upper{3.0, 3.0};
  double glob_eps = 0.39;
  double glob_step_fraction = 0.08;       // scaled by min(1, 2 epsilon)
  double glob_accuracy = 1e-4;
  double seed_radius = 0.1;
  double target_net = 0.05;
  int max_word_len = 1000;
  std::size_t node_budget = 4'000'000;
  double max_distortion = 1.5;            // generators distorting a ball more than this are not applied
  bool backward_globalization = true;

  int transition_max_len = 5;
  std::size_t transition_budget = 1'000'000;

  int hyperbolicity_samples = 2000;
  int symplectic_samples = 100;

  std::vector<double> eta;
  int trials = 20;
  bool sweep_globalization = false;
  std::uint64_t seed = 0;
  std::string output;
  std::vector<std::string> disabled_checks;

  json to_json() const;
  static PipelineConfig from_json(const json& j);
  void validate() const;  // ParamError
};

// Symbols (1-based) of the pieces of the arc system.
struct ArcLayout {
  int phi1 = 0;                    // linear model about p1
  std::vector<int> tangency1;      // rotation j, translate i at j * translates + i
  std::vector<int> cu1;            // unstable-direction translates about p1
  std::vector<int> tangency2;      // inverses of rotated contractions about p2
  int phi2 = 0;
  int transition = 0;
  std::vector<int> globalizers;
  int rotations = 0;
  int translates = 0;

  double epsilon = 0.0;
  Vec p1, p2;
  double blend_radius = 0.0;
  double cap_radius = 0.0;
  Mat lambda;
  std::vector<double> rotation_angles;
  double glob_step = 0.0;

  Region b1() const { return Region::ball(p1, blend_radius); }
  Region b2() const { return Region::ball(p2, blend_radius); }
  std::vector<int> b1_symbols() const;
  std::vector<int> b2_symbols() const;
  json to_json() const;
};

struct ArcSystem {
  OneStepSystem system;
  ArcLayout layout;
};

// The arc is the identity at epsilon = 0 (with the map count of epsilon = 0.05).
ArcSystem build_arc(const PipelineConfig& cfg);
OneStepSystem build_arc_system(const PipelineConfig& cfg);

Region config_domain(const PipelineConfig& cfg);

// Specs read off a (possibly perturbed) system with the layout of its construction.
BlendingRegionSpec b1_blending_spec(const ArcLayout& layout);
BlendingRegionSpec b2_blending_spec(const ArcLayout& layout);
TangencyBlendingSpec b1_tangency_spec(const OneStepSystem& sys, const ArcLayout& layout);
TangencyBlendingSpec b2_tangency_spec(const OneStepSystem& sys, const ArcLayout& layout);

struct CheckRecord {
  std::string name;
  std::string hypothesis;
  std::string status = "skipped";  // pass | fail | skipped
  std::vector<std::string> required_for;
  std::optional<double> margin;
  std::optional<double> lipschitz;  // preimage Lipschitz bound of cover checks
  json parameters = json::object();
  json witnesses = json::object();
  std::string reason;
  json to_json() const;
};

struct Certificate {
  std::vector<CheckRecord> checks;
  std::string overall = "fail";
  bool robust_transitivity = false;
  bool robust_tangency = false;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::optional<std::string> timestamp;  // excluded from determinism
  std::string reason;                     // set when the whole certificate is skipped

  const CheckRecord* find(const std::string& name) const;
  json to_json() const;
};

std::uint64_t fnv1a(const std::string& s);

// Runs every check; errors become failed checks. epsilon == 0 gives a skipped certificate.
Certificate certify(const PipelineConfig& cfg);

struct SweepRow {
  double eta = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool pass = false;
  double min_margin = 0.0;
  std::vector<std::string> failed;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::optional<double> largest_all_pass;
  std::optional<double> smallest_any_fail;
  json to_json() const;
};

// Margin m and Lipschitz bound L of the cover checks of a certificate, for sizing sweeps.
struct CoverMargins {
  double margin = 0.0;
  double lipschitz = 0.0;
};
CoverMargins cover_margins(const Certificate& cert);

// Verification-only re-certification of seeded perturbations (construction is not repeated).
SweepTable robustness_sweep(const PipelineConfig& cfg, const std::vector<double>& etas, int trials);

// Block b (lexicographic over {1..d}^len) gets its zeroth symbol.
std::vector<int> assign_cylinders_to_rectangles(int d, int num_rectangles, int cylinder_len);

// Fiber isotopy t -> time-one map of the bump with velocity t * v.
struct FiberIsotopy {
  BumpSpec spec;  // spec.velocity is the t = 1 velocity; spec.steps must be fixed
  FiberMap at(double t) const;
};

// Radial interface: s = 1 for |x| <= inner, 0 for |x| >= outer, quintic smoothstep between.
struct InterfaceProfile {
  double inner = 1.0;
  double outer = 2.0;
  double value(double rho) const;
  double derivative(double rho) const;
};

struct AuditRow {
  std::string zone;  // inside | annulus | outside
  double rho = 0.0;
  double defect = 0.0;
};

struct AuditReport {
  double max_defect = 0.0;
  double inside = 0.0;
  double annulus = 0.0;
  double outside = 0.0;
  std::vector<AuditRow> rows;
  json to_json() const;
};

// f(x, y) = (F x, phi_{s(|x|)}(y)); reports max |Df^T J Df - J| per zone.
AuditReport audit_product_map_symplecticity(const Mat& base_linear, const FiberIsotopy& fiber,
                                            const InterfaceProfile& profile,
                                            const std::vector<std::pair<Vec, Vec>>& points);

// Jacobian of the glued product map at (x, y), analytic in y and by a central difference in t.
Mat product_map_jacobian(const Mat& base_linear, const FiberIsotopy& fiber, const InterfaceProfile& profile,
                         const Vec& x, const Vec& y);
std::pair<Vec, Vec> product_map_apply(const Mat& base_linear, const FiberIsotopy& fiber,
                                      const InterfaceProfile& profile, const Vec& x, const Vec& y);

// Audit used by the CLI: base diag(2, 1/2), fiber = bump translation of the configured arc.
AuditReport audit_realization(const PipelineConfig& cfg, int samples_per_zone = 50);

}  // namespace blenderlab
