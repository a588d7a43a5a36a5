#include "blenderlab/pipeline.hpp"

#include "blenderlab/cover.hpp"
#include "blenderlab/errors.hpp"
#include "blenderlab/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>

#ifndef BLENDERLAB_VERSION
#define BLENDERLAB_VERSION "0.0.0"
#endif

namespace blenderlab {

namespace {

constexpr const char* kTransitivity = "robust_transitivity";
constexpr const char* kTangency = "robust_tangency";

Mat rotation2(double a) {
  Mat r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

// x -> lin (x - p) + p + t
FiberMap about(const Mat& lin, const Vec& p, const Vec& t) { return FiberMap::affine(lin, p + t - lin * p); }

json vec_list(const std::vector<Vec>& pts, std::size_t max) {
  json a = json::array();
  for (std::size_t i = 0; i < pts.size() && i < max; ++i) a.push_back(vec_to_json(pts[i]));
  return a;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ArcSystem build_positive(const PipelineConfig& cfg, double eps) {
  const int c = cfg.dimension;
  if (c != 2) throw ParamError("the arc construction is implemented for c = 2");
  ArcSystem out;
  ArcLayout& lay = out.layout;
  const Region domain = config_domain(cfg);
  lay.epsilon = eps;
  lay.p1 = domain.lower() + (domain.upper() - domain.lower()) / 3.0;
  lay.p2 = lay.p1 + 2.0 * eps * Vec::Ones(c);
  lay.blend_radius = 0.5 * eps;
  lay.cap_radius = cfg.cap_fraction * eps;
  const double sigma = std::pow(4.0, eps);
  lay.lambda = Mat::Zero(2, 2);
  lay.lambda(0, 0) = sigma;
  lay.lambda(1, 1) = 1.0 / sigma;
  const Mat lam = lay.lambda;
  const Mat lam_inv = lam.inverse();

  const auto rot1 = build_tangency_rotations(lam, cfg.ell, lay.cap_radius);
  const auto rot2 = build_tangency_rotations(lam_inv, cfg.ell, lay.cap_radius);
  lay.rotation_angles = rot1.angles;
  const auto cs = lattice_translate_centers(lay.blend_radius, lam, cfg.lattice_safety).centers;
  const auto cu = lattice_translate_centers(lay.blend_radius, lam_inv, cfg.lattice_safety).centers;
  lay.rotations = static_cast<int>(rot1.rotations.size());
  lay.translates = static_cast<int>(cs.size());

  std::vector<FiberMap> maps;
  auto add = [&](FiberMap f) {
    maps.push_back(std::move(f));
    return static_cast<int>(maps.size());
  };
  const Vec zero = Vec::Zero(c);
  lay.phi1 = add(about(lam, lay.p1, zero));
  for (const auto& a : rot1.rotations)
    for (const auto& t : cs) lay.tangency1.push_back(add(about(a * lam, lay.p1, t)));
  for (const auto& s : cu) lay.cu1.push_back(add(about(lam, lay.p1, -(lam * s))));
  for (const auto& a : rot2.rotations)
    for (const auto& t : cu) lay.tangency2.push_back(add(about(a * lam_inv, lay.p2, t).inverse()));
  lay.phi2 = add(about(lam, lay.p2, zero));
  const double theta = 0.5 * M_PI * std::min(1.0, 2.0 * eps);
  lay.transition = add(FiberMap::affine(rotation2(theta), lay.p2 - rotation2(theta) * lay.p1));

  ChartOptions copt;
  copt.step_fraction = cfg.glob_step_fraction * std::min(1.0, 2.0 * eps);
  copt.accuracy = cfg.glob_accuracy;
  const ChartFamily fam = chart_family(domain, cfg.glob_eps, copt);
  lay.glob_step = fam.step;
  for (const auto& g : fam.generators) lay.globalizers.push_back(add(g));

  out.system = OneStepSystem(cfg.nu, cfg.alpha, std::move(maps), cfg.window);
  return out;
}

CheckRecord make_record(const std::string& name, const std::string& hypothesis, std::vector<std::string> req) {
  CheckRecord r;
  r.name = name;
  r.hypothesis = hypothesis;
  r.required_for = std::move(req);
  return r;
}

void finish(CheckRecord& r, bool pass) { r.status = pass ? "pass" : "fail"; }

// Runs body unless disabled; library errors become a failed record.
void run_check(CheckRecord& r, const PipelineConfig& cfg, const std::function<void(CheckRecord&)>& body) {
  if (std::find(cfg.disabled_checks.begin(), cfg.disabled_checks.end(), r.name) != cfg.disabled_checks.end()) {
    r.status = "skipped";
    r.reason = "disabled by configuration";
    return;
  }
  try {
    body(r);
  } catch (const Error& e) {
    r.status = "fail";
    r.reason = std::string(e.kind()) + ": " + e.what();
  } catch (const std::exception& e) {
    r.status = "fail";
    r.reason = e.what();
  }
}

json blending_params(const BlendingCertificates& c) {
  json p = json::object();
  if (c.forward) p["forward"] = {{"net_spacing", c.forward->net_spacing}, {"lipschitz", c.forward->lipschitz_bound},
                                 {"margin", c.forward->margin}, {"net_size", c.forward->net_size}};
  if (c.inverse) p["inverse"] = {{"net_spacing", c.inverse->net_spacing}, {"lipschitz", c.inverse->lipschitz_bound},
                                 {"margin", c.inverse->margin}, {"net_size", c.inverse->net_size}};
  return p;
}

double blending_lipschitz(const BlendingCertificates& c) {
  double l = 0.0;
  if (c.forward) l = std::max(l, c.forward->lipschitz_bound);
  if (c.inverse) l = std::max(l, c.inverse->lipschitz_bound);
  return l;
}

json failures_json(const BlendingCertificates& c) {
  json w = json::object();
  if (c.forward) w["forward_failures"] = vec_list(c.forward->witness_failures, 8);
  if (c.inverse) w["inverse_failures"] = vec_list(c.inverse->witness_failures, 8);
  return w;
}

void check_blending(CheckRecord& r, const OneStepSystem& sys, const BlendingRegionSpec& spec,
                    std::optional<double> h) {
  const auto cert = verify_blending_region(sys.maps(), spec, h);
  r.margin = cert.margin();
  r.lipschitz = blending_lipschitz(cert);
  r.parameters = {{"region", spec.to_json()}, {"covers", blending_params(cert)}};
  r.witnesses = failures_json(cert);
  finish(r, cert.pass());
}

void check_tangency(CheckRecord& r, const TangencyBlendingSpec& spec, const PipelineConfig& cfg) {
  const auto cert = verify_tangency_blending(spec, cfg.tangency_base_net, cfg.tangency_plane_net);
  r.margin = cert.cover.margin;
  r.lipschitz = cert.base_lipschitz;
  r.parameters = {{"region", spec.to_json()}, {"cover", cert.to_json()}};
  r.parameters["cover"].erase("witness_failures");
  r.witnesses = {{"failures", vec_list(cert.cover.witness_failures, 8)}};
  finish(r, cert.cover.pass);
}

void check_hyperbolicity(CheckRecord& ph, CheckRecord& fb, const OneStepSystem& sys, const PipelineConfig& cfg) {
  const auto rep = hyperbolicity_constants(sys, config_domain(cfg), cfg.hyperbolicity_samples, cfg.seed);
  ph.parameters = rep.to_json();
  ph.margin = std::min(rep.gamma - rep.nu_alpha, 1.0 / rep.nu_alpha - rep.gamma_hat_inv);
  finish(ph, rep.partially_hyperbolic);
  fb.parameters = rep.to_json();
  fb.margin = rep.gamma * rep.gamma_hat - rep.nu_alpha;
  finish(fb, rep.fiber_bunched);
}

void check_transition(CheckRecord& r, const OneStepSystem& sys, const ArcLayout& lay, const PipelineConfig& cfg) {
  const auto to = b2_tangency_spec(sys, lay);
  const PointPlane from{lay.p1, PlaneFrame::coordinate(2, {0})};
  const auto w = find_transition(sys.maps(), from, to, cfg.transition_max_len, cfg.transition_budget);
  r.parameters = {{"from", {{"point", vec_to_json(from.point)}, {"plane", from.plane.to_json()}}},
                  {"to", to.to_json()},
                  {"max_len", cfg.transition_max_len}};
  if (!w) {
    r.reason = "no transition word found";
    finish(r, false);
    return;
  }
  r.margin = w->depth;
  r.witnesses = {{"word", w->word},
                 {"endpoint", {{"point", vec_to_json(w->endpoint.point)}, {"plane", w->endpoint.plane.to_json()}}}};
  finish(r, static_cast<int>(w->word.size()) <= cfg.transition_max_len && w->depth > 0.0);
}

}  // namespace

// ---------------------------------------------------------------- config

json PipelineConfig::to_json() const {
  json j = {{"dimension", dimension},
            {"ell", ell},
            {"epsilon", epsilon},
            {"nu", nu},
            {"alpha", alpha},
            {"window", window},
            {"lattice_safety", lattice_safety},
            {"cap_fraction", cap_fraction},
            {"tangency_base_net", tangency_base_net},
            {"tangency_plane_net", tangency_plane_net},
            {"cone_opening", cone_opening},
            {"cone_expansion", cone_expansion},
            {"cone_samples", cone_samples},
            {"domain_lower", domain_lower},
            {"domain_upper", domain_upper},
            {"glob_eps", glob_eps},
            {"glob_step_fraction", glob_step_fraction},
            {"glob_accuracy", glob_accuracy},
            {"seed_radius", seed_radius},
            {"target_net", target_net},
            {"max_word_len", max_word_len},
            {"node_budget", node_budget},
            {"max_distortion", max_distortion},
            {"backward_globalization", backward_globalization},
            {"transition_max_len", transition_max_len},
            {"transition_budget", transition_budget},
            {"hyperbolicity_samples", hyperbolicity_samples},
            {"symplectic_samples", symplectic_samples},
            {"eta", eta},
            {"trials", trials},
            {"sweep_globalization", sweep_globalization},
            {"seed", seed},
            {"output", output},
            {"disabled_checks", disabled_checks}};
  j["blend_net"] = blend_net ? json(*blend_net) : json(nullptr);
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  if (!j.is_object()) throw ParamError("config must be a JSON object");
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  try {
    get("dimension", c.dimension);
    get("ell", c.ell);
    get("epsilon", c.epsilon);
    get("nu", c.nu);
    get("alpha", c.alpha);
    get("window", c.window);
    get("lattice_safety", c.lattice_safety);
    if (j.contains("blend_net") && !j.at("blend_net").is_null()) c.blend_net = j.at("blend_net").get<double>();
    get("cap_fraction", c.cap_fraction);
    get("tangency_base_net", c.tangency_base_net);
    get("tangency_plane_net", c.tangency_plane_net);
    get("cone_opening", c.cone_opening);
    get("cone_expansion", c.cone_expansion);
    get("cone_samples", c.cone_samples);
    get("domain_lower", c.domain_lower);
    get("domain_upper", c.domain_upper);
    get("glob_eps", c.glob_eps);
    get("glob_step_fraction", c.glob_step_fraction);
    get("glob_accuracy", c.glob_accuracy);
    get("seed_radius", c.seed_radius);
    get("target_net", c.target_net);
    get("max_word_len", c.max_word_len);
    get("node_budget", c.node_budget);
    get("max_distortion", c.max_distortion);
    get("backward_globalization", c.backward_globalization);
    get("transition_max_len", c.transition_max_len);
    get("transition_budget", c.transition_budget);
    get("hyperbolicity_samples", c.hyperbolicity_samples);
    get("symplectic_samples", c.symplectic_samples);
    get("eta", c.eta);
    get("trials", c.trials);
    get("sweep_globalization", c.sweep_globalization);
    get("seed", c.seed);
    get("output", c.output);
    get("disabled_checks", c.disabled_checks);
  } catch (const json::exception& e) {
    throw ParamError(std::string("bad config field: ") + e.what());
  }
  c.validate();
  return c;
}

void PipelineConfig::validate() const {
  if (dimension < 2 || dimension % 2 != 0) throw ParamError("dimension must be even and positive");
  if (ell < 1 || 2 * ell > dimension) throw ParamError("ell must satisfy 0 < ell <= c/2");
  if (!(epsilon >= 0.0)) throw ParamError("epsilon must be non-negative");
  if (!(nu > 0.0 && nu < 1.0)) throw ParamError("nu must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParamError("alpha must lie in (0, 1]");
  if (static_cast<int>(domain_lower.size()) != dimension || static_cast<int>(domain_upper.size()) != dimension)
    throw ParamError("domain corners must have the configured dimension");
  for (int i = 0; i < dimension; ++i)
    if (!(domain_upper[i] > domain_lower[i])) throw ParamError("empty domain");
  if (!(tangency_base_net > 0.0) || !(tangency_plane_net > 0.0) || !(target_net > 0.0))
    throw ParamError("net spacings must be positive");
  if (blend_net && !(*blend_net > 0.0)) throw ParamError("net spacings must be positive");
  if (!(seed_radius > 0.0) || !(glob_eps > 0.0)) throw ParamError("radii must be positive");
  if (trials < 0) throw ParamError("trials must be non-negative");
}

Region config_domain(const PipelineConfig& cfg) {
  return Region::box_from_corners(Eigen::Map<const Vec>(cfg.domain_lower.data(), cfg.domain_lower.size()),
                                  Eigen::Map<const Vec>(cfg.domain_upper.data(), cfg.domain_upper.size()));
}

// ---------------------------------------------------------------- arc

std::vector<int> ArcLayout::b1_symbols() const {
  std::vector<int> s{phi1};
  s.insert(s.end(), tangency1.begin(), tangency1.end());
  s.insert(s.end(), cu1.begin(), cu1.end());
  return s;
}

std::vector<int> ArcLayout::b2_symbols() const {
  std::vector<int> s(tangency2);
  s.push_back(phi2);
  return s;
}

json ArcLayout::to_json() const {
  return json{{"epsilon", epsilon},
              {"phi1", phi1},
              {"tangency1", tangency1},
              {"cu1", cu1},
              {"tangency2", tangency2},
              {"phi2", phi2},
              {"transition", transition},
              {"globalizers", globalizers},
              {"rotations", rotations},
              {"translates", translates},
              {"rotation_angles", rotation_angles},
              {"p1", vec_to_json(p1)},
              {"p2", vec_to_json(p2)},
              {"blend_radius", blend_radius},
              {"cap_radius", cap_radius},
              {"glob_step", glob_step}};
}

ArcSystem build_arc(const PipelineConfig& cfg) {
  cfg.validate();
  if (cfg.epsilon > 0.0) return build_positive(cfg, cfg.epsilon);
  ArcSystem ref = build_positive(cfg, 0.05);
  std::vector<FiberMap> ids(ref.system.maps().size(), FiberMap::identity(cfg.dimension));
  ArcSystem out{OneStepSystem(cfg.nu, cfg.alpha, std::move(ids), cfg.window), ref.layout};
  out.layout.epsilon = 0.0;
  out.layout.p2 = out.layout.p1;
  out.layout.blend_radius = 0.0;
  out.layout.cap_radius = 0.0;
  out.layout.lambda = Mat::Identity(cfg.dimension, cfg.dimension);
  out.layout.rotation_angles.assign(out.layout.rotation_angles.size(), 0.0);
  out.layout.glob_step = 0.0;
  return out;
}

OneStepSystem build_arc_system(const PipelineConfig& cfg) { return build_arc(cfg).system; }

BlendingRegionSpec b1_blending_spec(const ArcLayout& lay) {
  BlendingRegionSpec s;
  s.b = lay.b1();
  s.d = Region::ball(lay.p1, 3.0 * lay.blend_radius);
  s.symbols = lay.b1_symbols();
  s.kind = BlendingKind::Double;
  s.cs_index = 1;
  s.cu_index = 1;
  return s;
}

BlendingRegionSpec b2_blending_spec(const ArcLayout& lay) {
  BlendingRegionSpec s;
  s.b = lay.b2();
  s.d = Region::ball(lay.p2, 3.0 * lay.blend_radius);
  s.symbols = lay.b2_symbols();
  s.kind = BlendingKind::Cu;
  s.cs_index = 1;
  s.cu_index = 1;
  return s;
}

TangencyBlendingSpec b1_tangency_spec(const OneStepSystem& sys, const ArcLayout& lay) {
  TangencyBlendingSpec s;
  s.base = lay.b1();
  s.cap_center = PlaneFrame::coordinate(2, {0});
  s.cap_radius = lay.cap_radius;
  s.ell = 1;
  for (int k : lay.tangency1) s.maps.push_back(sys.map(k));
  return s;
}

TangencyBlendingSpec b2_tangency_spec(const OneStepSystem& sys, const ArcLayout& lay) {
  TangencyBlendingSpec s;
  s.base = lay.b2();
  s.cap_center = PlaneFrame::coordinate(2, {1});
  s.cap_radius = lay.cap_radius;
  s.ell = 1;
  // the cap about E^ss is covered by the inverse branches
  for (int k : lay.tangency2) s.maps.push_back(sys.map(k).inverse());
  return s;
}

// ---------------------------------------------------------------- certificate

json CheckRecord::to_json() const {
  json j = {{"name", name},
            {"hypothesis", hypothesis},
            {"status", status},
            {"required_for", required_for},
            {"parameters", parameters},
            {"witnesses", witnesses}};
  j["margin"] = margin ? json(*margin) : json(nullptr);
  if (lipschitz) j["lipschitz"] = *lipschitz;
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

const CheckRecord* Certificate::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

json Certificate::to_json() const {
  json checks_j = json::array();
  for (const auto& c : checks) checks_j.push_back(c.to_json());
  json prov = {{"config_hash", hex64(config_hash)}, {"seed", seed}, {"tool_version", BLENDERLAB_VERSION}};
  if (timestamp) prov["timestamp"] = *timestamp;
  json j = {{"schema", kCertificateSchema},
            {"overall", overall},
            {"verdicts", {{kTransitivity, robust_transitivity}, {kTangency, robust_tangency}}},
            {"checks", checks_j},
            {"provenance", prov}};
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

Certificate certify(const PipelineConfig& cfg) {
  Certificate cert;
  json hashed = cfg.to_json();
  hashed.erase("output");
  cert.config_hash = fnv1a(hashed.dump());
  cert.seed = cfg.seed;
  if (cfg.epsilon == 0.0) {
    cert.overall = "skipped";
    cert.reason = "arc endpoint is the identity";
    return cert;
  }

  const std::vector<std::string> both{kTransitivity, kTangency};
  const std::vector<std::string> trans{kTransitivity};
  const std::vector<std::string> tang{kTangency};

  ArcSystem arc;
  {
    CheckRecord r = make_record("construction", "arc of symplectic one-step maps", both);
    run_check(r, cfg, [&](CheckRecord& rec) {
      arc = build_arc(cfg);
      rec.parameters = {{"layout", arc.layout.to_json()}, {"maps", arc.system.alphabet()}};
      finish(rec, true);
    });
    cert.checks.push_back(r);
    if (r.status != "pass") {
      cert.overall = "fail";
      return cert;
    }
  }
  const OneStepSystem& sys = arc.system;
  const ArcLayout& lay = arc.layout;
  const Region domain = config_domain(cfg);

  {
    CheckRecord r = make_record("symplecticity", "every fiber map is symplectic", both);
    run_check(r, cfg, [&](CheckRecord& rec) {
      std::mt19937_64 rng(cfg.seed);
      const Vec lo = domain.lower(), hi = domain.upper();
      double worst = 0.0;
      int worst_map = 0;
      for (int k = 1; k <= sys.alphabet(); ++k) {
        for (int s = 0; s < cfg.symplectic_samples; ++s) {
          Vec x(cfg.dimension);
          for (int i = 0; i < cfg.dimension; ++i) x(i) = std::uniform_real_distribution<double>(lo(i), hi(i))(rng);
          const double d = is_symplectic_matrix(sys.map(k).jacobian(x)).defect;
          if (d > worst) {
            worst = d;
            worst_map = k;
          }
        }
      }
      rec.margin = 1e-8 - worst;
      rec.parameters = {{"tolerance", 1e-8}, {"samples_per_map", cfg.symplectic_samples}, {"max_defect", worst}};
      rec.witnesses = {{"worst_map", worst_map}};
      finish(rec, worst <= 1e-8);
    });
    cert.checks.push_back(r);
  }

  {
    CheckRecord ph = make_record("partial_hyperbolicity", "nu^alpha < gamma <= 1 <= gamma_hat^-1 < nu^-alpha", both);
    CheckRecord fb = make_record("fiber_bunching", "nu^alpha < gamma * gamma_hat", tang);
    const bool ph_off = std::count(cfg.disabled_checks.begin(), cfg.disabled_checks.end(), ph.name) > 0;
    const bool fb_off = std::count(cfg.disabled_checks.begin(), cfg.disabled_checks.end(), fb.name) > 0;
    CheckRecord ph_tmp = ph, fb_tmp = fb;
    try {
      if (!ph_off || !fb_off) check_hyperbolicity(ph_tmp, fb_tmp, sys, cfg);
    } catch (const Error& e) {
      ph_tmp.status = fb_tmp.status = "fail";
      ph_tmp.reason = fb_tmp.reason = std::string(e.kind()) + ": " + e.what();
    }
    run_check(ph, cfg, [&](CheckRecord& rec) { rec = ph_tmp; });
    run_check(fb, cfg, [&](CheckRecord& rec) { rec = fb_tmp; });
    cert.checks.push_back(ph);
    cert.checks.push_back(fb);
  }

  {
    CheckRecord r = make_record("hyperbolic_fixed_point", "hyperbolic fixed point in the blending region", both);
    run_check(r, cfg, [&](CheckRecord& rec) {
      const auto fp = hyperbolic_fixed_point(sys.map(lay.phi1));
      if (!fp) {
        rec.reason = "no fixed point";
        finish(rec, false);
        return;
      }
      json ev = json::array();
      for (const auto& e : fp->eigenvalues) ev.push_back({e.real(), e.imag()});
      rec.margin = lay.b1().depth(fp->point);
      rec.parameters = {{"symbol", lay.phi1}, {"region", lay.b1().to_json()}};
      rec.witnesses = {{"point", vec_to_json(fp->point)}, {"eigenvalues", ev}, {"s_index", fp->s_index}};
      finish(rec, fp->hyperbolic && *rec.margin > 0.0);
    });
    cert.checks.push_back(r);
  }

  {
    CheckRecord r = make_record("blending_B1_double", "B1 is a double blending region", both);
    run_check(r, cfg, [&](CheckRecord& rec) { check_blending(rec, sys, b1_blending_spec(lay), cfg.blend_net); });
    cert.checks.push_back(r);
  }
  {
    CheckRecord r = make_record("blending_B2_cu", "B2 is a cu-blending region", tang);
    run_check(r, cfg, [&](CheckRecord& rec) { check_blending(rec, sys, b2_blending_spec(lay), cfg.blend_net); });
    cert.checks.push_back(r);
  }
  {
    CheckRecord r = make_record("tangency_blending_B1", "blending region with tangency about E^uu", tang);
    run_check(r, cfg, [&](CheckRecord& rec) { check_tangency(rec, b1_tangency_spec(sys, lay), cfg); });
    cert.checks.push_back(r);
  }
  {
    CheckRecord r = make_record("tangency_blending_B2", "blending region with tangency about E^ss", tang);
    run_check(r, cfg, [&](CheckRecord& rec) { check_tangency(rec, b2_tangency_spec(sys, lay), cfg); });
    cert.checks.push_back(r);
  }
  {
    CheckRecord r = make_record("cone_uu_B1", "unstable cone field on B1", tang);
    run_check(r, cfg, [&](CheckRecord& rec) {
      ConeSpec cone{PlaneFrame::coordinate(2, {0}), cfg.cone_opening, ConeType::Unstable, cfg.cone_expansion};
      std::vector<FiberMap> maps;
      for (int k : lay.tangency1) maps.push_back(sys.map(k));
      const auto cc = verify_unstable_cone(maps, cone, lay.b1(), cfg.cone_samples, cfg.seed);
      rec.margin = std::min(cc.invariance_margin, cc.expansion_margin);
      rec.parameters = {{"cone", cone.to_json()}, {"result", cc.to_json()}};
      finish(rec, cc.pass);
    });
    cert.checks.push_back(r);
  }
  {
    CheckRecord r = make_record("cone_ss_B2", "stable cone field on B2", tang);
    run_check(r, cfg, [&](CheckRecord& rec) {
      ConeSpec cone{PlaneFrame::coordinate(2, {1}), cfg.cone_opening, ConeType::Stable, cfg.cone_expansion};
      std::vector<FiberMap> maps;
      for (int k : lay.tangency2) maps.push_back(sys.map(k));
      const auto cc = verify_unstable_cone(maps, cone, lay.b2(), cfg.cone_samples, cfg.seed);
      rec.margin = std::min(cc.invariance_margin, cc.expansion_margin);
      rec.parameters = {{"cone", cone.to_json()}, {"result", cc.to_json()}};
      finish(rec, cc.pass);
    });
    cert.checks.push_back(r);
  }
  {
    CheckRecord r = make_record("transition_B1_B2", "transition from the B1 tangency region to the B2 one", tang);
    run_check(r, cfg, [&](CheckRecord& rec) { check_transition(rec, sys, lay, cfg); });
    cert.checks.push_back(r);
  }

  auto globalization = [&](const std::string& name, SemigroupDirection dir) {
    CheckRecord r = make_record(name, dir == SemigroupDirection::Forward ? "B0 is forward globalized"
                                                                         : "B0 is backward globalized",
                                trans);
    run_check(r, cfg, [&](CheckRecord& rec) {
      std::vector<FiberMap> gens;
      for (int k : lay.globalizers) gens.push_back(sys.map(k));
      CoverageOptions opt;
      opt.node_budget = cfg.node_budget;
      opt.cell_size = 0.5 * lay.glob_step;
      opt.prune_region = domain.inflated(cfg.seed_radius);
      opt.required_margin = cfg.target_net;
      opt.max_distortion = cfg.max_distortion;
      const Region seed = Region::ball(lay.p1, cfg.seed_radius);
      const auto net = make_net(domain, cfg.target_net);
      const auto run = semigroup_coverage(gens, seed, net, cfg.max_word_len, dir, opt);
      rec.margin = run.margin - cfg.target_net;
      rec.parameters = {{"generators", lay.globalizers},
                        {"seed", seed.to_json()},
                        {"target", domain.to_json()},
                        {"target_net", cfg.target_net},
                        {"targets", run.targets.size()},
                        {"balls", run.balls.size()},
                        {"reached_len", run.reached_len},
                        {"step", lay.glob_step}};
      json words = json::array();
      for (std::size_t i = 0; i < run.targets.size() && words.size() < 8; i += std::max<std::size_t>(1, run.targets.size() / 8))
        if (run.witness[i] >= 0) {
          std::vector<int> word = run.word(run.witness[i]);
          for (int& s : word) s = lay.globalizers[s - 1];
          words.push_back({{"point", vec_to_json(run.targets[i])}, {"word", word}});
        }
      rec.witnesses = {{"words", words}, {"uncovered", vec_list(run.uncovered, 8)},
                       {"uncovered_count", run.uncovered.size()}};
      finish(rec, run.covered);
    });
    cert.checks.push_back(r);
  };
  globalization("globalization_forward", SemigroupDirection::Forward);
  if (cfg.backward_globalization) globalization("globalization_backward", SemigroupDirection::Backward);

  {
    CheckRecord r = make_record("tangency_codimension", "max(0, i2 - i1) < l <= min(c - i1, i2)", tang);
    run_check(r, cfg, [&](CheckRecord& rec) {
      const auto s1 = b1_blending_spec(lay);
      const auto s2 = b2_blending_spec(lay);
      const auto tc = tangency_codimension(s1.cu_index, s2.cs_index, cfg.ell, cfg.dimension);
      rec.parameters = {{"ind_cu_1", s1.cu_index}, {"ind_cs_2", s2.cs_index}, {"ell", cfg.ell},
                        {"c", cfg.dimension}, {"c_T", tc.c_t}};
      finish(rec, tc.admissible);
    });
    cert.checks.push_back(r);
  }

  auto verdict = [&](const char* v) {
    for (const auto& c : cert.checks)
      if (std::find(c.required_for.begin(), c.required_for.end(), v) != c.required_for.end() && c.status != "pass")
        return false;
    return true;
  };
  cert.robust_transitivity = verdict(kTransitivity);
  cert.robust_tangency = verdict(kTangency);
  cert.overall = cert.robust_transitivity && cert.robust_tangency ? "pass" : "fail";
  return cert;
}

// ---------------------------------------------------------------- sweep

json SweepTable::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows)
    rows_j.push_back({{"eta", r.eta}, {"trial", r.trial}, {"seed", r.seed}, {"pass", r.pass},
                      {"min_margin", r.min_margin}, {"failed", r.failed}});
  json j = {{"rows", rows_j}};
  j["largest_all_pass"] = largest_all_pass ? json(*largest_all_pass) : json(nullptr);
  j["smallest_any_fail"] = smallest_any_fail ? json(*smallest_any_fail) : json(nullptr);
  return j;
}

CoverMargins cover_margins(const Certificate& cert) {
  CoverMargins m{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& c : cert.checks) {
    if (c.name.rfind("blending_", 0) != 0 && c.name.rfind("tangency_blending_", 0) != 0) continue;
    if (c.margin) m.margin = std::min(m.margin, *c.margin);
    if (c.lipschitz) m.lipschitz = std::max(m.lipschitz, *c.lipschitz);
  }
  if (!std::isfinite(m.margin)) m.margin = 0.0;
  return m;
}

SweepTable robustness_sweep(const PipelineConfig& cfg, const std::vector<double>& etas, int trials) {
  if (!(cfg.epsilon > 0.0)) throw ParamError("sweeps need epsilon > 0");
  const ArcSystem arc = build_arc(cfg);
  const ArcLayout& lay = arc.layout;
  const Region domain = config_domain(cfg);
  // net spacings of the unperturbed covers are kept fixed across trials
  auto spacing = [&](const BlendingRegionSpec& spec, CoverDirection dir) {
    if (cfg.blend_net) return *cfg.blend_net;
    std::vector<FiberMap> fam;
    for (int s : spec.symbols) fam.push_back(arc.system.map(s));
    return blending_net_spacing(fam, spec.b, dir);
  };
  const auto s1 = b1_blending_spec(lay);
  const auto s2 = b2_blending_spec(lay);
  const double h1 = std::min(spacing(s1, CoverDirection::Forward), spacing(s1, CoverDirection::Inverse));
  const double h2 = spacing(s2, CoverDirection::Inverse);

  SweepTable table;
  for (std::size_t e = 0; e < etas.size(); ++e) {
    bool all_pass = true;
    bool any_fail = false;
    for (int t = 0; t < trials; ++t) {
      SweepRow row;
      row.eta = etas[e];
      row.trial = t;
      row.seed = cfg.seed * 1000003ULL + 1000ULL * e + static_cast<std::uint64_t>(t);
      row.min_margin = std::numeric_limits<double>::infinity();
      const OneStepSystem sys = perturb_system(arc.system, etas[e], row.seed, true, domain);
      auto record = [&](const std::string& name, bool ok, double margin) {
        row.min_margin = std::min(row.min_margin, margin);
        if (!ok) row.failed.push_back(name);
      };
      auto guarded = [&](const std::string& name, const std::function<std::pair<bool, double>()>& f) {
        try {
          const auto [ok, m] = f();
          record(name, ok, m);
        } catch (const Error&) {
          record(name, false, -std::numeric_limits<double>::infinity());
        }
      };
      guarded("blending_B1_double", [&] {
        const auto c = verify_blending_region(sys.maps(), s1, h1);
        return std::make_pair(c.pass(), c.margin());
      });
      guarded("blending_B2_cu", [&] {
        const auto c = verify_blending_region(sys.maps(), s2, h2);
        return std::make_pair(c.pass(), c.margin());
      });
      guarded("tangency_blending_B1", [&] {
        const auto c = verify_tangency_blending(b1_tangency_spec(sys, lay), cfg.tangency_base_net, cfg.tangency_plane_net);
        return std::make_pair(c.cover.pass, c.cover.margin);
      });
      guarded("tangency_blending_B2", [&] {
        const auto c = verify_tangency_blending(b2_tangency_spec(sys, lay), cfg.tangency_base_net, cfg.tangency_plane_net);
        return std::make_pair(c.cover.pass, c.cover.margin);
      });
      guarded("transition_B1_B2", [&] {
        const PointPlane from{lay.p1, PlaneFrame::coordinate(2, {0})};
        const auto w = find_transition(sys.maps(), from, b2_tangency_spec(sys, lay), cfg.transition_max_len,
                                       cfg.transition_budget);
        return std::make_pair(w.has_value(), w ? w->depth : -1.0);
      });
      guarded("partial_hyperbolicity", [&] {
        const auto rep = hyperbolicity_constants(sys, domain, cfg.hyperbolicity_samples, cfg.seed);
        return std::make_pair(rep.partially_hyperbolic, rep.gamma - rep.nu_alpha);
      });
      if (cfg.sweep_globalization) {
        guarded("globalization_forward", [&] {
          std::vector<FiberMap> gens;
          for (int k : lay.globalizers) gens.push_back(sys.map(k));
          CoverageOptions opt;
          opt.node_budget = cfg.node_budget;
          opt.cell_size = 0.5 * lay.glob_step;
          opt.prune_region = domain.inflated(cfg.seed_radius);
          opt.required_margin = cfg.target_net;
          opt.max_distortion = cfg.max_distortion;
          const auto run = semigroup_coverage(gens, Region::ball(lay.p1, cfg.seed_radius),
                                              make_net(domain, cfg.target_net), cfg.max_word_len,
                                              SemigroupDirection::Forward, opt);
          return std::make_pair(run.covered, run.margin - cfg.target_net);
        });
      }
      row.pass = row.failed.empty();
      all_pass = all_pass && row.pass;
      any_fail = any_fail || !row.pass;
      table.rows.push_back(std::move(row));
    }
    if (all_pass && (!table.largest_all_pass || etas[e] > *table.largest_all_pass)) table.largest_all_pass = etas[e];
    if (any_fail && (!table.smallest_any_fail || etas[e] < *table.smallest_any_fail)) table.smallest_any_fail = etas[e];
  }
  return table;
}

// ---------------------------------------------------------------- realization bookkeeping

std::vector<int> assign_cylinders_to_rectangles(int d, int num_rectangles, int cylinder_len) {
  if (d < 1 || cylinder_len < 1) throw ParamError("d and cylinder length must be positive");
  long long blocks = 1;
  for (int i = 0; i < cylinder_len; ++i) {
    blocks *= d;
    if (blocks > (1LL << 40)) throw ParamError("too many cylinders");
  }
  if (blocks != num_rectangles) throw ParamError("number of rectangles must equal d^cylinder_len");
  std::vector<int> k(num_rectangles);
  const long long per = blocks / d;
  for (long long b = 0; b < blocks; ++b) k[b] = static_cast<int>(b / per) + 1;
  return k;
}

FiberMap FiberIsotopy::at(double t) const {
  if (spec.steps <= 0) throw ParamError("fiber isotopy needs a fixed step count");
  BumpSpec s = spec;
  s.velocity = t * spec.velocity;
  return FiberMap::bump(s);
}

double InterfaceProfile::value(double rho) const {
  if (rho <= inner) return 1.0;
  if (rho >= outer) return 0.0;
  const double s = (rho - inner) / (outer - inner);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double InterfaceProfile::derivative(double rho) const {
  if (rho <= inner || rho >= outer) return 0.0;
  const double w = outer - inner;
  const double s = (rho - inner) / w;
  return -30.0 * s * s * (1.0 - s) * (1.0 - s) / w;
}

std::pair<Vec, Vec> product_map_apply(const Mat& base_linear, const FiberIsotopy& fiber,
                                      const InterfaceProfile& profile, const Vec& x, const Vec& y) {
  return {base_linear * x, fiber.at(profile.value(x.norm())).apply(y)};
}

Mat product_map_jacobian(const Mat& base_linear, const FiberIsotopy& fiber, const InterfaceProfile& profile,
                         const Vec& x, const Vec& y) {
  const int nb = static_cast<int>(x.size());
  const int nf = static_cast<int>(y.size());
  Mat df = Mat::Zero(nb + nf, nb + nf);
  df.topLeftCorner(nb, nb) = base_linear;
  const double rho = x.norm();
  const double t = profile.value(rho);
  df.bottomRightCorner(nf, nf) = fiber.at(t).jacobian(y);
  const double ds = profile.derivative(rho);
  if (ds != 0.0 && rho > 0.0) {
    const double h = 1e-6;
    const Vec dphi_dt = (fiber.at(t + h).apply(y) - fiber.at(t - h).apply(y)) / (2.0 * h);
    df.bottomLeftCorner(nf, nb) = dphi_dt * (ds / rho) * x.transpose();
  }
  return df;
}

json AuditReport::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows) rows_j.push_back({{"zone", r.zone}, {"rho", r.rho}, {"defect", r.defect}});
  return json{{"max_defect", max_defect}, {"inside", inside}, {"annulus", annulus}, {"outside", outside},
              {"rows", rows_j}};
}

AuditReport audit_product_map_symplecticity(const Mat& base_linear, const FiberIsotopy& fiber,
                                            const InterfaceProfile& profile,
                                            const std::vector<std::pair<Vec, Vec>>& points) {
  AuditReport rep;
  for (const auto& [x, y] : points) {
    const int nb = static_cast<int>(x.size());
    const int nf = static_cast<int>(y.size());
    Mat j = Mat::Zero(nb + nf, nb + nf);
    j.topLeftCorner(nb, nb) = canonical_j(nb);
    j.bottomRightCorner(nf, nf) = canonical_j(nf);
    const Mat df = product_map_jacobian(base_linear, fiber, profile, x, y);
    const double defect = max_abs(df.transpose() * j * df - j);
    const double rho = x.norm();
    AuditRow row{rho <= profile.inner ? "inside" : (rho >= profile.outer ? "outside" : "annulus"), rho, defect};
    double& zone = row.zone == "inside" ? rep.inside : (row.zone == "outside" ? rep.outside : rep.annulus);
    zone = std::max(zone, defect);
    rep.max_defect = std::max(rep.max_defect, defect);
    rep.rows.push_back(row);
  }
  return rep;
}

AuditReport audit_realization(const PipelineConfig& cfg, int samples_per_zone) {
  cfg.validate();
  const int c = cfg.dimension;
  Mat base = Mat::Zero(2, 2);
  base(0, 0) = 2.0;
  base(1, 1) = 0.5;
  const Region domain = config_domain(cfg);
  const Vec center = domain.lower() + (domain.upper() - domain.lower()) / 3.0;
  FiberIsotopy iso;
  if (cfg.epsilon > 0.0 && c == 2) {
    const ArcSystem arc = build_arc(cfg);
    const Vec t = arc.system.map(arc.layout.tangency1.front()).apply(center) -
                  arc.system.map(arc.layout.phi1).apply(center);
    const double r_in = arc.layout.blend_radius;
    const FiberMap bump = hamiltonian_bump_translation(center, r_in, r_in + 5.0 * t.norm(), t);
    iso.spec = bump.bump_spec();
  } else {
    iso.spec.core = BumpCore::point(center);
    iso.spec.plateau = 0.25;
    iso.spec.outer = 0.5;
    iso.spec.velocity = Vec::Zero(c);
    iso.spec.steps = 1;
  }
  const InterfaceProfile prof{1.0, 2.0};
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g;
  std::vector<std::pair<Vec, Vec>> pts;
  const double reach = iso.spec.outer + iso.spec.core.extent();
  for (int zone = 0; zone < 3; ++zone) {
    for (int k = 0; k < samples_per_zone; ++k) {
      const double rho = zone == 0 ? u(rng) : (zone == 1 ? 1.0 + u(rng) : 2.0 + u(rng));
      Vec dir(2);
      dir << g(rng), g(rng);
      Vec ydir(c);
      for (int i = 0; i < c; ++i) ydir(i) = g(rng);
      const Vec y = center + reach * std::sqrt(u(rng)) * ydir.normalized();
      pts.emplace_back(rho * dir.normalized(), y);
    }
  }
  return audit_product_map_symplecticity(base, iso, prof, pts);
}

}  // namespace blenderlab
