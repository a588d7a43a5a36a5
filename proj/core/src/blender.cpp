#include "blenderlab/blender.hpp"

#include "blenderlab/errors.hpp"
#include "blenderlab/skewproduct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blenderlab {

std::string to_string(BlendingKind k) {
  switch (k) {
    case BlendingKind::Cs:
      return "cs";
    case BlendingKind::Cu:
      return "cu";
    case BlendingKind::Double:
      return "double";
  }
  return "cs";
}

BlendingKind blending_kind_from_string(const std::string& s) {
  if (s == "cs") return BlendingKind::Cs;
  if (s == "cu") return BlendingKind::Cu;
  if (s == "double") return BlendingKind::Double;
  throw ParamError("unknown blending kind '" + s + "'");
}

json BlendingRegionSpec::to_json() const {
  return json{{"B", b.to_json()},       {"D", d.to_json()},         {"symbols", symbols},
              {"kind", to_string(kind)}, {"cs_index", cs_index}, {"cu_index", cu_index}};
}

bool BlendingCertificates::pass() const {
  if (!forward && !inverse) return false;
  return (!forward || forward->pass) && (!inverse || inverse->pass);
}

double BlendingCertificates::margin() const {
  double m = std::numeric_limits<double>::infinity();
  if (forward) m = std::min(m, forward->margin);
  if (inverse) m = std::min(m, inverse->margin);
  return m;
}

json BlendingCertificates::to_json() const {
  json j = json::object();
  if (forward) j["forward"] = forward->to_json();
  if (inverse) j["inverse"] = inverse->to_json();
  j["pass"] = pass();
  return j;
}

double blending_net_spacing(const std::vector<FiberMap>& maps, const Region& b, CoverDirection dir) {
  double lip = 1.0;
  for (const auto& f : maps)
    lip = std::max(lip, dir == CoverDirection::Forward ? f.inverse_lipschitz_on(b.center(), b.circumradius())
                                                       : f.lipschitz_on(b.center(), b.circumradius()));
  // margin target eps/20 with B of radius eps/2
  return default_net_spacing(b.circumradius() / 10.0, lip);
}

BlendingRegion build_blending_region(const FiberMap& phi, double eps, BlendingKind kind, const BlenderOptions& opts) {
  if (!(eps > 0.0)) throw ParamError("eps must be positive");
  if (!phi.is_affine()) throw ShapeError("blending construction needs an affine map");
  const auto fp = hyperbolic_fixed_point(phi);
  if (!fp || !fp->hyperbolic) throw ParamError("map has no hyperbolic fixed point");
  const int c = phi.dimension();
  const Mat lin = phi.linear_part();
  const Vec off = phi.offset();
  const double radius = 0.5 * eps;

  BlendingRegion out;
  out.fixed_point = fp->point;
  out.maps.push_back(phi);
  auto add = [&](const Vec& t) {
    if (t.norm() <= 1e-14) return;  // phi itself is already there
    out.maps.push_back(FiberMap::affine(lin, off + t));
  };
  if (kind == BlendingKind::Cs || kind == BlendingKind::Double) {
    const auto lat = lattice_translate_centers(radius, lin, opts.safety);
    for (const auto& t : lat.centers) add(t);
  }
  if (kind == BlendingKind::Cu || kind == BlendingKind::Double) {
    const Mat inv = lin.inverse();
    const auto lat = lattice_translate_centers(radius, inv, opts.safety);
    // (T o phi)^{-1}(B) is centred at p - lin^{-1} t
    for (const auto& s : lat.centers) add(-(lin * s));
  }
  out.spec.b = Region::ball(fp->point, radius);
  out.spec.d = Region::ball(fp->point, 3.0 * radius);
  out.spec.kind = kind;
  out.spec.cs_index = fp->s_index;
  out.spec.cu_index = c - fp->s_index;
  for (int i = 1; i <= static_cast<int>(out.maps.size()); ++i) out.spec.symbols.push_back(i);
  return out;
}

BlendingCertificates verify_blending_region(const std::vector<FiberMap>& maps, const BlendingRegionSpec& spec,
                                            std::optional<double> h) {
  std::vector<FiberMap> family;
  if (spec.symbols.empty()) {
    family = maps;
  } else {
    for (int s : spec.symbols) {
      if (s < 1 || s > static_cast<int>(maps.size())) throw ParamError("spec symbol out of range");
      family.push_back(maps[s - 1]);
    }
  }
  BlendingCertificates out;
  if (spec.kind != BlendingKind::Cu) {
    const double hh = h ? *h : blending_net_spacing(family, spec.b, CoverDirection::Forward);
    out.forward = verify_open_cover(family, spec.b, CoverDirection::Forward, hh);
  }
  if (spec.kind != BlendingKind::Cs) {
    const double hh = h ? *h : blending_net_spacing(family, spec.b, CoverDirection::Inverse);
    out.inverse = verify_open_cover(family, spec.b, CoverDirection::Inverse, hh);
  }
  return out;
}

BlenderIndices blender_indices(const std::vector<FiberMap>& maps, const Region& b) {
  if (maps.empty()) throw ParamError("no maps");
  const Mat ref = maps.front().jacobian(b.center());
  const double scale = spectral_norm(ref);
  for (const auto& f : maps)
    if (spectral_norm(f.jacobian(b.center()) - ref) > 0.1 * scale)
      throw ParamError("maps do not share a common linear part within 10%");
  Eigen::JacobiSVD<Mat> svd(ref);
  BlenderIndices idx;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    if (std::abs(s - 1.0) <= 1e-6) throw IndexError("a singular value is indistinguishable from 1");
    if (s < 1.0)
      ++idx.cs_index;
    else
      ++idx.cu_index;
  }
  return idx;
}

}  // namespace blenderlab
