#pragma once

#include "blenderlab/cover.hpp"
#include "blenderlab/fiber_map.hpp"
#include "blenderlab/region.hpp"

#include <optional>
#include <string>
#include <vector>

namespace blenderlab {

enum class BlendingKind { Cs, Cu, Double };
std::string to_string(BlendingKind k);
BlendingKind blending_kind_from_string(const std::string& s);

struct BlendingRegionSpec {
  Region b;
  Region d;
  std::vector<int> symbols;  // 1-based indices into the map list
  BlendingKind kind = BlendingKind::Cs;
  int cs_index = 0;
  int cu_index = 0;

  json to_json() const;
};

struct BlendingRegion {
  std::vector<FiberMap> maps;
  BlendingRegionSpec spec;
  Vec fixed_point;
};

struct BlenderOptions {
  double safety = 0.6;
  std::optional<double> net_spacing;
};

// B = B_{eps/2}(p), D = B_{3 eps/2}(p) about the hyperbolic fixed point p of phi; maps are T_i o phi.
BlendingRegion build_blending_region(const FiberMap& phi, double eps, BlendingKind kind,
                                     const BlenderOptions& opts = {});

struct BlendingCertificates {
  std::optional<CoverCertificate> forward;
  std::optional<CoverCertificate> inverse;
  bool pass() const;
  double margin() const;
  json to_json() const;
};

BlendingCertificates verify_blending_region(const std::vector<FiberMap>& maps, const BlendingRegionSpec& spec,
                                            std::optional<double> h = std::nullopt);

struct BlenderIndices {
  int cs_index = 0;
  int cu_index = 0;
};

BlenderIndices blender_indices(const std::vector<FiberMap>& maps, const Region& b);

// net spacing used by blending covers when none is given: (radius(B)/10) / (4 L)
double blending_net_spacing(const std::vector<FiberMap>& maps, const Region& b, CoverDirection dir);

}  // namespace blenderlab
