#include "blenderlab/globalization.hpp"

#include "blenderlab/cover.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>

namespace blenderlab {

namespace {

using Key = std::vector<long long>;

struct KeyHash {
  std::size_t operator()(const Key& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (long long v : k) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

Key key_of(const Vec& x, double cell) {
  Key k(x.size());
  for (int i = 0; i < x.size(); ++i) k[i] = static_cast<long long>(std::floor(x(i) / cell));
  return k;
}

// Image of the open ball B(c, r) contains B(out_c, out_r).
bool image_ball(const FiberMap& g, bool forward, const Vec& c, double r, Vec& out_c, double& out_r) {
  out_c = forward ? g.apply(c) : g.apply_inverse(c);
  auto back = [&](double rad) { return forward ? g.inverse_lipschitz_on(out_c, rad) : g.lipschitz_on(out_c, rad); };
  double l = back(r);
  if (!(l > 0.0) || !std::isfinite(l)) return false;
  if (l < 1.0) l = std::max(l, back(r / l));
  out_r = r / l;
  return out_c.allFinite() && out_r > 0.0;
}

class TargetIndex {
 public:
  TargetIndex(const std::vector<Vec>& pts, double cell) : pts_(pts), cell_(cell) {
    for (std::size_t i = 0; i < pts.size(); ++i) grid_[key_of(pts[i], cell)].push_back(static_cast<int>(i));
  }

  template <class F>
  void for_each_near(const Vec& c, double rad, F&& f) const {
    if (pts_.empty()) return;
    const int dim = static_cast<int>(c.size());
    const Key lo = key_of(c.array() - rad, cell_);
    const Key hi = key_of(c.array() + rad, cell_);
    double cells = 1.0;
    for (int i = 0; i < dim; ++i) cells *= static_cast<double>(hi[i] - lo[i] + 1);
    if (cells > 4.0 * static_cast<double>(pts_.size())) {
      for (std::size_t i = 0; i < pts_.size(); ++i) f(static_cast<int>(i));
      return;
    }
    Key k = lo;
    while (true) {
      auto it = grid_.find(k);
      if (it != grid_.end())
        for (int i : it->second) f(i);
      int ax = 0;
      while (ax < dim && k[ax] == hi[ax]) {
        k[ax] = lo[ax];
        ++ax;
      }
      if (ax == dim) break;
      ++k[ax];
    }
  }

 private:
  const std::vector<Vec>& pts_;
  double cell_;
  std::unordered_map<Key, std::vector<int>, KeyHash> grid_;
};

double point_box_distance(const Vec& x, const Vec& lo, const Vec& hi) {
  return (x - x.cwiseMax(lo).cwiseMin(hi)).norm();
}

double box_box_distance(const Vec& lo1, const Vec& hi1, const Vec& lo2, const Vec& hi2) {
  const Vec gap = (lo2 - hi1).cwiseMax(lo1 - hi2).cwiseMax(0.0);
  return gap.norm();
}

}  // namespace

std::vector<int> SemigroupRun::word(int ball) const {
  std::vector<int> w;
  for (int i = ball; i >= 0 && balls[i].parent >= 0; i = balls[i].parent) w.push_back(balls[i].symbol);
  std::reverse(w.begin(), w.end());
  return w;
}

std::vector<std::vector<int>> SemigroupRun::witness_words() const {
  std::vector<std::vector<int>> out;
  for (int b : witness) out.push_back(b >= 0 ? word(b) : std::vector<int>{});
  return out;
}

json SemigroupRun::to_json(std::size_t max_witnesses) const {
  json wit = json::array();
  for (std::size_t i = 0; i < targets.size() && wit.size() < max_witnesses; ++i) {
    if (witness[i] < 0) continue;
    const auto& b = balls[witness[i]];
    wit.push_back({{"point", vec_to_json(targets[i])},
                   {"word", word(witness[i])},
                   {"ball", Region::ball(b.center, b.radius).to_json()}});
  }
  json unc = json::array();
  for (std::size_t i = 0; i < uncovered.size() && i < max_witnesses; ++i) unc.push_back(vec_to_json(uncovered[i]));
  return json{{"direction", direction == SemigroupDirection::Forward ? "forward" : "backward"},
              {"seed", seed.to_json()},
              {"generators", generators.size()},
              {"max_word_len", max_word_len},
              {"reached_len", reached_len},
              {"balls", balls.size()},
              {"targets", targets.size()},
              {"covered", covered},
              {"margin", margin},
              {"uncovered_count", uncovered.size()},
              {"uncovered", unc},
              {"witnesses", wit}};
}

namespace {

// steps: per-direction integrator step counts; filled on first use, reused for congruent cores
std::vector<FiberMap> translation_bumps(const Region& u0, double eps, double step_fraction, double accuracy,
                                        std::vector<int>* steps) {
  if (!(eps > 0.0)) throw ParamError("eps must be positive");
  if (!(step_fraction > 0.0 && step_fraction < 1.0)) throw ParamError("step fraction must lie in (0, 1)");
  const int c = u0.dimension();
  const auto dirs = simplex_directions(c);
  const double delta = step_fraction * direction_set_constant(dirs) * eps;
  const bool reuse = steps && steps->size() == dirs.size();
  std::vector<FiberMap> out;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    BumpSpec s;
    s.core = BumpCore::from_region(u0);
    s.plateau = eps + delta;
    s.outer = 2.0 * eps;
    s.velocity = delta * dirs[i];
    s.hamiltonian = c % 2 == 0;
    s.accuracy = accuracy;
    if (reuse) s.steps = (*steps)[i];
    out.push_back(FiberMap::bump(s));
  }
  if (steps && !reuse)
    for (const auto& f : out) steps->push_back(f.bump_steps());
  return out;
}

std::string shape_key(const Region& r) {
  if (r.kind() == Region::Kind::Ball) return "b" + std::to_string(r.radius());
  std::string k = "x";
  for (int i = 0; i < r.dimension(); ++i) k += std::to_string(r.half_widths()(i)) + ",";
  return k;
}

}  // namespace

std::vector<FiberMap> local_translation_family(const Region& u0, double eps, double step_fraction,
                                               double accuracy) {
  return translation_bumps(u0, eps, step_fraction, accuracy, nullptr);
}


SemigroupRun semigroup_coverage(const std::vector<FiberMap>& gens, const Region& seed,
                                const std::vector<Vec>& target_net, int max_word_len,
                                SemigroupDirection direction, const CoverageOptions& opts) {
  if (max_word_len < 1) throw ParamError("max_word_len must be at least 1");
  if (seed.kind() != Region::Kind::Ball) throw ParamError("seed must be a ball");
  const int c = seed.dimension();
  for (const auto& g : gens)
    if (g.dimension() != c) throw DimensionError("generator dimension mismatch");
  for (const auto& p : target_net)
    if (p.size() != c) throw DimensionError("target dimension mismatch");

  const bool fwd = direction == SemigroupDirection::Forward;
  auto run = std::make_shared<SemigroupRun>();
  run->generators = gens;
  run->seed = seed;
  run->direction = direction;
  run->max_word_len = max_word_len;
  run->targets = target_net;
  run->witness.assign(target_net.size(), -1);
  run->target_margin.assign(target_net.size(), -std::numeric_limits<double>::infinity());

  double cell = opts.cell_size;
  if (!(cell > 0.0)) {
    double step = std::numeric_limits<double>::infinity();
    for (const auto& g : gens) {
      const double d = ((fwd ? g.apply(seed.center()) : g.apply_inverse(seed.center())) - seed.center()).norm();
      if (d > 1e-12) step = std::min(step, d);
    }
    cell = std::isfinite(step) ? step / 2.0 : seed.radius() / 4.0;
  }
  const TargetIndex index(run->targets, std::max(cell, seed.radius()));

  std::size_t covered_count = 0;
  auto update_targets = [&](int b) {
    const auto& ball = run->balls[b];
    index.for_each_near(ball.center, ball.radius, [&](int i) {
      const double m = ball.radius - (run->targets[i] - ball.center).norm();
      if (m > run->target_margin[i]) {
        if (!(run->target_margin[i] > opts.required_margin) && m > opts.required_margin) ++covered_count;
        run->target_margin[i] = m;
        run->witness[i] = b;
      }
    });
  };
  auto all_covered = [&] { return covered_count == run->targets.size(); };

  std::unordered_map<Key, int, KeyHash> grid;
  run->balls.push_back({seed.center(), seed.radius(), -1, 0, 0});
  grid[key_of(seed.center(), cell)] = 0;
  update_targets(0);
  run->layer_reach.push_back(seed.radius());
  std::vector<int> layer{0};

  for (int depth = 1; depth <= max_word_len && !gens.empty(); ++depth) {
    if (opts.stop_when_covered && all_covered()) break;
    std::vector<int> next;
    double reach = 0.0;
    for (int idx : layer) {
      const Vec center = run->balls[idx].center;
      const double radius = run->balls[idx].radius;
      if (opts.prune_region && !opts.prune_region->contains_closed(center)) continue;
      for (std::size_t g = 0; g < gens.size(); ++g) {
        if (std::isfinite(opts.max_distortion)) {
          const double l = fwd ? gens[g].lipschitz_on(center, radius) : gens[g].inverse_lipschitz_on(center, radius);
          if (l > opts.max_distortion) continue;
        }
        Vec oc;
        double orad = 0.0;
        if (!image_ball(gens[g], fwd, center, radius, oc, orad)) continue;
        Key k = key_of(oc, cell);
        auto it = grid.find(k);
        if (it != grid.end() && !(orad > 1.01 * run->balls[it->second].radius)) continue;
        const int nb = static_cast<int>(run->balls.size());
        run->balls.push_back({oc, orad, idx, static_cast<int>(g) + 1, depth});
        grid[std::move(k)] = nb;
        next.push_back(nb);
        update_targets(nb);
        reach = std::max(reach, (oc - seed.center()).norm() + orad);
        if (run->balls.size() > opts.node_budget) {
          run->reached_len = depth;
          run->frontier = next;
          throw BudgetError("semigroup coverage exceeded its node budget", run);
        }
      }
    }
    if (next.empty()) break;
    run->layer_reach.push_back(std::max(reach, run->layer_reach.back()));
    run->reached_len = depth;
    layer = std::move(next);
  }
  run->frontier = layer;

  run->covered = all_covered();
  run->margin = 0.0;
  if (!run->targets.empty()) {
    run->margin = *std::min_element(run->target_margin.begin(), run->target_margin.end());
    if (!std::isfinite(run->margin)) run->margin = -std::numeric_limits<double>::max();
  }
  for (std::size_t i = 0; i < run->targets.size(); ++i)
    if (!(run->target_margin[i] > opts.required_margin)) run->uncovered.push_back(run->targets[i]);
  return *run;
}

ChartFamily chart_family(const Region& domain, double eps, const ChartOptions& opts) {
  if (!(eps > 0.0)) throw ParamError("eps must be positive");
  if (domain.kind() != Region::Kind::Box) throw ParamError("domain must be a box");
  const int c = domain.dimension();
  const Vec lo = domain.lower();
  const Vec hi = domain.upper();
  ChartFamily fam;
  fam.eps = eps;
  fam.step = opts.step_fraction * direction_set_constant(simplex_directions(c)) * eps;
  fam.class_cores.assign(c + 1, {});

  if (c == 2) {
    const double s = eps / 0.13;
    const double core = 0.59 * s;
    const double reach = core + 2.0 * eps;
    fam.spacing = s;
    const Vec a1 = (Vec(2) << s, 0.0).finished();
    const Vec a2 = (Vec(2) << 0.5 * s, 0.5 * std::sqrt(3.0) * s).finished();
    const int nj = static_cast<int>(std::ceil((hi(1) - lo(1) + 2.0 * reach) / a2(1))) + 1;
    const int ni = static_cast<int>(std::ceil((hi(0) - lo(0) + 2.0 * reach) / s)) + nj + 1;
    for (int j = -nj; j <= nj; ++j) {
      for (int i = -ni; i <= ni; ++i) {
        const Vec p = lo + i * a1 + j * a2;
        if (point_box_distance(p, lo, hi) >= reach) continue;
        const int colour = ((i - j) % 3 + 3) % 3;
        fam.class_cores[colour].push_back(Region::ball(p, core));
      }
    }
  } else {
    const double s = 10.0 * c * eps;
    fam.spacing = s;
    // gap boundaries b_0 < ... < b_{c-1}; a k-face keeps distance >= sigma_k = b_{c-k} from the lattice
    // along free axes and stays within tau_k = b_{c-k-1} of it along fixed axes
    auto boundary = [&](int j) { return 2.5 * eps + 5.0 * j * eps; };
    std::vector<long long> n_lo(c), n_hi(c);
    for (int i = 0; i < c; ++i) {
      n_lo[i] = -1;
      n_hi[i] = static_cast<long long>(std::ceil((hi(i) - lo(i)) / s)) + 1;
    }
    for (unsigned mask = 0; mask < (1u << c); ++mask) {  // bit set = free axis
      const int k = __builtin_popcount(mask);
      const double sigma = k > 0 ? boundary(c - k) : 0.0;
      const double tau = k < c ? boundary(c - k - 1) : 0.0;
      std::vector<long long> m(n_lo);
      while (true) {
        Vec center(c), hw(c);
        for (int i = 0; i < c; ++i) {
          if (mask & (1u << i)) {
            center(i) = lo(i) + (static_cast<double>(m[i]) + 0.5) * s;
            hw(i) = 0.5 * s - sigma;
          } else {
            center(i) = lo(i) + static_cast<double>(m[i]) * s;
            hw(i) = tau;
          }
        }
        if (box_box_distance(center - hw, center + hw, lo, hi) < 2.0 * eps)
          fam.class_cores[k].push_back(Region::box(center, hw));
        int ax = 0;
        while (ax < c && m[ax] == n_hi[ax]) {
          m[ax] = n_lo[ax];
          ++ax;
        }
        if (ax == c) break;
        ++m[ax];
      }
    }
  }

  std::map<std::string, std::vector<int>> steps;
  for (int k = 0; k <= c; ++k) {
    std::vector<std::vector<FiberMap>> by_dir(c + 1);
    for (const auto& core : fam.class_cores[k]) {
      auto fam_k = translation_bumps(core, eps, opts.step_fraction, opts.accuracy, &steps[shape_key(core)]);
      for (int i = 0; i <= c; ++i) by_dir[i].push_back(fam_k[i]);
    }
    for (int i = 0; i <= c; ++i)
      fam.generators.push_back(by_dir[i].empty() ? FiberMap::identity(c) : FiberMap::glued(by_dir[i]));
  }
  return fam;
}

std::vector<FiberMap> chart_family_globalization(const Region& domain, double eps, const ChartOptions& opts) {
  return chart_family(domain, eps, opts).generators;
}

bool check_RT_condition(const OneStepSystem& sys, const Region& b0, const std::vector<Vec>& k_net, int n_max,
                        const CoverageOptions& opts) {
  std::vector<FiberMap> gens;
  for (int s : sys.subset()) gens.push_back(sys.map(s));
  return semigroup_coverage(gens, b0, k_net, n_max, SemigroupDirection::Forward, opts).covered;
}

}  // namespace blenderlab
