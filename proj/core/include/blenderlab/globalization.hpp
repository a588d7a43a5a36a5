#pragma once

#include "blenderlab/errors.hpp"
#include "blenderlab/fiber_map.hpp"
#include "blenderlab/region.hpp"
#include "blenderlab/skewproduct.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace blenderlab {

enum class SemigroupDirection { Forward, Backward };

// One recorded image of the seed ball. parent == -1 marks the seed itself.
struct RecordedBall {
  Vec center;
  double radius = 0.0;
  int parent = -1;
  int symbol = 0;  // 1-based generator index applied to the parent
  int depth = 0;
};

struct SemigroupRun {
  std::vector<FiberMap> generators;
  Region seed;
  SemigroupDirection direction = SemigroupDirection::Forward;
  int max_word_len = 0;
  int reached_len = 0;
  std::vector<RecordedBall> balls;
  std::vector<int> frontier;          // ball indices of the last expanded layer
  std::vector<double> layer_reach;    // per layer: max over balls of |center - seed centre| + radius
  std::vector<Vec> targets;
  std::vector<int> witness;           // per target: ball index or -1
  std::vector<double> target_margin;  // per target: best radius - distance
  bool covered = false;
  double margin = 0.0;                // min over targets of target_margin
  std::vector<Vec> uncovered;

  // generator symbols, first applied first
  std::vector<int> word(int ball) const;
  std::vector<std::vector<int>> witness_words() const;
  json to_json(std::size_t max_witnesses = 32) const;
};

class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::shared_ptr<const SemigroupRun> partial)
      : Error(what), partial_(std::move(partial)) {}
  const char* kind() const noexcept override { return "BudgetError"; }
  // null when the search that ran out was not a semigroup coverage run
  bool has_partial() const { return static_cast<bool>(partial_); }
  const SemigroupRun& partial() const { return *partial_; }

 private:
  std::shared_ptr<const SemigroupRun> partial_;
};

struct CoverageOptions {
  std::size_t node_budget = 4'000'000;
  double cell_size = 0.0;                // dedup grid; 0 picks half the smallest seed displacement
  std::optional<Region> prune_region;    // balls centred outside are not expanded
  double required_margin = 0.0;          // a target counts as covered when its margin exceeds this
  // generators whose Lipschitz bound on the current ball exceeds this are not applied; pruning
  // only loses coverage, it never adds any
  double max_distortion = std::numeric_limits<double>::infinity();
  bool stop_when_covered = true;
};

// c + 1 bumps translating by delta * u_i on B_eps(U0), identity outside B_2eps(U0),
// delta = step_fraction * kappa_c * eps. Hamiltonian in even dimension.
std::vector<FiberMap> local_translation_family(const Region& u0, double eps, double step_fraction = 0.9,
                                               double accuracy = 1e-6);

// Breadth-first expansion of the seed ball under words in the generators (their inverses when
// backward). Image balls are inner balls: centre image, radius / local inverse Lipschitz bound.
SemigroupRun semigroup_coverage(const std::vector<FiberMap>& gens, const Region& seed,
                                const std::vector<Vec>& target_net, int max_word_len,
                                SemigroupDirection direction, const CoverageOptions& opts = {});

struct ChartOptions {
  double step_fraction = 0.9;
  double accuracy = 1e-6;
};

struct ChartFamily {
  std::vector<FiberMap> generators;            // class-major: class k, direction i at k*(c+1)+i
  std::vector<std::vector<Region>> class_cores;  // chart cores per colour class
  double spacing = 0.0;
  double eps = 0.0;
  double step = 0.0;                           // delta
};

// Charts of collar eps in c + 1 colour classes with pairwise disjoint supports inside a class.
// c = 2 uses a 3-coloured hexagonal ball atlas of spacing eps / 0.13, other c the faces of a cubic
// lattice of spacing 10 c eps (class = face dimension).
ChartFamily chart_family(const Region& domain, double eps, const ChartOptions& opts = {});
std::vector<FiberMap> chart_family_globalization(const Region& domain, double eps, const ChartOptions& opts = {});

// Semigroup orbit of B0 under the system's maps (its subset) covers K_net within n_max steps.
bool check_RT_condition(const OneStepSystem& sys, const Region& b0, const std::vector<Vec>& k_net, int n_max,
                        const CoverageOptions& opts = {});

}  // namespace blenderlab
