#include "doctest.h"
#include "helpers.hpp"

#include "blenderlab/cover.hpp"
#include "blenderlab/globalization.hpp"
#include "blenderlab/symplectic.hpp"

#include <algorithm>
#include <cmath>

using namespace blenderlab;
using testutil::vec1;
using testutil::vec2;

namespace {

FiberMap shift(double a, double b) { return FiberMap::affine(Mat::Identity(2, 2), vec2(a, b)); }

std::vector<FiberMap> axis_shifts(double t) { return {shift(t, 0), shift(-t, 0), shift(0, t), shift(0, -t)}; }

const Region kSquare = Region::box_from_corners(vec2(0.4, 0.4), vec2(2.6, 2.6));
const Region kSeed = Region::ball(vec2(0.5, 0.5), 0.25);

std::size_t covered_count(const SemigroupRun& run) {
  return static_cast<std::size_t>(
      std::count_if(run.target_margin.begin(), run.target_margin.end(), [](double m) { return m > 0.0; }));
}

double region_gap(const Region& a, const Region& b) {
  if (a.kind() == Region::Kind::Ball) return (a.center() - b.center()).norm() - a.radius() - b.radius();
  const Vec gap = (b.lower() - a.upper()).cwiseMax(a.lower() - b.upper()).cwiseMax(0.0);
  return gap.norm();
}

}  // namespace

TEST_CASE("local translation family in one dimension") {
  const Region u0 = Region::box_from_corners(vec1(0.0), vec1(1.0));
  const auto fam = local_translation_family(u0, 0.1);
  REQUIRE(fam.size() == 2);
  double plus = 0.0, minus = 0.0;
  for (const auto& f : fam) {
    const double d = f.apply(vec1(0.5))(0) - 0.5;
    (d > 0 ? plus : minus) = d;
    // within eps of U0 the map is still a pure translation
    CHECK(f.apply(vec1(-0.05))(0) + 0.05 == doctest::Approx(d).epsilon(1e-9));
    CHECK(f.apply(vec1(1.25))(0) == 1.25);
    CHECK(f.apply(vec1(-0.21))(0) == -0.21);
  }
  CHECK(plus == doctest::Approx(0.09));
  CHECK(minus == doctest::Approx(-0.09));
  CHECK_THROWS_AS(local_translation_family(u0, 0.1, 1.0), ParamError);
  CHECK_THROWS_AS(local_translation_family(u0, 0.0), ParamError);
}

TEST_CASE("local translation family in the plane is symplectic") {
  const Region u0 = Region::ball(vec2(0.0, 0.0), 0.5);
  const auto fam = local_translation_family(u0, 0.2);
  REQUIRE(fam.size() == 3);
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (const auto& f : fam) {
    for (int i = 0; i < 100; ++i) {
      const Vec x = testutil::uniform_in_ball(rng, u0.center(), 1.0);
      worst = std::max(worst, is_symplectic_matrix(f.jacobian(x)).defect);
    }
    CHECK((f.apply(vec2(0.95, 0.0)) - vec2(0.95, 0.0)).norm() == 0.0);
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("displacement of the chart family shrinks linearly with eps") {
  const Region dom = Region::box_from_corners(vec2(0.0, 0.0), vec2(1.0, 1.0));
  std::mt19937_64 rng(8);
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.1, 0.03, 0.01}) {
    double sup = 0.0;
    for (const auto& f : chart_family_globalization(dom, eps))
      for (int i = 0; i < 300; ++i) {
        const Vec x = testutil::uniform_in_box(rng, vec2(-0.2, -0.2), vec2(1.2, 1.2));
        sup = std::max(sup, (f.apply(x) - x).norm());
      }
    CAPTURE(eps);
    CHECK(sup <= 10.0 * eps);
    CHECK(sup < prev);
    prev = sup;
  }
}

TEST_CASE("semigroup coverage by lattice translations") {
  const auto net = make_net(kSquare, 0.05);
  const auto run = semigroup_coverage(axis_shifts(0.3), kSeed, net, 20, SemigroupDirection::Forward);
  CHECK(run.covered);
  CHECK(run.uncovered.empty());
  // the worst point sits at half a diagonal step from the lattice
  CHECK(run.margin >= 0.25 - 0.15 * std::sqrt(2.0) - 1e-9);
  CHECK(run.reached_len <= 20);

  SUBCASE("witness words replay onto their balls") {
    for (std::size_t i = 0; i < net.size(); i += 7) {
      const int b = run.witness[i];
      REQUIRE(b >= 0);
      Vec x = kSeed.center();
      for (int s : run.word(b)) x = run.generators[s - 1].apply(x);
      CHECK((x - run.balls[b].center).norm() < 1e-9);
      CHECK((net[i] - x).norm() < run.balls[b].radius);
    }
  }

  SUBCASE("too short a word length leaves points uncovered") {
    const auto short_run = semigroup_coverage(axis_shifts(0.3), kSeed, net, 3, SemigroupDirection::Forward);
    CHECK_FALSE(short_run.covered);
    CHECK_FALSE(short_run.uncovered.empty());
    CHECK(short_run.margin < 0.0);
  }
}

TEST_CASE("backward coverage under inverted generators matches forward coverage") {
  const auto net = make_net(kSquare, 0.1);
  std::vector<FiberMap> inverted;
  for (const auto& g : axis_shifts(0.3)) inverted.push_back(FiberMap::affine(Mat::Identity(2, 2), -g.offset()));
  const auto fwd = semigroup_coverage(axis_shifts(0.3), kSeed, net, 20, SemigroupDirection::Forward);
  const auto bwd = semigroup_coverage(inverted, kSeed, net, 20, SemigroupDirection::Backward);
  CHECK(fwd.covered == bwd.covered);
  CHECK(fwd.margin == doctest::Approx(bwd.margin).epsilon(1e-12));
  CHECK(fwd.balls.size() == bwd.balls.size());
}

TEST_CASE("coverage is monotone in word length and in the generator set") {
  const auto net = make_net(kSquare, 0.1);
  CoverageOptions opts;
  opts.stop_when_covered = false;
  std::size_t prev = 0;
  for (int len = 1; len <= 16; ++len) {
    const auto run = semigroup_coverage(axis_shifts(0.3), kSeed, net, len, SemigroupDirection::Forward, opts);
    CHECK(covered_count(run) >= prev);
    prev = covered_count(run);
  }
  for (int len : {2, 4, 6}) {
    auto more = axis_shifts(0.3);
    more.push_back(shift(0.3, 0.3));
    const auto a = semigroup_coverage(axis_shifts(0.3), kSeed, net, len, SemigroupDirection::Forward, opts);
    const auto b = semigroup_coverage(more, kSeed, net, len, SemigroupDirection::Forward, opts);
    CHECK(covered_count(b) >= covered_count(a));
  }
}

TEST_CASE("reach of the orbit grows by one step per layer") {
  CoverageOptions opts;
  opts.stop_when_covered = false;
  const auto run = semigroup_coverage(axis_shifts(0.3), kSeed, {}, 6, SemigroupDirection::Forward, opts);
  REQUIRE(run.layer_reach.size() == 7);
  for (int k = 0; k <= 6; ++k) CHECK(run.layer_reach[k] == doctest::Approx(0.25 + 0.3 * k));
}

TEST_CASE("empty generator set keeps only the seed") {
  const std::vector<Vec> inside{vec2(0.5, 0.6)};
  const auto run = semigroup_coverage({}, kSeed, inside, 5, SemigroupDirection::Forward);
  CHECK(run.covered);
  CHECK(run.balls.size() == 1);
  CHECK(run.reached_len == 0);
  CHECK(run.word(run.witness[0]).empty());
  CHECK_FALSE(semigroup_coverage({}, kSeed, {vec2(2.0, 2.0)}, 5, SemigroupDirection::Forward).covered);
  CHECK_THROWS_AS(semigroup_coverage({}, kSeed, inside, 0, SemigroupDirection::Forward), ParamError);
  CHECK_THROWS_AS(semigroup_coverage({}, kSquare, inside, 3, SemigroupDirection::Forward), ParamError);
}

TEST_CASE("node budget exhaustion carries the partial run") {
  CoverageOptions opts;
  opts.node_budget = 10;
  const auto net = make_net(kSquare, 0.1);
  try {
    semigroup_coverage(axis_shifts(0.3), kSeed, net, 20, SemigroupDirection::Forward, opts);
    FAIL("expected a BudgetError");
  } catch (const BudgetError& e) {
    REQUIRE(e.has_partial());
    CHECK(e.partial().balls.size() > 10);
    CHECK(e.partial().reached_len >= 1);
    CHECK_FALSE(e.partial().covered);
    CHECK(std::string(e.kind()) == "BudgetError");
  }
}

TEST_CASE("chart family structure") {
  SUBCASE("one dimension") {
    const auto fam = chart_family(Region::box_from_corners(vec1(0.0), vec1(3.0)), 0.1);
    CHECK(fam.class_cores.size() == 2);
    CHECK(fam.generators.size() == 4);
    CHECK(fam.spacing == doctest::Approx(1.0));
    CHECK(fam.step == doctest::Approx(0.09));
  }
  SUBCASE("same-class supports are disjoint and the cores cover the domain") {
    for (int c : {1, 2, 3}) {
      CAPTURE(c);
      const double eps = 0.05;
      const Region dom = Region::box(Vec::Constant(c, 1.0), Vec::Constant(c, c == 3 ? 1.0 : 2.0));
      const auto fam = chart_family(dom, eps);
      REQUIRE(static_cast<int>(fam.class_cores.size()) == c + 1);
      CHECK(static_cast<int>(fam.generators.size()) == (c + 1) * (c + 1));
      double worst_gap = std::numeric_limits<double>::infinity();
      for (const auto& cls : fam.class_cores)
        for (std::size_t i = 0; i < cls.size(); ++i)
          for (std::size_t k = i + 1; k < cls.size(); ++k) worst_gap = std::min(worst_gap, region_gap(cls[i], cls[k]));
      CHECK(worst_gap > 4.0 * eps);
      bool all_inside = true;
      for (const auto& x : make_net(dom, 0.1)) {
        bool found = false;
        for (const auto& cls : fam.class_cores)
          for (const auto& core : cls) found = found || core.contains_closed(x);
        all_inside = all_inside && found;
      }
      CHECK(all_inside);
    }
  }
  CHECK_THROWS_AS(chart_family(Region::ball(vec2(0, 0), 1.0), 0.1), ParamError);
  CHECK_THROWS_AS(chart_family(Region::box_from_corners(vec1(0.0), vec1(3.0)), -0.1), ParamError);
}

TEST_CASE("chart family moves a small ball across the interval") {
  const Region dom = Region::box_from_corners(vec1(0.0), vec1(3.0));
  const auto gens = chart_family_globalization(dom, 0.1);
  const auto net = make_net(dom, 0.02);
  const Region seed = Region::ball(vec1(1.5), 0.05);
  CoverageOptions opts;
  opts.prune_region = dom.inflated(0.2);
  const auto fwd = semigroup_coverage(gens, seed, net, 60, SemigroupDirection::Forward, opts);
  const auto bwd = semigroup_coverage(gens, seed, net, 60, SemigroupDirection::Backward, opts);
  CHECK(fwd.covered);
  CHECK(bwd.covered);
  // far from the domain the family is the identity
  for (const auto& g : gens) CHECK(g.apply(vec1(5.0))(0) == 5.0);
}

TEST_CASE("check_RT_condition") {
  const auto net = make_net(kSquare, 0.1);
  OneStepSystem sys(0.5, 1.0, axis_shifts(0.3));
  CHECK(check_RT_condition(sys, kSeed, net, 20));
  sys.set_subset({1});
  CHECK_FALSE(check_RT_condition(sys, kSeed, net, 20));

  const OneStepSystem shrink(0.5, 1.0,
                             {FiberMap::affine(0.5 * Mat::Identity(2, 2), vec2(0.0, 0.0)),
                              FiberMap::affine(0.5 * Mat::Identity(2, 2), vec2(0.1, 0.0))});
  CHECK_FALSE(check_RT_condition(shrink, Region::ball(vec2(2.0, 2.0), 0.2), net, 20));
  CHECK(check_RT_condition(shrink, Region::ball(vec2(1.5, 1.5), 2.0), net, 1));
}
