#include "doctest.h"
#include "helpers.hpp"

#include "blenderlab/cover.hpp"
#include "blenderlab/symplectic.hpp"

using namespace blenderlab;
using testutil::vec1;
using testutil::vec2;

namespace {

FiberMap affine1(double a, double b) { return FiberMap::affine(Mat::Constant(1, 1, a), vec1(b)); }

// open ball membership of the forward preimage, written out directly
bool covered_by(const std::vector<FiberMap>& maps, const Vec& center, double radius, const Vec& p) {
  for (const auto& f : maps)
    if ((f.apply_inverse(p) - center).norm() < radius) return true;
  return false;
}

std::size_t sampled_counterexamples(const std::vector<FiberMap>& maps, const Vec& center, double radius, int n,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::size_t bad = 0;
  for (int i = 0; i < n; ++i) {
    Vec p = testutil::uniform_in_ball(rng, center, radius);
    // every tenth sample on the boundary sphere, where covers are tightest
    if (i % 10 == 0) p = center + radius * (p - center).normalized();
    if (!covered_by(maps, center, radius, p)) ++bad;
  }
  return bad;
}

}  // namespace

TEST_CASE("regions") {
  const Region b = Region::ball(vec2(0.0, 0.0), 1.0);
  CHECK(b.contains_closed(vec2(1.0, 0.0)));
  CHECK_FALSE(b.contains_open(vec2(1.0, 0.0)));
  CHECK(b.depth(vec2(0.5, 0.0)) == doctest::Approx(0.5));
  CHECK(b.depth(vec2(2.0, 0.0)) == doctest::Approx(-1.0));
  const Region box = Region::box_from_corners(vec2(0.0, 0.0), vec2(3.0, 1.0));
  CHECK(box.contains_closed(vec2(3.0, 1.0)));
  CHECK_FALSE(box.contains_open(vec2(3.0, 0.5)));
  CHECK(box.depth(vec2(1.0, 0.25)) == doctest::Approx(0.25));
  const Region back = Region::from_json(b.to_json());
  CHECK(back.to_json() == b.to_json());
  CHECK(b.to_json().at("kind") == "ball");
  CHECK_THROWS_AS(Region::ball(vec2(0.0, 0.0), 0.0), ParamError);
}

TEST_CASE("make_net") {
  const auto unit_interval = make_net(Region::box_from_corners(vec1(0.0), vec1(1.0)), 0.5);
  CHECK(unit_interval.size() >= 3);
  const auto square = make_net(Region::box_from_corners(vec2(0.0, 0.0), vec2(1.0, 1.0)), 0.5);
  CHECK(square.size() >= 9);
  CHECK_THROWS_AS(make_net(Region::ball(vec2(0.0, 0.0), 1.0), 0.0), ParamError);

  SUBCASE("dense sampling audit of the h-net property") {
    for (const Region& r : {Region::ball(vec2(0.0, 0.0), 1.0), Region::box_from_corners(vec2(0.0, 0.0), vec2(2.0, 0.5))}) {
      const double h = 0.1;
      const auto net = make_net(r, h);
      for (const auto& p : net) CHECK(r.contains_closed(p));
      std::mt19937_64 rng(2);
      double worst = 0.0;
      for (int i = 0; i < 20000; ++i) {
        Vec x = testutil::uniform_in_box(rng, r.lower(), r.upper());
        x = r.project(x);
        if (r.kind() == Region::Kind::Ball && i % 2 == 0) x = r.center() + r.radius() * (x - r.center()).normalized();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : net) best = std::min(best, (p - x).norm());
        worst = std::max(worst, best);
      }
      CHECK(worst <= h);
    }
  }
}

TEST_CASE("verify_open_cover interval examples") {
  const Region b = Region::ball(vec1(0.0), 1.0);
  const auto halves = verify_open_cover({affine1(0.5, -0.5), affine1(0.5, 0.5)}, b, CoverDirection::Forward, 0.01);
  CHECK_FALSE(halves.pass);
  CHECK_FALSE(halves.witness_failures.empty());

  const std::vector<FiberMap> three{affine1(0.5, -0.6), affine1(0.5, 0.0), affine1(0.5, 0.6)};
  const auto cert = verify_open_cover(three, b, CoverDirection::Forward, 0.01);
  CHECK(cert.pass);
  // interval oracle: preimage depth of p is max_i (1 - |2(p - t_i)|), worst at p = +-1, 0.3
  CHECK(cert.margin == doctest::Approx(0.2).epsilon(0.05));
  CHECK(cert.margin > cert.soundness_gap());

  CHECK_FALSE(verify_open_cover({affine1(0.5, 0.0)}, b, CoverDirection::Forward, 0.01).pass);
  CoverOptions bad;
  bad.lipschitz = {1.0};
  CHECK_THROWS_AS(verify_open_cover(three, b, CoverDirection::Forward, 0.01, bad), ContractError);
}

TEST_CASE("certificate invariants: pass implies gap, fail implies witnesses") {
  std::mt19937_64 rng(4);
  const Region b = Region::ball(vec1(0.0), 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const double spread = std::uniform_real_distribution<double>(0.2, 1.2)(rng);
    const std::vector<FiberMap> maps{affine1(0.5, -spread), affine1(0.5, 0.0), affine1(0.5, spread)};
    const auto cert = verify_open_cover(maps, b, CoverDirection::Forward, 0.02);
    if (cert.pass)
      CHECK(cert.margin > cert.lipschitz_bound * cert.net_spacing);
    else
      CHECK_FALSE(cert.witness_failures.empty());
  }
}

TEST_CASE("monotonicity under net refinement") {
  const Region b = Region::ball(vec1(0.0), 1.0);
  const std::vector<FiberMap> three{affine1(0.5, -0.6), affine1(0.5, 0.0), affine1(0.5, 0.6)};
  const auto coarse = verify_open_cover(three, b, CoverDirection::Forward, 0.04);
  REQUIRE(coarse.pass);
  for (double h : {0.03, 0.02, 0.01, 0.005}) {
    const auto fine = verify_open_cover(three, b, CoverDirection::Forward, h);
    CHECK(fine.pass);
    // refining can only find worse points, never worse than the Lipschitz gap allows
    CHECK(fine.margin >= coarse.margin - coarse.soundness_gap());
  }
}

TEST_CASE("soundness of passing covers on 1e5 samples") {
  SUBCASE("three halvings of the interval") {
    const std::vector<FiberMap> three{affine1(0.5, -0.6), affine1(0.5, 0.0), affine1(0.5, 0.6)};
    REQUIRE(verify_open_cover(three, Region::ball(vec1(0.0), 1.0), CoverDirection::Forward, 0.01).pass);
    CHECK(sampled_counterexamples(three, vec1(0.0), 1.0, 100000, 1) == 0);
  }
  SUBCASE("saddle lattice cover of the unit disc") {
    const auto lat = lattice_translate_centers(1.0, testutil::diag2(0.5, 2.0));
    REQUIRE(lat.certificate.pass);
    std::vector<FiberMap> maps;
    for (const auto& t : lat.centers) maps.push_back(FiberMap::affine(testutil::diag2(0.5, 2.0), t));
    CHECK(sampled_counterexamples(maps, vec2(0.0, 0.0), 1.0, 100000, 2) == 0);
  }
}

TEST_CASE("simplex directions") {
  const auto d1 = simplex_directions(1);
  REQUIRE(d1.size() == 2);
  CHECK(d1[0](0) * d1[1](0) == doctest::Approx(-1.0));
  CHECK(direction_set_constant(d1) == doctest::Approx(1.0));

  const auto d2 = simplex_directions(2);
  REQUIRE(d2.size() == 3);
  for (int i = 0; i < 3; ++i)
    for (int k = i + 1; k < 3; ++k) CHECK(d2[i].dot(d2[k]) == doctest::Approx(-0.5));

  SUBCASE("brute-force min-max oracle for c = 2, 3") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    for (int c : {2, 3}) {
      const auto dirs = simplex_directions(c);
      double kappa = std::numeric_limits<double>::infinity();
      for (int s = 0; s < 10000; ++s) {
        Vec p(c);
        for (int i = 0; i < c; ++i) p(i) = g(rng);
        p.normalize();
        double best = -1.0;
        for (const auto& u : dirs) best = std::max(best, p.dot(u));
        kappa = std::min(kappa, best);
      }
      // sampling can only overestimate the minimum
      CHECK(kappa >= 1.0 / c - 1e-9);
      CHECK(kappa == doctest::Approx(1.0 / c).epsilon(0.05));
    }
  }
  for (int c = 1; c <= 6; ++c) {
    const auto dirs = simplex_directions(c);
    CHECK(dirs.size() == static_cast<std::size_t>(c + 1));
    Vec sum = Vec::Zero(c);
    for (const auto& u : dirs) {
      CHECK(u.norm() == doctest::Approx(1.0));
      sum += u;
    }
    CHECK(sum.norm() < 1e-12);
    CHECK(std::abs(direction_set_constant(dirs) - 1.0 / c) <= 1e-9);
  }
}

TEST_CASE("cover_ball_by_translates") {
  CHECK(cover_ball_by_translates(1.0, 0.4, simplex_directions(2), 0.01).pass);
  const auto fail = cover_ball_by_translates(1.0, 1.2, simplex_directions(2), 0.01);
  CHECK_FALSE(fail.pass);
  REQUIRE_FALSE(fail.witness_failures.empty());
  // uncovered boundary points sit near the -u_i directions
  const auto dirs = simplex_directions(2);
  for (const auto& w : fail.witness_failures) {
    double best = -2.0;
    for (const auto& u : dirs) best = std::max(best, (-u).dot(w.normalized()));
    CHECK(best > 0.8);
  }
  CHECK(cover_ball_by_translates(1.0, 0.5, simplex_directions(1), 0.01).pass);
  for (int c = 2; c <= 3; ++c) {
    const double kappa = 1.0 / c;
    const double eps = 1.0;
    const auto at = cover_ball_by_translates(eps, eps * kappa, simplex_directions(c), 0.02);
    CHECK(at.pass);
    // boundary oracle: depth of |p| = eps is eps - sqrt(eps^2 - delta^2)
    CHECK(at.margin == doctest::Approx(eps - std::sqrt(eps * eps - kappa * kappa)).epsilon(1e-6));
    CHECK_FALSE(cover_ball_by_translates(eps, 3.0 * eps * kappa, simplex_directions(c), 0.02).pass);
  }
  // c = 1: delta = eps * kappa_1 = eps leaves the centre on the boundary of both translates
  const auto edge = cover_ball_by_translates(1.0, 1.0, simplex_directions(1), 0.02);
  CHECK_FALSE(edge.pass);
  CHECK(edge.margin == doctest::Approx(0.0));
  CHECK(cover_ball_by_translates(1.0, 0.9, simplex_directions(1), 0.02).pass);
  CHECK_FALSE(cover_ball_by_translates(1.0, 3.0, simplex_directions(1), 0.02).pass);
}

TEST_CASE("lattice_translate_centers") {
  SUBCASE("interval, ratio 1/2") {
    const auto lat = lattice_translate_centers(1.0, Mat::Constant(1, 1, 0.5));
    CHECK(lat.certificate.pass);
    CHECK(lat.centers.size() == 3);
    std::vector<double> xs;
    for (const auto& t : lat.centers) xs.push_back(t(0));
    std::sort(xs.begin(), xs.end());
    CHECK(xs[0] == doctest::Approx(-0.6));
    CHECK(xs[1] == doctest::Approx(0.0));
    CHECK(xs[2] == doctest::Approx(0.6));
  }
  SUBCASE("isotropic contraction in the plane") {
    const auto lat = lattice_translate_centers(1.0, 0.5 * Mat::Identity(2, 2));
    CHECK(lat.certificate.pass);
    // one valid lattice count; seven hexagonal centres do not suffice at this spacing
    CHECK(lat.centers.size() >= 7);
    CHECK(lat.spacing <= 2.0 * 0.5 * 1.0 * 0.6 / std::sqrt(2.0) + 1e-12);
  }
  SUBCASE("saddle, cs cover") {
    const auto lat = lattice_translate_centers(1.0, testutil::diag2(0.5, 2.0));
    CHECK(lat.certificate.pass);
    CHECK(lat.centers.size() == 4);
    for (const auto& t : lat.centers) CHECK(t(1) == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(lattice_translate_centers(1.0, 2.0 * Mat::Identity(2, 2)), ShapeError);
  CHECK_THROWS_AS(lattice_translate_centers(1.0, FiberMap::identity(2)), ShapeError);
}
