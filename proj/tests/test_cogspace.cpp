#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cogtree/cogspace.hpp"
#include "oracles.hpp"

using namespace cogtree;

namespace {

SurrogatePoint pt(std::string id, std::vector<double> coords) {
  return SurrogatePoint{std::move(id), std::move(coords)};
}

}  // namespace

TEST_CASE("distance: scaled 3-4-5 triangle") {
  const SpaceConfig cfg{2};
  CHECK(distance(pt("a", {0.0, 0.0}), pt("b", {0.3, 0.4}), cfg) == Catch::Approx(0.5));
}

TEST_CASE("distance: identical point is zero") {
  const SpaceConfig cfg{2};
  const auto p = pt("a", {0.2, 0.9, 0.4});
  CHECK(distance(p, p, cfg) == 0.0);
}

TEST_CASE("distance: r=1 sums absolute differences") {
  const SpaceConfig cfg{1};
  CHECK(distance(pt("a", {0.1, 0.2, 0.3}), pt("b", {0.4, 0.0, 0.3}), cfg) ==
        Catch::Approx(0.5));
}

TEST_CASE("distance: dimension mismatch names both lengths") {
  const SpaceConfig cfg{2};
  try {
    distance(pt("a", {0.1}), pt("b", {0.1, 0.2}), cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DimensionMismatch);
    CHECK(std::string(e.what()).find("1") != std::string::npos);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("distance: distinct users with identical coords are at distance zero") {
  const SpaceConfig cfg{2};
  CHECK(distance(pt("u1", {0.4, 0.6}), pt("u2", {0.4, 0.6}), cfg) == 0.0);
}

TEST_CASE("medoid: singleton") {
  const SpaceConfig cfg{2};
  const std::vector<SurrogatePoint> pts = {pt("a", {0.0, 0.0})};
  CHECK(medoid(pts, cfg).user_id == "a");
}

TEST_CASE("medoid: brute-force sum-of-distances winner") {
  const SpaceConfig cfg{2};
  const std::vector<SurrogatePoint> pts = {pt("a", {0.0, 0.0}), pt("b", {1.0, 0.0}),
                                           pt("c", {0.1, 0.0})};
  CHECK(medoid(pts, cfg).user_id == "c");
  CHECK(medoid(pts, cfg).coords == std::vector<double>{0.1, 0.0});
}

TEST_CASE("medoid: symmetric tie goes to the lowest user_id") {
  const SpaceConfig cfg{2};
  const std::vector<SurrogatePoint> pts = {pt("b", {1.0, 0.0}), pt("a", {0.0, 0.0})};
  CHECK(medoid(pts, cfg).user_id == "a");
}

TEST_CASE("medoid: empty set is an error") {
  const SpaceConfig cfg{2};
  CHECK_THROWS_AS(medoid({}, cfg), Error);
}

TEST_CASE("medoid: invariant under permutation") {
  std::mt19937_64 rng(7);
  const SpaceConfig cfg{2};
  for (int trial = 0; trial < 50; ++trial) {
    auto raw = oracle::random_points(rng, 8, 3);
    std::vector<SurrogatePoint> pts;
    for (std::size_t i = 0; i < raw.size(); ++i) pts.push_back(pt("u" + std::to_string(i), raw[i]));
    std::vector<SurrogatePoint> shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(medoid(pts, cfg).user_id == medoid(shuffled, cfg).user_id);
  }
}

TEST_CASE("max_intra_distance: singleton and enumerated max") {
  const SpaceConfig cfg{2};
  CHECK(max_intra_distance({pt("a", {0.0, 0.0})}, cfg) == 0.0);
  CHECK(max_intra_distance({pt("a", {0.0, 0.0}), pt("b", {0.3, 0.4}), pt("c", {0.1, 0.0})},
                           cfg) == Catch::Approx(0.5));
  CHECK(max_intra_distance({pt("a", {0.5, 0.5}), pt("b", {0.5, 0.5}), pt("c", {0.5, 0.5})},
                           cfg) == 0.0);
  CHECK_THROWS_AS(max_intra_distance({}, cfg), Error);
}

TEST_CASE("pseudo-metric axioms on random triples") {
  std::mt19937_64 rng(11);
  for (int r : {1, 2, 3}) {
    const SpaceConfig cfg{r};
    for (std::size_t dims : {std::size_t(1), std::size_t(5)}) {
      for (int trial = 0; trial < 300; ++trial) {
        const auto raw = oracle::random_points(rng, 3, dims);
        const auto a = pt("a", raw[0]), b = pt("b", raw[1]), c = pt("c", raw[2]);
        const double ab = distance(a, b, cfg);
        const double ba = distance(b, a, cfg);
        const double ac = distance(a, c, cfg);
        const double cb = distance(c, b, cfg);
        REQUIRE(ab >= 0.0);
        REQUIRE(ab == ba);  // exact symmetry
        REQUIRE(ab <= ac + cb + 1e-12);
      }
    }
  }
}

TEST_CASE("r=2 agrees with an independent Euclidean oracle") {
  std::mt19937_64 rng(13);
  const SpaceConfig cfg{2};
  for (int trial = 0; trial < 200; ++trial) {
    const auto raw = oracle::random_points(rng, 2, 5);
    CHECK(distance(pt("a", raw[0]), pt("b", raw[1]), cfg) ==
          Catch::Approx(oracle::euclidean(raw[0], raw[1])).margin(1e-12));
  }
}

TEST_CASE("cue set validation") {
  CueSet cues{{"OPN", "CON", "EXT", "AGR", "NEU"}};
  CHECK_NOTHROW(cues.validate());
  CHECK(cues.index_of("EXT") == 2);
  CHECK_THROWS_AS(cues.index_of("XYZ"), Error);
  CueSet dup{{"OPN", "OPN"}};
  CHECK_THROWS_AS(dup.validate(), Error);
  CueSet empty{{}};
  CHECK_THROWS_AS(empty.validate(), Error);
  SpaceConfig bad{0};
  CHECK_THROWS_AS(bad.validate(), Error);
}
