#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "cogtree/partition.hpp"
#include "oracles.hpp"

using namespace cogtree;

namespace {

SurrogatePoint pt(std::string id, std::vector<double> coords) {
  return SurrogatePoint{std::move(id), std::move(coords)};
}

std::vector<SurrogatePoint> as_points(const std::vector<oracle::Point>& raw,
                                      const std::string& prefix = "u") {
  std::vector<SurrogatePoint> pts;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::string id = std::to_string(i);
    if (id.size() < 2) id.insert(0, "0");
    pts.push_back(pt(prefix + id, raw[i]));
  }
  return pts;
}

Split split_of(std::vector<SurrogatePoint> pts, std::vector<int> labels = {}) {
  return Split{std::move(pts), std::move(labels)};
}

const SpaceConfig kEuclid{2};
const PartitionConfig kDefault{};

}  // namespace

TEST_CASE("unity: single pair, identical points, collinear enumeration") {
  CHECK(unity(split_of({pt("a", {0.0}), pt("b", {0.4})}), kEuclid) == Catch::Approx(0.4));
  CHECK(unity(split_of({pt("a", {0.3, 0.3}), pt("b", {0.3, 0.3})}), kEuclid) == 0.0);
  CHECK(unity(split_of({pt("a", {0.0}), pt("b", {1.0}), pt("c", {2.0})}), kEuclid) ==
        Catch::Approx(4.0 / 3.0));
  CHECK_THROWS_AS(unity(split_of({pt("a", {0.0})}), kEuclid), Error);
}

TEST_CASE("disjunction: singletons, identical splits, brute-forced medoids") {
  CHECK(disjunction(split_of({pt("a", {0.0, 0.0})}), split_of({pt("b", {1.0, 0.0})}), kEuclid) ==
        Catch::Approx(1.0));
  const Split same = split_of({pt("a", {0.2, 0.1}), pt("b", {0.4, 0.5})});
  CHECK(disjunction(same, same, kEuclid) == 0.0);
  CHECK(disjunction(split_of({pt("a", {0.0, 0.0}), pt("b", {0.2, 0.0})}),
                    split_of({pt("c", {1.0, 0.0}), pt("d", {1.2, 0.0})}), kEuclid) ==
        Catch::Approx(1.0));
  CHECK_THROWS_AS(disjunction(split_of({}), same, kEuclid), Error);
}

TEST_CASE("recuperation: hand-evaluated MV aggregates") {
  // Two singleton splits at distance 1: both ratios 0, MV = 0.
  CHECK(recuperation({split_of({pt("a", {0.0})}), split_of({pt("b", {1.0})})}, kEuclid,
                     kDefault) == Catch::Approx(0.0));
  // Two splits with unity 0.2 each and mutual disjunction 1.0 -> MV = 0.2.
  // Points: {0, 0.2} and {1.0, 1.2}; medoids tie to the lower ids (0 and 1.0).
  const double r1 = recuperation({split_of({pt("a", {0.0}), pt("b", {0.2})}),
                                  split_of({pt("c", {1.0}), pt("d", {1.2})})},
                                 kEuclid, kDefault);
  CHECK(r1 == Catch::Approx(0.2));
  // Ratios (0.1, 0.3): mean 0.2, population variance 0.01 -> 0.21.
  // Singleton + pair at disjunction 1: pair unity 0.1*? Construct directly:
  // split A = {0, 0.1} (unity 0.1), split B = {1.0, 1.3} (unity 0.3),
  // medoids 0 and 1.0 -> both denominators 1.0 -> ratios (0.1, 0.3).
  const double r2 = recuperation({split_of({pt("a", {0.0}), pt("b", {0.1})}),
                                  split_of({pt("c", {1.0}), pt("d", {1.3})})},
                                 kEuclid, kDefault);
  CHECK(r2 == Catch::Approx(0.21));
  // Coincident medoids -> degenerate.
  try {
    recuperation({split_of({pt("a", {0.5})}), split_of({pt("b", {0.5})})}, kEuclid, kDefault);
    FAIL("expected degenerate error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RecuperationUndefined);
  }
}

TEST_CASE("sentiment_proportion and impurity basics") {
  CHECK(sentiment_proportion(split_of({pt("a", {0.0})}, {1, 1, 1, 1}), 1) == 1.0);
  CHECK(sentiment_proportion(split_of({pt("a", {0.0})}, {1, 0}), 0) == 0.5);
  CHECK(sentiment_proportion(split_of({pt("a", {0.0})}, {1, 1, 1, 0}), 0) == 0.25);
  CHECK_THROWS_AS(sentiment_proportion(split_of({pt("a", {0.0})}, {}), 1), Error);

  CHECK(impurity(split_of({pt("a", {0.0})}, {1, 1, 1})) == 0.0);
  CHECK(impurity(split_of({pt("a", {0.0})}, {0, 0})) == 0.0);
  CHECK(impurity(split_of({pt("a", {0.0})}, {1, 0, 1, 0})) == Catch::Approx(1.0));
  CHECK(impurity(split_of({pt("a", {0.0})}, {1, 1, 1, 0})) ==
        Catch::Approx(0.8112781244591328).margin(1e-12));
}

TEST_CASE("impurity is concave-symmetric with max at 1/2") {
  for (int ones = 0; ones <= 20; ++ones) {
    std::vector<int> labels(20, 0);
    for (int i = 0; i < ones; ++i) labels[std::size_t(i)] = 1;
    std::vector<int> flipped;
    for (int l : labels) flipped.push_back(1 - l);
    const double a = impurity(split_of({pt("a", {0.0})}, labels));
    const double b = impurity(split_of({pt("a", {0.0})}, flipped));
    CHECK(a == Catch::Approx(b).margin(1e-12));
    CHECK(a <= 1.0 + 1e-12);
  }
  CHECK(impurity(split_of({pt("a", {0.0})}, {1, 0})) == Catch::Approx(1.0));
}

TEST_CASE("weighted_impurity: single split, equal halves, weighted mean") {
  const Split mixed = split_of({pt("b", {1.0})}, {1, 0, 1});
  CHECK(weighted_impurity({mixed}) == Catch::Approx(impurity(mixed)));
  const Split balanced = split_of({pt("c", {0.5})}, {1, 0, 1, 0});  // impurity 1, |U|=4
  const Split pure4 = split_of({pt("d", {0.6})}, {1, 1, 1, 1});     // impurity 0, |U|=4
  CHECK(weighted_impurity({balanced, pure4}) == Catch::Approx(0.5));
  // Counts (2,6) with impurities (1.0, 0.0): weighted mean 0.25.
  const Split w2 = split_of({pt("i", {0.3})}, {1, 0});
  const Split w6 = split_of({pt("j", {0.7})}, {1, 1, 1, 1, 1, 1});
  CHECK(weighted_impurity({w2, w6}) == Catch::Approx(0.25));
}

TEST_CASE("min_amplitude") {
  CHECK(min_amplitude({split_of({pt("a", {0.0})}, std::vector<int>(12, 1)),
                       split_of({pt("b", {0.1})}, std::vector<int>(7, 0)),
                       split_of({pt("c", {0.2})}, std::vector<int>(30, 1))}) == 7);
  CHECK(min_amplitude({split_of({pt("a", {0.0})}, {})}) == 0);
  CHECK(min_amplitude({split_of({pt("a", {0.0})}, {1, 1, 1, 1, 1}),
                       split_of({pt("b", {0.1})}, {0, 0, 0, 0, 0})}) == 5);
  CHECK_THROWS_AS(min_amplitude({}), Error);
}

TEST_CASE("heterogeneity: two-point cases and 3-point frozen value") {
  // Both distances attain their normalized maximum on the pair -> 0.
  CHECK(heterogeneity({pt("a", {0.0, 0.0}), pt("b", {0.5, 0.5})}, 0, kEuclid) ==
        Catch::Approx(0.0).margin(1e-15));
  // Full distance 1 but no variation on the cue -> -1.
  CHECK(heterogeneity({pt("a", {0.0, 0.3}), pt("b", {0.8, 0.3})}, 1, kEuclid) ==
        Catch::Approx(-1.0));
  // (0,0),(1,0),(1,1) on the second dimension: equals the enumeration oracle
  // and the hand value -1.
  const std::vector<SurrogatePoint> tri = {pt("a", {0.0, 0.0}), pt("b", {1.0, 0.0}),
                                           pt("c", {1.0, 1.0})};
  const double v = heterogeneity(tri, 1, kEuclid);
  CHECK(v == Catch::Approx(-1.0).margin(1e-12));
  CHECK(v == Catch::Approx(oracle::heterogeneity({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}}, 1, 2))
                 .margin(1e-12));
  // Degenerate inputs.
  CHECK_THROWS_AS(heterogeneity({pt("a", {0.1, 0.1})}, 0, kEuclid), Error);
  try {
    heterogeneity({pt("a", {0.1, 0.1}), pt("b", {0.1, 0.1})}, 0, kEuclid);
    FAIL("expected degenerate error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateGeometry);
  }
}

TEST_CASE("select_dimension: oracle argmax, single cue, tie rule") {
  std::mt19937_64 rng(3);
  // Points varying only along cue 3.
  std::vector<SurrogatePoint> pts;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 8; ++i)
    pts.push_back(pt("u" + std::to_string(i), {0.4, 0.4, 0.4, uni(rng), 0.4}));
  CHECK(select_dimension(pts, kEuclid, kDefault) == 3);
  // Oracle agreement on random sets.
  for (int trial = 0; trial < 30; ++trial) {
    const auto raw = oracle::random_points(rng, 10, 4);
    const auto cpts = as_points(raw);
    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < 4; ++c) {
      const double v = oracle::heterogeneity(raw, c, 2);
      if (v > best_val) {
        best_val = v;
        best = c;
      }
    }
    CHECK(select_dimension(cpts, kEuclid, kDefault) == best);
  }
  // |C| = 1.
  CHECK(select_dimension({pt("a", {0.1}), pt("b", {0.9})}, kEuclid, kDefault) == 0);
  // Identical geometry on two cues (swapped axes): lower index wins.
  CHECK(select_dimension({pt("a", {0.0, 0.0}), pt("b", {1.0, 1.0})}, kEuclid, kDefault) == 0);
  CHECK_THROWS_AS(select_dimension({pt("a", {0.5}), pt("b", {0.5})}, kEuclid, kDefault), Error);
}

TEST_CASE("select_cutpoint: returned cut is the exhaustive-scan argmax") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> low(0.05, 0.15), high(0.85, 0.95);
  std::vector<SurrogatePoint> pts;
  LabelsByUser labels;
  for (int i = 0; i < 10; ++i) {
    const std::string id_low = "a" + std::to_string(i);
    const std::string id_high = "b" + std::to_string(i);
    pts.push_back(pt(id_low, {low(rng)}));
    pts.push_back(pt(id_high, {high(rng)}));
    labels[id_low] = {i % 2};
    labels[id_high] = {(i + 1) % 2};
  }

  for (double lambda : {1.0, 0.5, 0.0}) {
    PartitionConfig pcfg;
    pcfg.lambda_cut = lambda;
    std::vector<CandidateDiag> diag;
    const double cut = select_cutpoint(pts, labels, 0, kEuclid, pcfg, &diag);
    double best_obj = -std::numeric_limits<double>::infinity();
    double best_cut = 0.0;
    for (const auto& d : diag)
      if (d.feasible && d.objective > best_obj) {
        best_obj = d.objective;
        best_cut = d.candidate;
      }
    CHECK(cut == best_cut);
    // Both sides stay populated.
    std::size_t left = 0;
    for (const auto& p : pts) left += (p.coords[0] < cut);
    CHECK(left > 0);
    CHECK(left < pts.size());
  }
}

TEST_CASE("select_cutpoint: lambda=0 is invariant to order-preserving rescaling") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<SurrogatePoint> pts;
  LabelsByUser labels;
  for (int i = 0; i < 12; ++i) {
    std::string id = (i < 10 ? "u0" : "u1") + std::to_string(i % 10);
    pts.push_back(pt(id, {uni(rng)}));
    labels[id] = {int(rng() % 2), int(rng() % 2)};
  }
  PartitionConfig pcfg;
  pcfg.lambda_cut = 0.0;
  const double cut = select_cutpoint(pts, labels, 0, kEuclid, pcfg);
  // Monotone rescale x -> x^3 keeps ranks; memberships must match.
  std::vector<SurrogatePoint> scaled = pts;
  for (auto& p : scaled) p.coords[0] = p.coords[0] * p.coords[0] * p.coords[0];
  const double cut_scaled = select_cutpoint(scaled, labels, 0, kEuclid, pcfg);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK((pts[i].coords[0] >= cut) == (scaled[i].coords[0] >= cut_scaled));
}

TEST_CASE("select_cutpoint: lambda=1 invariant to label flips; errors when degenerate") {
  std::mt19937_64 rng(29);
  const auto raw = oracle::random_points(rng, 14, 1);
  auto pts = as_points(raw);
  LabelsByUser labels, flipped;
  for (const auto& p : pts) {
    const int l = int(rng() % 2);
    labels[p.user_id] = {l};
    flipped[p.user_id] = {1 - l};
  }
  PartitionConfig pcfg;
  pcfg.lambda_cut = 1.0;
  CHECK(select_cutpoint(pts, labels, 0, kEuclid, pcfg) ==
        select_cutpoint(pts, flipped, 0, kEuclid, pcfg));
  // All coordinates equal: every candidate leaves one side empty.
  std::vector<SurrogatePoint> flat = {pt("a", {0.5}), pt("b", {0.5}), pt("c", {0.5})};
  LabelsByUser flat_labels{{"a", {1}}, {"b", {0}}, {"c", {1}}};
  CHECK_THROWS_AS(select_cutpoint(flat, flat_labels, 0, kEuclid, pcfg), Error);
}

TEST_CASE("theoretical_fragment: threshold partition and boundary point") {
  LabelsByUser labels;
  std::vector<SurrogatePoint> pts;
  for (double v : {0.1, 0.2, 0.8, 0.9}) {
    const std::string id = "u" + std::to_string(int(v * 10));
    pts.push_back(pt(id, {v}));
    labels[id] = {v < 0.5 ? 1 : 0, v < 0.5 ? 0 : 1};
  }
  const FragmentResult frag = theoretical_fragment(pts, labels, kEuclid, kDefault);
  REQUIRE(frag.splits.size() == 2);
  CHECK(frag.splits[0].points.size() == 2);
  CHECK(frag.splits[1].points.size() == 2);
  const auto& tp = std::get<TheoreticalParams>(frag.params);
  CHECK(tp.cut_dimension == 0);
  // Boundary convention: a point exactly at the cut goes right.
  for (const auto& p : frag.splits[1].points) CHECK(p.coords[0] >= tp.cut_value);
  for (const auto& p : frag.splits[0].points) CHECK(p.coords[0] < tp.cut_value);
}

TEST_CASE("fragment invariants hold on random sets (both strategies)") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + rng() % 12;
    const auto raw = oracle::random_points(rng, n, 3);
    auto pts = as_points(raw);
    LabelsByUser labels;
    for (const auto& p : pts) labels[p.user_id] = {int(rng() % 2), int(rng() % 2)};

    std::vector<FragmentResult> frags;
    try {
      frags.push_back(theoretical_fragment(pts, labels, kEuclid, kDefault));
    } catch (const Error&) {
    }
    const std::size_t d = std::min<std::size_t>(2 + rng() % 3, n);
    frags.push_back(kmeans_fragment(pts, labels, d, kEuclid, rng()));
    for (const FragmentResult& frag : frags) {
      std::set<std::string> seen;
      std::size_t total = 0;
      for (const Split& s : frag.splits) {
        CHECK(!s.points.empty());
        total += s.points.size();
        for (const auto& p : s.points) CHECK(seen.insert(p.user_id).second);
      }
      CHECK(total == pts.size());
    }
  }
}

TEST_CASE("kmeans: trivial cluster counts") {
  std::mt19937_64 rng(37);
  const auto raw = oracle::random_points(rng, 6, 2);
  auto pts = as_points(raw);
  LabelsByUser labels;
  for (const auto& p : pts) labels[p.user_id] = {1};

  const FragmentResult every = kmeans_fragment(pts, labels, 6, kEuclid, 1);
  CHECK(every.splits.size() == 6);
  for (const Split& s : every.splits) CHECK(s.points.size() == 1);

  const FragmentResult one = kmeans_fragment(pts, labels, 1, kEuclid, 1);
  CHECK(one.splits.size() == 1);
  CHECK(one.splits[0].points.size() == 6);

  CHECK_THROWS_AS(kmeans_fragment(pts, labels, 7, kEuclid, 1), Error);
}

TEST_CASE("kmeans: separated blobs recovered; objective matches exhaustive optimum") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<oracle::Point> raw;
  for (int i = 0; i < 4; ++i) raw.push_back({0.1 + noise(rng), 0.1 + noise(rng)});
  for (int i = 0; i < 4; ++i) raw.push_back({0.9 + noise(rng), 0.9 + noise(rng)});
  auto pts = as_points(raw);
  LabelsByUser labels;
  for (const auto& p : pts) labels[p.user_id] = {1};

  const FragmentResult frag = kmeans_fragment(pts, labels, 2, kEuclid, 5);
  REQUIRE(frag.splits.size() == 2);
  for (const Split& s : frag.splits) {
    REQUIRE(s.points.size() == 4);
    const bool low = s.points[0].coords[0] < 0.5;
    for (const auto& p : s.points) CHECK((p.coords[0] < 0.5) == low);
  }
  double objective = 0.0;
  const auto& cp = std::get<ClusterParams>(frag.params);
  for (std::size_t c = 0; c < frag.splits.size(); ++c)
    for (const auto& p : frag.splits[c].points) objective += distance(p, cp.medoids[c], kEuclid);
  CHECK(objective ==
        Catch::Approx(oracle::exhaustive_partition_optimum(raw, 2, 2)).margin(1e-9));
}

TEST_CASE("kmeans: objective non-increasing; final assignment is a fixed point") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto raw = oracle::random_points(rng, 12, 2);
    auto pts = as_points(raw);
    LabelsByUser labels;
    for (const auto& p : pts) labels[p.user_id] = {1};
    std::vector<double> trace;
    const FragmentResult frag = kmeans_fragment(pts, labels, 3, kEuclid, rng(), &trace);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-12);

    const auto& cp = std::get<ClusterParams>(frag.params);
    for (std::size_t c = 0; c < frag.splits.size(); ++c)
      for (const auto& p : frag.splits[c].points) {
        if (frag.splits[c].points.size() < 2) continue;  // sole member pins its cluster
        const double own = distance(p, cp.medoids[c], kEuclid);
        for (std::size_t other = 0; other < cp.medoids.size(); ++other)
          CHECK(own <= distance(p, cp.medoids[other], kEuclid) + 1e-12);
      }
  }
}

TEST_CASE("silhouette: conventions and blob separation") {
  CHECK(silhouette({split_of({pt("a", {0.0})}), split_of({pt("b", {1.0})})}, kEuclid) == 0.0);
  // Identical points split across 2 clusters: a=b=0 -> 0.
  CHECK(silhouette({split_of({pt("a", {0.5}), pt("b", {0.5})}),
                    split_of({pt("c", {0.5}), pt("d", {0.5})})},
                   kEuclid) == 0.0);
  std::mt19937_64 rng(47);
  std::normal_distribution<double> noise(0.0, 0.005);
  std::vector<SurrogatePoint> blob1, blob2;
  for (int i = 0; i < 6; ++i) {
    blob1.push_back(pt("a" + std::to_string(i), {0.05 + noise(rng), 0.05 + noise(rng)}));
    blob2.push_back(pt("b" + std::to_string(i), {0.95 + noise(rng), 0.95 + noise(rng)}));
  }
  const double s = silhouette({split_of(blob1), split_of(blob2)}, kEuclid);
  CHECK(s > 0.9);
  CHECK(s <= 1.0);
  CHECK_THROWS_AS(silhouette({split_of(blob1)}, kEuclid), Error);
}

TEST_CASE("silhouette and davies_bouldin match independent oracles on random sets") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 6 + rng() % 10;
    const auto raw = oracle::random_points(rng, n, 3);
    auto pts = as_points(raw);
    LabelsByUser labels;
    for (const auto& p : pts) labels[p.user_id] = {1};
    const FragmentResult frag = kmeans_fragment(pts, labels, 2 + rng() % 2, kEuclid, rng());

    std::vector<std::vector<oracle::Point>> clusters;
    for (const Split& s : frag.splits) {
      clusters.emplace_back();
      for (const auto& p : s.points) clusters.back().push_back(p.coords);
    }
    CHECK(silhouette(frag.splits, kEuclid) ==
          Catch::Approx(oracle::silhouette(clusters, 2)).margin(1e-10));
    CHECK(davies_bouldin(frag.splits, kEuclid) ==
          Catch::Approx(oracle::davies_bouldin(clusters, 2)).margin(1e-10));
  }
}

TEST_CASE("davies_bouldin: two tight far blobs score near zero") {
  std::mt19937_64 rng(59);
  std::normal_distribution<double> noise(0.0, 0.002);
  std::vector<SurrogatePoint> blob1, blob2;
  for (int i = 0; i < 5; ++i) {
    blob1.push_back(pt("a" + std::to_string(i), {0.02 + noise(rng)}));
    blob2.push_back(pt("b" + std::to_string(i), {0.98 + noise(rng)}));
  }
  CHECK(davies_bouldin({split_of(blob1), split_of(blob2)}, kEuclid) < 0.05);
}

TEST_CASE("select_cluster_count: three separated blobs give 3") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> noise(0.0, 0.015);
  std::vector<SurrogatePoint> pts;
  LabelsByUser labels;
  const double centers[3][2] = {{0.1, 0.1}, {0.9, 0.1}, {0.5, 0.9}};
  int id = 0;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 7; ++i, ++id) {
      std::string uid = "u" + std::to_string(id / 10) + std::to_string(id % 10);
      pts.push_back(pt(uid, {centers[c][0] + noise(rng), centers[c][1] + noise(rng)}));
      labels[uid] = {id % 2, (id + 1) % 2};  // balanced labels
    }
  CHECK(select_cluster_count(pts, labels, kEuclid, kDefault, 7) == 3);
}

TEST_CASE("select_cluster_count: two points force 2; degenerate set errors") {
  LabelsByUser labels{{"a", {1}}, {"b", {0}}};
  CHECK(select_cluster_count({pt("a", {0.1}), pt("b", {0.9})}, labels, kEuclid, kDefault, 1) ==
        2);
  LabelsByUser same{{"a", {1}}, {"b", {0}}, {"c", {1}}};
  CHECK_THROWS_AS(select_cluster_count({pt("a", {0.5}), pt("b", {0.5}), pt("c", {0.5})}, same,
                                       kEuclid, kDefault, 1),
                  Error);
}

TEST_CASE("functional oracle agreement on random instances") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng() % 27;
    const auto raw = oracle::random_points(rng, n, 1 + rng() % 5);
    auto pts = as_points(raw);
    CHECK(unity(split_of(pts), kEuclid) ==
          Catch::Approx(oracle::unity(raw, 2)).margin(1e-10));
    CHECK(max_intra_distance(pts, kEuclid) ==
          Catch::Approx(oracle::max_intra(raw, 2)).margin(1e-10));
    const std::size_t dim = rng() % raw[0].size();
    if (oracle::max_intra(raw, 2) > 0.0)
      CHECK(heterogeneity(pts, dim, kEuclid) ==
            Catch::Approx(oracle::heterogeneity(raw, dim, 2)).margin(1e-10));
  }
}
