/*
 * Copyright 2026 The attrcmp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "attrcmp/clustering.hpp"
#include "attrcmp/kernels.hpp"
#include "attrcmp/rng.hpp"

namespace attrcmp {
namespace {

using kernels::Points;

// Lowest inertia over every labelling of the points into exactly k groups.
double ExhaustiveOptimum(const Points& pts, int k) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<int> counts(k, 0);
    for (int l : label) ++counts[l];
    bool all_used = true;
    for (int c : counts) all_used &= c > 0;
    if (all_used) {
      Points cents(k, std::vector<double>(pts[0].size(), 0.0));
      for (int i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < pts[i].size(); ++d) {
          cents[label[i]][d] += pts[i][d] / counts[label[i]];
        }
      }
      best = std::min(best, Inertia(pts, label, cents));
    }
    int i = 0;
    while (i < n && ++label[i] == k) label[i++] = 0;
    if (i == n) break;
  }
  return best;
}

Points RandomPoints(int n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  Points pts(n, std::vector<double>(dim));
  for (auto& p : pts) for (double& v : p) v = rng.Uniform();
  return pts;
}

TEST(KMeans, FourPointOptimum) {
  const Points pts = {{0, 0}, {0, 1}, {10, 0}, {10, 1}};
  ClusterConfig cfg;
  cfg.num_clusters = 2;
  const auto res = KMeans(pts, cfg);
  EXPECT_NEAR(res.inertia, ExhaustiveOptimum(pts, 2), 1e-9);
  EXPECT_NEAR(res.inertia, 1.0, 1e-12);
  EXPECT_EQ(res.centroids[res.assignments[0]], (std::vector<double>{0, 0.5}));
  EXPECT_EQ(res.centroids[res.assignments[2]], (std::vector<double>{10, 0.5}));
  EXPECT_EQ(res.assignments[0], res.assignments[1]);
  EXPECT_EQ(res.assignments[2], res.assignments[3]);
  EXPECT_NE(res.assignments[0], res.assignments[2]);
  EXPECT_TRUE(res.converged);
}

TEST(KMeans, SmallSetsReachExhaustiveOptimum) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    // Two well separated blobs of four.
    Points pts = RandomPoints(8, 3, seed);
    for (int i = 4; i < 8; ++i) pts[i][0] += 10.0;
    ClusterConfig cfg;
    cfg.num_clusters = 2;
    cfg.seed = seed;
    EXPECT_NEAR(KMeans(pts, cfg).inertia, ExhaustiveOptimum(pts, 2), 1e-9);
  }
}

TEST(KMeans, SeededRunsUsuallyReachExhaustiveOptimum) {
  int hits = 0, runs = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed + 1000);
    const int n = 4 + static_cast<int>(rng.Below(5));  // 4..8 points
    const int k = 2 + static_cast<int>(rng.Below(2));  // 2..3 clusters
    const auto pts = RandomPoints(n, 2, seed);
    ClusterConfig cfg;
    cfg.num_clusters = k;
    cfg.seed = seed;
    const auto res = KMeans(pts, cfg);
    hits += std::abs(res.inertia - ExhaustiveOptimum(pts, k)) <= 1e-9;
    ++runs;
    for (std::size_t i = 1; i < res.inertia_history.size(); ++i) {
      EXPECT_LE(res.inertia_history[i], res.inertia_history[i - 1] + 1e-12);
    }
  }
  EXPECT_GE(hits, 95) << "of " << runs;
}

TEST(KMeans, KEqualsNHasZeroInertia) {
  const auto pts = RandomPoints(7, 4, 3);
  ClusterConfig cfg;
  cfg.num_clusters = 7;
  const auto res = KMeans(pts, cfg);
  EXPECT_EQ(res.inertia, 0.0);
  std::vector<int> a = res.assignments;
  std::sort(a.begin(), a.end());
  for (int i = 0; i < 7; ++i) EXPECT_EQ(a[i], i);
}

TEST(KMeans, FewerDistinctPointsThanClusters) {
  // Only two distinct values: a third cluster cannot keep a member because
  // assignment ties go to the lowest id. The result must still be exact.
  Points pts(6, std::vector<double>{1.0, 1.0});
  pts.push_back({2.0, 2.0});
  ClusterConfig cfg;
  cfg.num_clusters = 3;
  const auto res = KMeans(pts, cfg);
  EXPECT_EQ(res.inertia, 0.0);
  EXPECT_EQ(res.centroids.size(), 3u);
  for (std::size_t i = 1; i < 6; ++i) {
    EXPECT_EQ(res.assignments[i], res.assignments[0]);
  }
  EXPECT_NE(res.assignments[6], res.assignments[0]);
}

TEST(KMeans, SeededDeterminismAndMonotoneInertia) {
  const auto pts = RandomPoints(400, 27, 11);
  ClusterConfig cfg;
  cfg.num_clusters = 8;
  cfg.seed = 42;
  const auto a = KMeans(pts, cfg);
  const int saved = kernels::MaxThreads();
  kernels::SetThreads(3);
  const auto b = KMeans(pts, cfg);
  kernels::SetThreads(saved);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.inertia_history, b.inertia_history);
  for (std::size_t i = 1; i < a.inertia_history.size(); ++i) {
    EXPECT_LE(a.inertia_history[i], a.inertia_history[i - 1] + 1e-12);
  }
  EXPECT_NEAR(a.inertia, Inertia(pts, a.assignments, a.centroids), 1e-9);
  cfg.seed = 43;
  EXPECT_NE(KMeans(pts, cfg).inertia_history, a.inertia_history);
}

TEST(KMeans, Validation) {
  const auto pts = RandomPoints(3, 2, 1);
  ClusterConfig cfg;
  cfg.num_clusters = 4;
  EXPECT_THROW(KMeans(pts, cfg), InputError);
  EXPECT_THROW(KMeans({}, ClusterConfig()), InputError);
  Points ragged = {{1, 2}, {3}};
  cfg.num_clusters = 1;
  EXPECT_THROW(KMeans(ragged, cfg), InputError);
}

SegmentAttributionRecord Rec(const std::string& model, const std::string& id,
                             double score, Quadrant q = Quadrant::kTP) {
  SegmentAttributionRecord r;
  r.seg = SegmentRef{id, 0, 0, BBox{0, 0, 4, 4}};
  r.source_model = model;
  r.quadrant = q;
  r.shapley = {{"t", score}};
  return r;
}

const std::array<std::string, 2> kIds = {"A", "B"};

TEST(Stats, MeansCountsAndGlobalMax) {
  ConceptCluster c0{0, {Rec("A", "x", 0.2), Rec("A", "y", 0.4),
                        Rec("B", "z", -0.1)}, {}};
  ConceptCluster c1{1, {Rec("A", "w", 0.0)}, {}};
  const Binning bins = Binning::ForScores(std::vector<double>{0.4, -0.1});
  const auto st = ComputeStats({c0, c1}, "t", bins, kIds);
  ASSERT_EQ(st.size(), 2u);
  EXPECT_NEAR(st[0].models[0].mean, 0.3, 1e-15);
  EXPECT_EQ(st[0].models[0].count, 2);
  EXPECT_NEAR(st[0].models[1].mean, -0.1, 1e-15);
  EXPECT_EQ(st[0].total, 3);
  // Empty B: mean 0 and flagged.
  EXPECT_TRUE(st[1].models[1].empty);
  EXPECT_EQ(st[1].models[1].mean, 0.0);
  EXPECT_EQ(st[1].models[1].count, 0);
  for (const auto& s : st) EXPECT_NEAR(s.global_max_mean, 0.3, 1e-15);
  int total = 0;
  for (int h : st[0].models[0].histogram) total += h;
  EXPECT_EQ(total, 2);
  EXPECT_THROW(ComputeStats({ConceptCluster{0, {Rec("C", "q", 1.0)}, {}}}, "t",
                            bins, kIds),
               InputError);
}

TEST(Stats, AllZeroScores) {
  ConceptCluster c{0, {Rec("A", "x", 0.0), Rec("B", "y", 0.0)}, {}};
  const Binning bins = Binning::ForScores(std::vector<double>{0.0, 0.0});
  EXPECT_EQ(bins.limit, 1.0);
  const auto st = ComputeStats({c}, "t", bins, kIds);
  EXPECT_EQ(st[0].global_max_mean, 0.0);
  EXPECT_EQ(st[0].models[0].histogram[10], 1);
  EXPECT_EQ(st[0].models[1].histogram[10], 1);
}

TEST(Binning, LimitAndBins) {
  EXPECT_DOUBLE_EQ(Binning::RoundUpOneDigit(0.23), 0.3);
  EXPECT_DOUBLE_EQ(Binning::RoundUpOneDigit(0.3), 0.3);
  EXPECT_DOUBLE_EQ(Binning::RoundUpOneDigit(0.1 + 0.2), 0.3);
  EXPECT_DOUBLE_EQ(Binning::RoundUpOneDigit(7.01), 8.0);
  EXPECT_DOUBLE_EQ(Binning::RoundUpOneDigit(0.0042), 0.005);
  const auto b = Binning::ForScores(std::vector<double>{-0.23, 0.1});
  EXPECT_DOUBLE_EQ(b.limit, 0.3);
  EXPECT_EQ(b.bins, 21);
  EXPECT_EQ(b.BinOf(0.0), 10);
  EXPECT_EQ(b.BinOf(-0.3), 0);
  EXPECT_EQ(b.BinOf(0.3), 20);
  EXPECT_EQ(b.BinOf(5.0), 20);
  EXPECT_DOUBLE_EQ(b.Edge(0), -0.3);
  EXPECT_DOUBLE_EQ(b.Edge(21), 0.3);
}

ClusterStats Means(int id, double a, double b) {
  ClusterStats s;
  s.cluster_id = id;
  s.models[0].mean = a;
  s.models[1].mean = b;
  return s;
}

TEST(Ordering, ImbalanceAndMaxMean) {
  const std::vector<ClusterStats> st = {Means(0, 0.1, 0.1), Means(1, 0.0, 0.5),
                                        Means(2, 0.6, 0.2), Means(3, -0.3, 0.2)};
  EXPECT_EQ(OrderClusters(st, ClusterOrder::kImbalance),
            (std::vector<int>{1, 3, 2, 0}));
  EXPECT_EQ(OrderClusters(st, ClusterOrder::kMaxMeanAttribution),
            (std::vector<int>{2, 1, 3, 0}));
  const std::vector<ClusterStats> tie = {Means(5, 0.2, 0.0), Means(2, 0.0, 0.2)};
  EXPECT_EQ(OrderClusters(tie, ClusterOrder::kImbalance),
            (std::vector<int>{2, 5}));
  EXPECT_EQ(ParseClusterOrder(ClusterOrderName(ClusterOrder::kImbalance)),
            ClusterOrder::kImbalance);
  EXPECT_THROW(ParseClusterOrder("random"), InputError);
}

TEST(WithinCluster, AttributionDescendingWithTies) {
  ConceptCluster c{0,
                   {Rec("A", "b", 0.1), Rec("B", "x", 0.3), Rec("A", "a", 0.1),
                    Rec("A", "c", 0.5), Rec("B", "y", -0.2)},
                   {}};
  const auto rows =
      SortWithinCluster(c, WithinClusterOrder::kAttributionDesc, "t", kIds);
  ASSERT_EQ(rows[0].size(), 3u);
  EXPECT_EQ(rows[0][0].seg.image_id, "c");
  EXPECT_EQ(rows[0][1].seg.image_id, "a");
  EXPECT_EQ(rows[0][2].seg.image_id, "b");
  ASSERT_EQ(rows[1].size(), 2u);
  EXPECT_EQ(rows[1][0].seg.image_id, "x");
}

TEST(WithinCluster, CentroidDistance) {
  ConceptCluster c{0, {Rec("A", "far", 0.9), Rec("A", "near", 0.1)}, {0.0, 0.0}};
  c.members[0].embedding = {3.0, 0.0};
  c.members[1].embedding = {0.5, 0.0};
  const auto rows =
      SortWithinCluster(c, WithinClusterOrder::kCentroidDistance, "t", kIds);
  EXPECT_EQ(rows[0][0].seg.image_id, "near");
  EXPECT_TRUE(rows[1].empty());
}

TEST(Grouping, FollowsAssignments) {
  std::vector<SegmentAttributionRecord> pooled = {
      Rec("A", "p", 0.1), Rec("B", "q", 0.2), Rec("A", "r", 0.3)};
  KMeansResult km;
  km.assignments = {1, 0, 1};
  km.centroids = {{0.0}, {1.0}};
  const auto cl = GroupClusters(pooled, km);
  ASSERT_EQ(cl.size(), 2u);
  EXPECT_EQ(cl[0].members.size(), 1u);
  EXPECT_EQ(cl[1].members.size(), 2u);
  EXPECT_EQ(cl[1].centroid, std::vector<double>{1.0});
}

TEST(Config, JsonRoundTrip) {
  ClusterConfig cfg;
  cfg.num_clusters = 9;
  cfg.seed = 17;
  cfg.l2_normalize = true;
  const auto back = ClusterConfigFromJson(ToJson(cfg));
  EXPECT_EQ(back.num_clusters, 9);
  EXPECT_EQ(back.seed, 17u);
  EXPECT_TRUE(back.l2_normalize);
}

}  // namespace
}  // namespace attrcmp
