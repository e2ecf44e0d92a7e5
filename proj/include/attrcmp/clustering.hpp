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

#ifndef ATTRCMP_CLUSTERING_HPP_
#define ATTRCMP_CLUSTERING_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "attrcmp/attribution.hpp"
#include "attrcmp/dataset.hpp"
#include "attrcmp/kernels.hpp"
#include "attrcmp/model.hpp"
#include "json.hpp"

namespace attrcmp {

struct ClusterConfig {
  int num_clusters = 4;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  double tolerance = 1e-6;  // on max centroid movement
  int restarts = 10;        // independent seedings; the lowest inertia wins
  bool l2_normalize = false;

  void Validate(std::size_t num_points) const;
};

nlohmann::json ToJson(const ClusterConfig& cfg);
ClusterConfig ClusterConfigFromJson(const nlohmann::json& j);

struct KMeansResult {
  std::vector<int> assignments;
  kernels::Points centroids;
  // Inertia after every assignment step, initial seeding included.
  std::vector<double> inertia_history;
  double inertia = 0.0;
  int iterations = 0;
  bool converged = false;
  int restart = 0;  // which seeding produced this result
};

// k-means++ seeding followed by Lloyd iterations, repeated `restarts` times
// with seeds drawn from `seed`; keeps the lowest final inertia (earliest run
// on ties). An emptied cluster is re-seeded with the point farthest from its
// current centroid. Deterministic for a given seed and independent of the
// thread count.
KMeansResult KMeans(const kernels::Points& points, const ClusterConfig& cfg);

double Inertia(const kernels::Points& points, std::span<const int> assignments,
               const kernels::Points& centroids);

// Fills every record's embedding from its crop. Output is records_a followed
// by records_b.
std::vector<SegmentAttributionRecord> PoolAndEmbed(
    std::vector<SegmentAttributionRecord> records_a,
    std::vector<SegmentAttributionRecord> records_b,
    const ModelHandle& embedder, const ImageStore& store);

struct ConceptCluster {
  int cluster_id = 0;
  std::vector<SegmentAttributionRecord> members;
  std::vector<double> centroid;
};

std::vector<ConceptCluster> GroupClusters(
    const std::vector<SegmentAttributionRecord>& pooled,
    const KMeansResult& kmeans);

// Shared score axis: [-limit, limit] cut into `bins` equal bins. limit is the
// largest |score| rounded up to one significant digit (1 when all are zero).
struct Binning {
  double limit = 1.0;
  int bins = 21;

  int BinOf(double score) const;
  double Edge(int i) const { return -limit + 2.0 * limit * i / bins; }

  static Binning ForScores(std::span<const double> scores, int bins = 21);
  static double RoundUpOneDigit(double value);
};

struct ModelClusterStats {
  int count = 0;
  std::vector<int> histogram;
  double mean = 0.0;
  bool empty = true;
};

// Index 0 is model A, index 1 is model B.
struct ClusterStats {
  int cluster_id = 0;
  int total = 0;
  std::array<std::string, 2> model_ids;
  std::array<ModelClusterStats, 2> models;
  double global_max_mean = 0.0;
};

std::vector<ClusterStats> ComputeStats(
    const std::vector<ConceptCluster>& clusters,
    const std::string& target_class, const Binning& binning,
    const std::array<std::string, 2>& model_ids);

enum class ClusterOrder { kImbalance, kMaxMeanAttribution };
enum class WithinClusterOrder { kAttributionDesc, kCentroidDistance };

ClusterOrder ParseClusterOrder(std::string_view name);
std::string_view ClusterOrderName(ClusterOrder order);
WithinClusterOrder ParseWithinClusterOrder(std::string_view name);
std::string_view WithinClusterOrderName(WithinClusterOrder order);

// Permutation of cluster ids; ties by ascending id.
std::vector<int> OrderClusters(const std::vector<ClusterStats>& stats,
                               ClusterOrder strategy);

// Members split into model A / model B rows and sorted; ties by
// (image id, row, col).
std::array<std::vector<SegmentAttributionRecord>, 2> SortWithinCluster(
    const ConceptCluster& cluster, WithinClusterOrder strategy,
    const std::string& target_class,
    const std::array<std::string, 2>& model_ids);

nlohmann::json ToJson(const ClusterStats& stats);
nlohmann::json ToJson(const Binning& binning);

}  // namespace attrcmp

#endif  // ATTRCMP_CLUSTERING_HPP_
