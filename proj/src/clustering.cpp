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

#include "attrcmp/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <tuple>

#include "attrcmp/error.hpp"
#include "attrcmp/rng.hpp"

namespace attrcmp {

void ClusterConfig::Validate(std::size_t num_points) const {
  if (num_points == 0) throw InputError("k-means needs at least one point");
  if (num_clusters < 1 || static_cast<std::size_t>(num_clusters) > num_points) {
    throw InputError("num_clusters = " + std::to_string(num_clusters) +
                     " must lie in [1, " + std::to_string(num_points) + "]");
  }
  if (max_iterations < 1) throw InputError("max_iterations must be >= 1");
  if (!(tolerance >= 0.0)) throw InputError("tolerance must be >= 0");
  if (restarts < 1) throw InputError("restarts must be >= 1");
}

nlohmann::json ToJson(const ClusterConfig& cfg) {
  return {{"num_clusters", cfg.num_clusters},
          {"seed", cfg.seed},
          {"max_iterations", cfg.max_iterations},
          {"tolerance", cfg.tolerance},
          {"restarts", cfg.restarts},
          {"l2_normalize", cfg.l2_normalize}};
}

ClusterConfig ClusterConfigFromJson(const nlohmann::json& j) {
  ClusterConfig cfg;
  cfg.num_clusters = j.value("num_clusters", cfg.num_clusters);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
  cfg.tolerance = j.value("tolerance", cfg.tolerance);
  cfg.restarts = j.value("restarts", cfg.restarts);
  cfg.l2_normalize = j.value("l2_normalize", cfg.l2_normalize);
  return cfg;
}

double Inertia(const kernels::Points& points, std::span<const int> assignments,
               const kernels::Points& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += kernels::SquaredDistance(points[i], centroids[assignments[i]]);
  }
  return total;
}

namespace {

kernels::Points SeedPlusPlus(const kernels::Points& pts, int k, Rng& rng) {
  const std::size_t n = pts.size();
  kernels::Points centroids;
  centroids.push_back(pts[rng.Below(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = kernels::SquaredDistance(pts[i], centroids[0]);
  }
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n - 1;
    if (total <= 0.0) {
      pick = rng.Below(n);
    } else {
      const double r = rng.Uniform() * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cumulative += d2[i];
        if (cumulative > r && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centroids.push_back(pts[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], kernels::SquaredDistance(pts[i], centroids.back()));
    }
  }
  return centroids;
}

double Sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

KMeansResult KMeansOnce(const kernels::Points& pts, const ClusterConfig& cfg,
                        std::uint64_t seed) {
  const std::size_t dim = pts.front().size();
  const int k = cfg.num_clusters;
  Rng rng(seed);
  KMeansResult result;
  result.centroids = SeedPlusPlus(pts, k, rng);

  std::vector<double> sq;
  kernels::AssignNearest(pts, result.centroids, &result.assignments, &sq);
  result.inertia_history.push_back(Sum(sq));

  for (int it = 0; it < cfg.max_iterations; ++it) {
    std::vector<int> counts(k, 0);
    for (int a : result.assignments) ++counts[a];
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Farthest point that can leave its cluster without emptying it.
      std::size_t far = pts.size();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (counts[result.assignments[i]] < 2) continue;
        if (far == pts.size() || sq[i] > sq[far]) far = i;
      }
      if (far == pts.size()) break;
      --counts[result.assignments[far]];
      result.assignments[far] = c;
      counts[c] = 1;
      sq[far] = 0.0;
      result.centroids[c] = pts[far];
    }

    kernels::Points updated(k, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto& target = updated[result.assignments[i]];
      for (std::size_t d = 0; d < dim; ++d) target[d] += pts[i][d];
    }
    double movement = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        updated[c] = result.centroids[c];
        continue;
      }
      for (double& v : updated[c]) v /= counts[c];
      movement = std::max(
          movement,
          std::sqrt(kernels::SquaredDistance(updated[c], result.centroids[c])));
    }
    result.centroids = std::move(updated);
    kernels::AssignNearest(pts, result.centroids, &result.assignments, &sq);
    result.inertia_history.push_back(Sum(sq));
    result.iterations = it + 1;
    if (movement < cfg.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.inertia = result.inertia_history.back();
  return result;
}

}  // namespace

KMeansResult KMeans(const kernels::Points& points, const ClusterConfig& cfg) {
  cfg.Validate(points.size());
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw InputError("k-means points differ in dimension");
  }
  kernels::Points pts = points;
  if (cfg.l2_normalize) {
    for (auto& p : pts) {
      const double norm = std::sqrt(kernels::SquaredDistance(
          p, std::vector<double>(dim, 0.0)));
      if (norm > 0.0) {
        for (double& v : p) v /= norm;
      }
    }
  }
  Rng seeds(cfg.seed);
  KMeansResult best;
  for (int r = 0; r < cfg.restarts; ++r) {
    KMeansResult run = KMeansOnce(pts, cfg, seeds.Next());
    run.restart = r;
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

std::vector<SegmentAttributionRecord> PoolAndEmbed(
    std::vector<SegmentAttributionRecord> records_a,
    std::vector<SegmentAttributionRecord> records_b,
    const ModelHandle& embedder, const ImageStore& store) {
  std::vector<SegmentAttributionRecord> pooled = std::move(records_a);
  pooled.insert(pooled.end(), std::make_move_iterator(records_b.begin()),
                std::make_move_iterator(records_b.end()));
  if (pooled.empty()) return pooled;
  constexpr long kChunk = 64;
  const long n = static_cast<long>(pooled.size());
  const long chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::exception_ptr> errors(chunks);
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < chunks; ++c) {
    try {
      const long begin = c * kChunk, end = std::min(n, begin + kChunk);
      std::vector<ImageTensor> patches;
      for (long i = begin; i < end; ++i) {
        const auto image = store.Get(pooled[i].seg.image_id);
        patches.push_back(CropSegment(*image, pooled[i].seg));
      }
      auto vectors = embedder.Embed(patches);
      for (long i = begin; i < end; ++i) {
        pooled[i].embedding = std::move(vectors[i - begin]);
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  const std::size_t dim = pooled.front().embedding.size();
  for (const auto& r : pooled) {
    if (r.embedding.size() != dim) {
      throw GatewayError("embedder '" + embedder.id() +
                         "' returned vectors of differing dimension");
    }
  }
  return pooled;
}

std::vector<ConceptCluster> GroupClusters(
    const std::vector<SegmentAttributionRecord>& pooled,
    const KMeansResult& kmeans) {
  std::vector<ConceptCluster> clusters(kmeans.centroids.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    clusters[c].cluster_id = static_cast<int>(c);
    clusters[c].centroid = kmeans.centroids[c];
  }
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    clusters[kmeans.assignments[i]].members.push_back(pooled[i]);
  }
  return clusters;
}

double Binning::RoundUpOneDigit(double value) {
  if (!(value > 0.0)) return 0.0;
  const double exponent = std::floor(std::log10(value));
  const double scale = std::pow(10.0, exponent);
  // Guard against representation noise such as 0.30000000000000004.
  double leading = std::ceil(value / scale - 1e-9);
  if (leading < 1.0) leading = 1.0;
  return leading * scale;
}

Binning Binning::ForScores(std::span<const double> scores, int bins) {
  double peak = 0.0;
  for (double s : scores) peak = std::max(peak, std::abs(s));
  Binning b;
  b.bins = bins;
  b.limit = peak > 0.0 ? RoundUpOneDigit(peak) : 1.0;
  return b;
}

int Binning::BinOf(double score) const {
  const double pos = (score + limit) / (2.0 * limit) * bins;
  const int bin = static_cast<int>(std::floor(pos));
  return std::clamp(bin, 0, bins - 1);
}

std::vector<ClusterStats> ComputeStats(
    const std::vector<ConceptCluster>& clusters,
    const std::string& target_class, const Binning& binning,
    const std::array<std::string, 2>& model_ids) {
  std::vector<ClusterStats> out;
  out.reserve(clusters.size());
  double global_max = -std::numeric_limits<double>::infinity();
  for (const auto& cluster : clusters) {
    ClusterStats st;
    st.cluster_id = cluster.cluster_id;
    st.model_ids = model_ids;
    std::array<double, 2> sums{0.0, 0.0};
    for (auto& m : st.models) m.histogram.assign(binning.bins, 0);
    for (const auto& r : cluster.members) {
      int which = -1;
      if (r.source_model == model_ids[0]) which = 0;
      else if (r.source_model == model_ids[1]) which = 1;
      if (which < 0) {
        throw InputError("record from unknown model '" + r.source_model + "'");
      }
      const double score = r.ShapleyFor(target_class);
      auto& m = st.models[which];
      ++m.count;
      ++m.histogram[binning.BinOf(score)];
      sums[which] += score;
    }
    for (int w = 0; w < 2; ++w) {
      auto& m = st.models[w];
      m.empty = m.count == 0;
      m.mean = m.empty ? 0.0 : sums[w] / m.count;
      global_max = std::max(global_max, m.mean);
    }
    st.total = st.models[0].count + st.models[1].count;
    out.push_back(std::move(st));
  }
  for (auto& st : out) st.global_max_mean = out.empty() ? 0.0 : global_max;
  return out;
}

ClusterOrder ParseClusterOrder(std::string_view name) {
  if (name == "imbalance") return ClusterOrder::kImbalance;
  if (name == "max_mean_attribution") return ClusterOrder::kMaxMeanAttribution;
  throw InputError("unknown cluster ordering '" + std::string(name) + "'");
}

std::string_view ClusterOrderName(ClusterOrder order) {
  return order == ClusterOrder::kImbalance ? "imbalance"
                                           : "max_mean_attribution";
}

WithinClusterOrder ParseWithinClusterOrder(std::string_view name) {
  if (name == "attribution_desc") return WithinClusterOrder::kAttributionDesc;
  if (name == "centroid_distance") return WithinClusterOrder::kCentroidDistance;
  throw InputError("unknown within-cluster ordering '" + std::string(name) +
                   "'");
}

std::string_view WithinClusterOrderName(WithinClusterOrder order) {
  return order == WithinClusterOrder::kAttributionDesc ? "attribution_desc"
                                                       : "centroid_distance";
}

std::vector<int> OrderClusters(const std::vector<ClusterStats>& stats,
                               ClusterOrder strategy) {
  if (stats.empty()) throw InputError("no clusters to order");
  auto key = [strategy](const ClusterStats& s) {
    const double a = s.models[0].mean, b = s.models[1].mean;
    return strategy == ClusterOrder::kImbalance ? std::abs(a - b)
                                                : std::max(a, b);
  };
  std::vector<const ClusterStats*> order;
  for (const auto& s : stats) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [&](const ClusterStats* x, const ClusterStats* y) {
              const double kx = key(*x), ky = key(*y);
              if (kx != ky) return kx > ky;
              return x->cluster_id < y->cluster_id;
            });
  std::vector<int> ids;
  for (const auto* s : order) ids.push_back(s->cluster_id);
  return ids;
}

std::array<std::vector<SegmentAttributionRecord>, 2> SortWithinCluster(
    const ConceptCluster& cluster, WithinClusterOrder strategy,
    const std::string& target_class,
    const std::array<std::string, 2>& model_ids) {
  std::array<std::vector<SegmentAttributionRecord>, 2> rows;
  for (const auto& r : cluster.members) {
    if (r.source_model == model_ids[0]) rows[0].push_back(r);
    else if (r.source_model == model_ids[1]) rows[1].push_back(r);
  }
  auto tie = [](const SegmentAttributionRecord& r) {
    return std::tie(r.seg.image_id, r.seg.row, r.seg.col);
  };
  for (auto& row : rows) {
    if (strategy == WithinClusterOrder::kAttributionDesc) {
      std::sort(row.begin(), row.end(), [&](const auto& x, const auto& y) {
        const double sx = x.ShapleyFor(target_class);
        const double sy = y.ShapleyFor(target_class);
        if (sx != sy) return sx > sy;
        return tie(x) < tie(y);
      });
    } else {
      std::sort(row.begin(), row.end(), [&](const auto& x, const auto& y) {
        const double dx = kernels::SquaredDistance(x.embedding, cluster.centroid);
        const double dy = kernels::SquaredDistance(y.embedding, cluster.centroid);
        if (dx != dy) return dx < dy;
        return tie(x) < tie(y);
      });
    }
  }
  return rows;
}

nlohmann::json ToJson(const ClusterStats& s) {
  nlohmann::json per_model = nlohmann::json::object();
  for (int w = 0; w < 2; ++w) {
    per_model[s.model_ids[w]] = {{"count", s.models[w].count},
                                 {"histogram", s.models[w].histogram},
                                 {"mean_attribution", s.models[w].mean},
                                 {"empty", s.models[w].empty}};
  }
  return {{"cluster_id", s.cluster_id},
          {"total", s.total},
          {"models", per_model},
          {"model_order", s.model_ids},
          {"global_max_mean", s.global_max_mean}};
}

nlohmann::json ToJson(const Binning& b) {
  std::vector<double> edges;
  for (int i = 0; i <= b.bins; ++i) edges.push_back(b.Edge(i));
  return {{"limit", b.limit}, {"bins", b.bins}, {"edges", edges}};
}

}  // namespace attrcmp
