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

#ifndef ATTRCMP_PIPELINE_HPP_
#define ATTRCMP_PIPELINE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attrcmp/attribution.hpp"
#include "attrcmp/clustering.hpp"
#include "attrcmp/dataset.hpp"
#include "attrcmp/model.hpp"
#include "attrcmp/report.hpp"
#include "json.hpp"

namespace attrcmp {

enum class FilterMode { kNone, kConfidentDisagreement, kFalsePositivesOnly };

FilterMode ParseFilterMode(std::string_view name);
std::string_view FilterModeName(FilterMode mode);

struct FilterConfig {
  FilterMode mode = FilterMode::kNone;
  double threshold = 0.9;  // confident_disagreement only
};

struct PipelineConfig {
  std::filesystem::path manifest;
  nlohmann::json model_a;  // model specs, see ModelFromSpec
  nlohmann::json model_b;
  nlohmann::json embedder = {{"kind", "builtin-embedder"}};
  std::string target_class;
  int budget = 100;
  AttributionConfig attribution;
  ClusterConfig clustering;  // its seed is replaced by `seed`
  ClusterOrder ordering = ClusterOrder::kImbalance;
  WithinClusterOrder within_cluster = WithinClusterOrder::kAttributionDesc;
  FilterConfig filter;
  std::filesystem::path output_dir;
  std::optional<std::uint64_t> seed;
  // Relative to output_dir unless absolute; empty disables the cache.
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path saliency_dir;  // empty: compute IG
  int threads = 0;                     // 0: OpenMP default
  std::string title = "Model comparison";

  // Throws InputError. Seed presence is checked by the stages that need it.
  void Validate() const;
};

nlohmann::json ToJson(const PipelineConfig& cfg);
// Relative paths (manifest, output_dir, model spec files given as strings)
// resolve against `base_dir`.
PipelineConfig PipelineConfigFromJson(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir);
nlohmann::json LoadConfigDocument(const std::filesystem::path& file);

// Sets doc[a][b][c] for key "a.b.c". The value is parsed as JSON when it is
// valid JSON and taken as a string otherwise.
void ApplyOverride(nlohmann::json& doc, std::string_view dotted_key,
                   std::string_view value);

// A failure inside a stage; keeps the kind of the underlying error.
class StageError : public Error {
 public:
  StageError(ErrorKind kind, std::string stage, std::filesystem::path artifact,
             const std::string& cause);
  const std::string& stage() const { return stage_; }
  const std::filesystem::path& artifact() const { return artifact_; }

 private:
  std::string stage_;
  std::filesystem::path artifact_;
};

struct ModelCallTally {
  std::uint64_t predict_calls = 0;
  std::uint64_t predict_images = 0;
  std::uint64_t gradient_calls = 0;
  std::uint64_t embed_calls = 0;
  std::uint64_t embed_patches = 0;
  // What the stages asked for: uncached manifest predictions plus coalition
  // and occlusion images.
  std::uint64_t expected_predict_images = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
};

struct RunSummary {
  std::filesystem::path output_dir;
  std::map<std::string, std::filesystem::path> files;
  std::array<std::string, 2> model_ids;
  std::string target_class;
  int num_clusters = 0;
  double global_max_mean = 0.0;
  std::vector<ClusterStats> ordered_stats;  // display order
  std::array<int, 4> quadrant_counts_a{};
  std::array<int, 4> quadrant_counts_b{};
  std::array<std::size_t, 2> records{};
  std::array<ModelCallTally, 2> calls;
  std::uint64_t embedder_calls = 0;
  std::vector<std::string> stages_run;
  std::vector<std::string> stages_reused;

  std::uint64_t TotalModelCalls() const;
  nlohmann::json ToJson() const;
};

// Stage runner over one output directory. Every stage persists its artifact
// together with a fingerprint of everything it depends on; a stage whose
// fingerprint matches the stored one reloads the artifact instead of
// recomputing, which makes reruns free and lets runs resume.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg);
  ~Pipeline();

  void Ingest();
  void Sample();
  void Attribute();
  void Cluster();
  void Report();
  RunSummary Run();

  RunSummary Summary() const;
  const PipelineConfig& config() const { return cfg_; }

  // Loaded or computed artifacts; valid after the matching stage.
  const std::array<SampleSet, 2>& samples() const;
  const std::array<std::vector<SegmentAttributionRecord>, 2>& records() const;
  const std::vector<ConceptCluster>& clusters() const;
  const std::vector<ClusterStats>& stats() const;  // indexed by cluster id
  const std::vector<int>& order() const;

  std::filesystem::path ArtifactPath(std::string_view name) const;

 private:
  struct State;
  PipelineConfig cfg_;
  std::unique_ptr<State> st_;
};

RunSummary RunPipeline(const PipelineConfig& cfg);

struct UntrainedVerdict {
  bool pass = false;
  std::string opponent_kind;
  double threshold = 0.10;  // on max |mean_B| / global_max_mean
  double max_abs_mean_b = 0.0;
  double global_max_mean = 0.0;
  double ratio = 0.0;
  std::vector<double> per_cluster_ratio;  // display order
  std::size_t nonzero_b_values = 0;       // all classes, builtin-constant
  RunSummary run;

  nlohmann::json ToJson() const;
};

// Runs the pipeline with model B builtin-constant or builtin-random and
// checks that B's attributions vanish (exactly zero for constant, below the
// ratio threshold for random).
UntrainedVerdict ValidateUntrained(const PipelineConfig& cfg);

}  // namespace attrcmp

#endif  // ATTRCMP_PIPELINE_HPP_
