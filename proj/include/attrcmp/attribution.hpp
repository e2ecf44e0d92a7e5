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

#ifndef ATTRCMP_ATTRIBUTION_HPP_
#define ATTRCMP_ATTRIBUTION_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrcmp/dataset.hpp"
#include "attrcmp/model.hpp"
#include "attrcmp/segmenter.hpp"
#include "json.hpp"

namespace attrcmp {

// Largest coalition universe enumerated exactly (2^12 model evaluations).
inline constexpr int kMaxExactShapleySegments = 12;

struct AttributionConfig {
  int top_classes_k = 5;
  int segments_per_image_m = 5;
  int ig_steps = 128;
  int grid_rows = 4;
  int grid_cols = 4;
  std::optional<double> blur_sigma;  // nullopt: AutoSigma
  float baseline_value = 0.0f;       // constant IG baseline (black)

  // Throws InputError on out-of-range fields.
  void Validate() const;
  double SigmaFor(const Shape& shape) const;
};

nlohmann::json ToJson(const AttributionConfig& cfg);
AttributionConfig AttributionConfigFromJson(const nlohmann::json& j);

// Straight-line integrated gradients with the midpoint rule:
// (x - baseline) * mean_j grad f_c(baseline + t_j (x - baseline)),
// t_j = (j + 1/2) / steps.
SaliencyMap IntegratedGradients(const ModelHandle& model,
                                const ImageTensor& image,
                                const ImageTensor& baseline, int class_index,
                                int steps);

// Signed sum of saliency over each segment's pixels and channels.
std::vector<double> SegmentPrescores(const SaliencyMap& saliency,
                                     std::span<const SegmentRef> segments);

// prescores[class][segment]. Aggregates by max over classes, returns the
// indices of the m best segments; ties keep row-major order.
std::vector<int> SelectTopSegments(
    const std::vector<std::vector<double>>& prescores, int m);

// Shapley values from a characteristic function tabulated by coalition mask
// (bit i = player i present). v.size() must be 2^m.
std::vector<double> ShapleyFromValues(std::span<const double> v, int m);

struct ShapleyResult {
  // values[segment][class position]
  std::vector<std::vector<double>> values;
  // coalition_values[mask][class position]
  std::vector<std::vector<double>> coalition_values;
};

// Exact enumeration over the selected segments. Absent segments are blurred;
// unselected segments are never touched. One batched Predict call of 2^m
// images serves all classes.
ShapleyResult ShapleyExact(const ModelHandle& model, const ImageTensor& image,
                           std::span<const SegmentRef> selected,
                           std::span<const int> class_indices,
                           double blur_sigma);

// v_c(full) - v_c(segment blurred) per segment, for models without
// gradients. One Predict call of N images.
std::vector<std::vector<double>> OcclusionPrescores(
    const ModelHandle& model, const ImageTensor& image,
    const ScoreVector& full_scores, std::span<const SegmentRef> segments,
    std::span<const int> class_indices, double blur_sigma);

// Top-k classes by score (ties to the lower index), then the target class if
// it is not already among them.
std::vector<int> AttributionClasses(const ScoreVector& scores, int k,
                                    int target_index);

// Externally computed saliency maps, one JSON file per (model, image, class):
// <root>/<model id>/<image id>.<class>.json = {saliency:[...], shape:[H,W,C]}.
class SaliencyDirectory {
 public:
  explicit SaliencyDirectory(std::filesystem::path root = {})
      : root_(std::move(root)) {}
  std::optional<SaliencyMap> Find(const std::string& model_id,
                                  const std::string& image_id,
                                  const std::string& class_name) const;
  std::filesystem::path PathFor(const std::string& model_id,
                                const std::string& image_id,
                                const std::string& class_name) const;
  bool enabled() const { return !root_.empty(); }

 private:
  std::filesystem::path root_;
};

struct SegmentAttributionRecord {
  SegmentRef seg;
  std::string source_model;
  Quadrant quadrant = Quadrant::kTN;
  std::map<std::string, double> shapley;
  std::map<std::string, double> prescore;
  std::vector<double> embedding;

  double ShapleyFor(const std::string& class_name) const;
};

nlohmann::json ToJson(const SegmentAttributionRecord& r);
SegmentAttributionRecord RecordFromJson(const nlohmann::json& j);

std::string ToJsonLines(std::span<const SegmentAttributionRecord> records);
std::vector<SegmentAttributionRecord> RecordsFromJsonLines(
    const std::string& text);

struct AttributionStats {
  std::uint64_t coalition_images = 0;
  std::uint64_t occlusion_images = 0;
  std::uint64_t gradient_calls = 0;
};

// m records per sampled image, ordered by sample member then selection rank.
// Any failure aborts the whole sample.
std::vector<SegmentAttributionRecord> AttributeSample(
    const ModelHandle& model, const SampleSet& sample, const ImageStore& store,
    const std::string& target_class, const AttributionConfig& cfg,
    const SaliencyDirectory& saliency = SaliencyDirectory(),
    AttributionStats* stats = nullptr);

}  // namespace attrcmp

#endif  // ATTRCMP_ATTRIBUTION_HPP_
