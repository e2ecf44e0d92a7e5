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

#ifndef ATTRCMP_DATASET_HPP_
#define ATTRCMP_DATASET_HPP_

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attrcmp/model.hpp"
#include "attrcmp/tensor.hpp"
#include "json.hpp"

namespace attrcmp {

// One-vs-rest correctness of a whole image relative to a target class.
enum class Quadrant { kTP = 0, kTN = 1, kFP = 2, kFN = 3 };

inline constexpr std::array<Quadrant, 4> kQuadrantOrder = {
    Quadrant::kTP, Quadrant::kTN, Quadrant::kFP, Quadrant::kFN};

std::string_view QuadrantName(Quadrant q);
Quadrant ParseQuadrant(std::string_view name);

struct ManifestEntry {
  std::string image_path;  // relative to the manifest directory; the image id
  std::string label;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
};

// CSV with header `image_path,label`. Every label must appear in each of
// `class_lists`; paths must be unique and name readable PNGs.
DatasetManifest LoadManifest(
    const std::filesystem::path& csv_path,
    std::span<const std::vector<std::string>> class_lists = {});

// Argmax ties go to the lowest class index.
Quadrant ClassifyQuadrant(const ScoreVector& prediction,
                          const std::string& label,
                          const std::string& target_class,
                          const std::vector<std::string>& class_names);

// Thread-safe lazy PNG loader keyed by image id.
class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path root) : root_(std::move(root)) {}
  std::shared_ptr<const ImageTensor> Get(const std::string& image_id) const;
  // For in-memory use (tests, generators).
  void Put(const std::string& image_id, ImageTensor image);

 private:
  std::filesystem::path root_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const ImageTensor>> cache_;
};

// One JSON file {scores:[...]} per (model, image content). Concurrent reads;
// writes are serialized and atomic. An empty directory disables caching.
class PredictionCache {
 public:
  explicit PredictionCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<ScoreVector> Get(const ModelHandle& model,
                                 const ImageTensor& image) const;
  void Put(const ModelHandle& model, const ImageTensor& image,
           const ScoreVector& scores);

  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  std::filesystem::path PathFor(const ModelHandle& model,
                                const ImageTensor& image) const;

  std::filesystem::path dir_;
  std::mutex write_mu_;
  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
};

struct Prediction {
  std::string image_id;
  std::string label;
  ScoreVector scores;
};

// Predicts every manifest entry (parallel per image), consulting the cache.
std::vector<Prediction> PredictManifest(const ModelHandle& model,
                                        const DatasetManifest& manifest,
                                        const ImageStore& store,
                                        PredictionCache* cache);

struct SampleMember {
  std::string image_id;
  std::string label;
  Quadrant quadrant = Quadrant::kTN;
  ScoreVector scores;
};

struct SampleSet {
  std::string model_id;
  std::string target_class;
  std::uint64_t seed = 0;
  std::vector<SampleMember> members;

  std::array<int, 4> QuadrantCounts() const;
};

// budget/4 images per quadrant, drawn without replacement. Short quadrants
// give up all they have and the remainder is handed out one image at a time,
// round-robin over TP, TN, FP, FN, to quadrants with unused candidates.
SampleSet SampleBalanced(std::span<const Prediction> candidates,
                         const ModelHandle& model,
                         const std::string& target_class, int budget,
                         std::uint64_t seed);

// Per-quadrant quota for the rule above; exposed for tests.
std::array<int, 4> BalancedQuota(const std::array<int, 4>& available,
                                 int budget);

// Images present in both sets whose argmax classes differ while both top
// scores reach `threshold`. Order follows set_a.
std::vector<std::string> FilterConfidentDisagreement(const SampleSet& set_a,
                                                     const SampleSet& set_b,
                                                     double threshold);

nlohmann::json ToJson(const SampleSet& set);
SampleSet SampleSetFromJson(const nlohmann::json& j);

}  // namespace attrcmp

#endif  // ATTRCMP_DATASET_HPP_
