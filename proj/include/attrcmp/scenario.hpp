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

#ifndef ATTRCMP_SCENARIO_HPP_
#define ATTRCMP_SCENARIO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "attrcmp/segmenter.hpp"
#include "attrcmp/tensor.hpp"
#include "json.hpp"

namespace attrcmp {

// Synthetic two-class dataset with a planted spurious feature.
//
// Images are 32x32 RGB on per-pixel gray noise (R = G = B). Class "top" has
// a yellow disc in the upper half, class "bottom" a red disc in the lower
// half. A fraction of the "bottom" images carries a 4x4 white stamp placed
// strictly inside one 8x8 grid cell that the disc does not touch.
struct WatermarkScenarioParams {
  std::uint64_t seed = 0;
  int n_images = 100;
  double watermark_rate = 0.5;
  double redness_gain = 3.0;
  double watermark_gain = 8.0;
};

inline constexpr int kScenarioSide = 32;
inline constexpr int kScenarioGrid = 4;
inline constexpr int kStampSide = 4;

struct WatermarkStamp {
  std::string image_id;
  int cell_row = 0;
  int cell_col = 0;
  BBox box;  // stamp pixels
};

struct WatermarkScenario {
  std::filesystem::path dir;
  std::filesystem::path manifest;
  std::filesystem::path model_a_spec;
  std::filesystem::path model_b_spec;
  std::filesystem::path config;  // ready-to-run pipeline config
  nlohmann::json spec_a;
  nlohmann::json spec_b;
  std::vector<std::string> class_names;  // {"top", "bottom"}
  std::string target_class;              // "bottom"
  int class_counts[2] = {0, 0};
  std::vector<WatermarkStamp> stamps;

  bool IsStamped(const std::string& image_id, int row, int col) const;
};

// One image of the scenario, with the stamp applied when `stamp` is set.
// Exposed so tests can compare stamped and clean versions.
struct ScenarioImage {
  ImageTensor clean;
  ImageTensor stamped;
  int label = 0;
  bool has_stamp = false;
  WatermarkStamp stamp;
};
std::vector<ScenarioImage> MakeScenarioImages(
    const WatermarkScenarioParams& params);

nlohmann::json HandcraftedSpec(const std::string& id, double redness_gain,
                               double watermark_gain);

// Writes images/, manifest.csv, model_a.json, model_b.json, scenario.json and
// config.json under `out_dir`. Requires n_images >= 40.
inline constexpr int kScenarioClusters = 6;
WatermarkScenario GenerateWatermarkScenario(
    const WatermarkScenarioParams& params, const std::filesystem::path& out_dir);

// Reads back scenario.json.
WatermarkScenario LoadWatermarkScenario(const std::filesystem::path& dir);

}  // namespace attrcmp

#endif  // ATTRCMP_SCENARIO_HPP_
