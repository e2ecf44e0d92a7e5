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

#include "attrcmp/scenario.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "attrcmp/io.hpp"
#include "attrcmp/rng.hpp"

namespace attrcmp {
namespace {

constexpr int kCell = kScenarioSide / kScenarioGrid;
constexpr double kDiscRadius = 2.5;
constexpr double kGrayMean = 0.25;
constexpr double kGrayNoise = 0.04;
constexpr float kTopColor[3] = {0.95f, 0.90f, 0.10f};
constexpr float kBottomColor[3] = {0.90f, 0.10f, 0.10f};

const std::vector<std::string>& ScenarioClasses() {
  static const std::vector<std::string> names = {"top", "bottom"};
  return names;
}

// Snaps to the 8-bit grid so in-memory images equal their PNG round trip.
float Quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<float>(std::lround(c * 255.0)) / 255.0f;
}

std::string ImageId(int i) { return fmt::format("images/img_{:04d}.png", i); }

nlohmann::json StampJson(const WatermarkStamp& s) {
  return {{"image_id", s.image_id},
          {"cell", {s.cell_row, s.cell_col}},
          {"box", {s.box.top, s.box.left, s.box.height, s.box.width}}};
}

WatermarkStamp StampFromJson(const nlohmann::json& j) {
  WatermarkStamp s;
  s.image_id = j.at("image_id").get<std::string>();
  s.cell_row = j.at("cell").at(0).get<int>();
  s.cell_col = j.at("cell").at(1).get<int>();
  const auto& b = j.at("box");
  s.box = {b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(),
           b.at(3).get<int>()};
  return s;
}

}  // namespace

bool WatermarkScenario::IsStamped(const std::string& image_id, int row,
                                  int col) const {
  return std::any_of(stamps.begin(), stamps.end(), [&](const auto& s) {
    return s.image_id == image_id && s.cell_row == row && s.cell_col == col;
  });
}

std::vector<ScenarioImage> MakeScenarioImages(
    const WatermarkScenarioParams& params) {
  if (params.n_images < 40) {
    throw InputError("watermark scenario needs n_images >= 40, got " +
                     std::to_string(params.n_images));
  }
  if (!(params.watermark_rate >= 0.0 && params.watermark_rate <= 1.0)) {
    throw InputError("watermark_rate must be in [0, 1]");
  }
  const Shape shape{kScenarioSide, kScenarioSide, 3};
  Rng master(params.seed);
  std::vector<ScenarioImage> out;
  out.reserve(params.n_images);
  for (int i = 0; i < params.n_images; ++i) {
    Rng rng(master.Next());
    ScenarioImage img;
    img.label = i % 2;
    ImageTensor t(shape);
    for (int r = 0; r < kScenarioSide; ++r) {
      for (int c = 0; c < kScenarioSide; ++c) {
        const float g = Quantize(kGrayMean + kGrayNoise * rng.Normal());
        for (int ch = 0; ch < 3; ++ch) t.at(r, c, ch) = g;
      }
    }
    // The disc is centered in one grid cell of its half and stays inside it.
    const int half_rows = kScenarioGrid / 2;
    const int blob_row = static_cast<int>(rng.Below(half_rows)) +
                         (img.label == 1 ? half_rows : 0);
    const int blob_col = static_cast<int>(rng.Below(kScenarioGrid));
    const double cy = blob_row * kCell + (kCell - 1) / 2.0;
    const double cx = blob_col * kCell + (kCell - 1) / 2.0;
    const float* color = img.label == 0 ? kTopColor : kBottomColor;
    for (int r = blob_row * kCell; r < (blob_row + 1) * kCell; ++r) {
      for (int c = blob_col * kCell; c < (blob_col + 1) * kCell; ++c) {
        const double dr = r - cy, dc = c - cx;
        if (dr * dr + dc * dc > kDiscRadius * kDiscRadius) continue;
        for (int ch = 0; ch < 3; ++ch) t.at(r, c, ch) = Quantize(color[ch]);
      }
    }
    img.clean = t;
    img.stamped = t;
    const bool wants_stamp =
        img.label == 1 && rng.Uniform() < params.watermark_rate;
    if (wants_stamp) {
      int cell = static_cast<int>(rng.Below(kScenarioGrid * kScenarioGrid - 1));
      if (cell >= blob_row * kScenarioGrid + blob_col) ++cell;  // skip the disc
      const int row = cell / kScenarioGrid, col = cell % kScenarioGrid;
      // Offsets 1..kCell-kStampSide-1 keep the stamp off the cell border.
      const int slack = kCell - kStampSide - 1;
      const int top = row * kCell + 1 + static_cast<int>(rng.Below(slack));
      const int left = col * kCell + 1 + static_cast<int>(rng.Below(slack));
      img.has_stamp = true;
      img.stamp = {ImageId(i), row, col, {top, left, kStampSide, kStampSide}};
      for (int r = top; r < top + kStampSide; ++r) {
        for (int c = left; c < left + kStampSide; ++c) {
          for (int ch = 0; ch < 3; ++ch) img.stamped.at(r, c, ch) = 1.0f;
        }
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

nlohmann::json HandcraftedSpec(const std::string& id, double redness_gain,
                               double watermark_gain) {
  return {{"id", id},
          {"kind", "builtin-handcrafted"},
          {"input_shape", {kScenarioSide, kScenarioSide, 3}},
          {"class_names", ScenarioClasses()},
          {"redness_gain", redness_gain},
          {"watermark_gain", watermark_gain}};
}

WatermarkScenario GenerateWatermarkScenario(
    const WatermarkScenarioParams& params,
    const std::filesystem::path& out_dir) {
  const auto images = MakeScenarioImages(params);
  WatermarkScenario sc;
  sc.dir = out_dir;
  sc.class_names = ScenarioClasses();
  sc.target_class = sc.class_names[1];
  sc.manifest = out_dir / "manifest.csv";
  sc.model_a_spec = out_dir / "model_a.json";
  sc.model_b_spec = out_dir / "model_b.json";
  sc.config = out_dir / "config.json";
  sc.spec_a = HandcraftedSpec("A", params.redness_gain, 0.0);
  sc.spec_b = HandcraftedSpec("B", params.redness_gain, params.watermark_gain);

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  if (ec) {
    throw IoError("cannot create scenario directory " + out_dir.string() +
                  ": " + ec.message());
  }
  std::ostringstream csv;
  csv << "image_path,label\n";
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    const std::string id = ImageId(static_cast<int>(i));
    io::WritePng(out_dir / id, img.has_stamp ? img.stamped : img.clean);
    csv << id << ',' << sc.class_names[img.label] << '\n';
    ++sc.class_counts[img.label];
    if (img.has_stamp) sc.stamps.push_back(img.stamp);
  }
  io::WriteTextAtomic(sc.manifest, csv.str());
  io::WriteJson(sc.model_a_spec, sc.spec_a);
  io::WriteJson(sc.model_b_spec, sc.spec_b);

  nlohmann::json stamps = nlohmann::json::array();
  for (const auto& s : sc.stamps) stamps.push_back(StampJson(s));
  io::WriteJson(out_dir / "scenario.json",
                {{"seed", params.seed},
                 {"n_images", params.n_images},
                 {"watermark_rate", params.watermark_rate},
                 {"class_names", sc.class_names},
                 {"target_class", sc.target_class},
                 {"class_counts", {sc.class_counts[0], sc.class_counts[1]}},
                 {"watermarked_count", sc.stamps.size()},
                 {"watermarked", stamps}});
  io::WriteJson(sc.config, {{"manifest", "manifest.csv"},
                            {"model_a", sc.spec_a},
                            {"model_b", sc.spec_b},
                            {"target_class", sc.target_class},
                            {"output_dir", "run"},
                            {"clustering", {{"num_clusters", kScenarioClusters}}},
                            {"seed", params.seed}});
  return sc;
}

WatermarkScenario LoadWatermarkScenario(const std::filesystem::path& dir) {
  const auto meta = io::ReadJson(dir / "scenario.json");
  WatermarkScenario sc;
  sc.dir = dir;
  sc.manifest = dir / "manifest.csv";
  sc.model_a_spec = dir / "model_a.json";
  sc.model_b_spec = dir / "model_b.json";
  sc.config = dir / "config.json";
  sc.spec_a = io::ReadJson(sc.model_a_spec);
  sc.spec_b = io::ReadJson(sc.model_b_spec);
  sc.class_names = meta.at("class_names").get<std::vector<std::string>>();
  sc.target_class = meta.at("target_class").get<std::string>();
  sc.class_counts[0] = meta.at("class_counts").at(0).get<int>();
  sc.class_counts[1] = meta.at("class_counts").at(1).get<int>();
  for (const auto& s : meta.at("watermarked")) {
    sc.stamps.push_back(StampFromJson(s));
  }
  return sc;
}

}  // namespace attrcmp
