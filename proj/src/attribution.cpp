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

#include "attrcmp/attribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>

#include "attrcmp/error.hpp"
#include "attrcmp/io.hpp"
#include "attrcmp/kernels.hpp"

namespace attrcmp {

void AttributionConfig::Validate() const {
  const int cells = grid_rows * grid_cols;
  if (grid_rows < 1 || grid_cols < 1) throw InputError("grid must be >= 1x1");
  if (segments_per_image_m < 1 || segments_per_image_m > cells) {
    throw InputError("segments_per_image_m must lie in [1, " +
                     std::to_string(cells) + "]");
  }
  if (top_classes_k < 1) throw InputError("top_classes_k must be >= 1");
  if (ig_steps < 8) throw InputError("ig_steps must be >= 8");
  if (blur_sigma && !(*blur_sigma > 0.0)) {
    throw InputError("blur_sigma must be positive or \"auto\"");
  }
  if (!(baseline_value >= 0.0f && baseline_value <= 1.0f)) {
    throw InputError("baseline_value must lie in [0,1]");
  }
}

double AttributionConfig::SigmaFor(const Shape& shape) const {
  return blur_sigma ? *blur_sigma
                    : AutoSigma(shape.height, shape.width, grid_rows,
                                grid_cols);
}

nlohmann::json ToJson(const AttributionConfig& cfg) {
  nlohmann::json j{{"top_classes_k", cfg.top_classes_k},
                   {"segments_per_image_m", cfg.segments_per_image_m},
                   {"ig_steps", cfg.ig_steps},
                   {"grid_rows", cfg.grid_rows},
                   {"grid_cols", cfg.grid_cols},
                   {"baseline_value", cfg.baseline_value}};
  if (cfg.blur_sigma) {
    j["blur_sigma"] = *cfg.blur_sigma;
  } else {
    j["blur_sigma"] = "auto";
  }
  return j;
}

AttributionConfig AttributionConfigFromJson(const nlohmann::json& j) {
  AttributionConfig cfg;
  cfg.top_classes_k = j.value("top_classes_k", cfg.top_classes_k);
  cfg.segments_per_image_m =
      j.value("segments_per_image_m", cfg.segments_per_image_m);
  cfg.ig_steps = j.value("ig_steps", cfg.ig_steps);
  cfg.grid_rows = j.value("grid_rows", cfg.grid_rows);
  cfg.grid_cols = j.value("grid_cols", cfg.grid_cols);
  cfg.baseline_value = j.value("baseline_value", cfg.baseline_value);
  if (j.contains("blur_sigma") && !j.at("blur_sigma").is_string()) {
    cfg.blur_sigma = j.at("blur_sigma").get<double>();
  } else if (j.contains("blur_sigma") && j.at("blur_sigma") != "auto") {
    throw InputError("blur_sigma must be a number or \"auto\"");
  }
  return cfg;
}

SaliencyMap IntegratedGradients(const ModelHandle& model,
                                const ImageTensor& image,
                                const ImageTensor& baseline, int class_index,
                                int steps) {
  if (!model.supports_gradient()) {
    throw CapabilityError("integrated gradients need a gradient-capable model; '" +
                          model.id() + "' is not");
  }
  if (baseline.shape() != image.shape()) {
    throw InputError("baseline shape " + baseline.shape().ToString() +
                     " differs from image " + image.shape().ToString());
  }
  if (steps < 1) throw InputError("integrated gradients need >= 1 step");
  const std::size_t n = image.size();
  std::vector<SaliencyMap> grads(steps);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < steps; ++j) {
    const double t = (j + 0.5) / steps;
    ImageTensor point(image.shape());
    for (std::size_t i = 0; i < n; ++i) {
      const double b = baseline.data()[i];
      point.data()[i] = static_cast<float>(b + t * (image.data()[i] - b));
    }
    grads[j] = model.Gradient(point, class_index);
  }
  SaliencyMap out(image.shape(), 0.0);
  for (int j = 0; j < steps; ++j) {
    for (std::size_t i = 0; i < n; ++i) out.data()[i] += grads[j].data()[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double delta =
        static_cast<double>(image.data()[i]) - baseline.data()[i];
    out.data()[i] = delta * (out.data()[i] / steps);
  }
  return out;
}

std::vector<double> SegmentPrescores(const SaliencyMap& saliency,
                                     std::span<const SegmentRef> segments) {
  std::vector<double> out;
  out.reserve(segments.size());
  for (const auto& seg : segments) {
    const BBox& b = seg.bbox;
    if (b.top + b.height > saliency.height() ||
        b.left + b.width > saliency.width()) {
      throw InputError("segment exceeds saliency map " +
                       saliency.shape().ToString());
    }
    double s = 0.0;
    for (int r = b.top; r < b.top + b.height; ++r) {
      for (int c = b.left; c < b.left + b.width; ++c) {
        for (int ch = 0; ch < saliency.channels(); ++ch) {
          s += saliency.at(r, c, ch);
        }
      }
    }
    out.push_back(s);
  }
  return out;
}

std::vector<int> SelectTopSegments(
    const std::vector<std::vector<double>>& prescores, int m) {
  if (prescores.empty()) throw InputError("no class pre-scores to rank");
  const std::size_t n = prescores.front().size();
  if (m < 1 || static_cast<std::size_t>(m) > n) {
    throw InputError("cannot select " + std::to_string(m) + " of " +
                     std::to_string(n) + " segments");
  }
  std::vector<double> aggregate(n, -std::numeric_limits<double>::infinity());
  for (const auto& per_class : prescores) {
    if (per_class.size() != n) throw InputError("ragged pre-score table");
    for (std::size_t i = 0; i < n; ++i) {
      aggregate[i] = std::max(aggregate[i], per_class[i]);
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return aggregate[a] > aggregate[b];
  });
  order.resize(m);
  return order;
}

std::vector<double> ShapleyFromValues(std::span<const double> v, int m) {
  if (m < 1 || m > 30 || v.size() != (std::size_t{1} << m)) {
    throw InputError("characteristic table must have 2^m entries");
  }
  // weight[s] = s! (m - s - 1)! / m!
  std::vector<double> factorial(m + 1, 1.0);
  for (int i = 1; i <= m; ++i) factorial[i] = factorial[i - 1] * i;
  std::vector<double> weight(m);
  for (int s = 0; s < m; ++s) {
    weight[s] = factorial[s] * factorial[m - s - 1] / factorial[m];
  }
  std::vector<double> phi(m, 0.0);
  const unsigned full = (1u << m);
  for (int i = 0; i < m; ++i) {
    const unsigned bit = 1u << i;
    double acc = 0.0;
    for (unsigned mask = 0; mask < full; ++mask) {
      if (mask & bit) continue;
      const int size = std::popcount(mask);
      acc += weight[size] * (v[mask | bit] - v[mask]);
    }
    phi[i] = acc;
  }
  return phi;
}

ShapleyResult ShapleyExact(const ModelHandle& model, const ImageTensor& image,
                           std::span<const SegmentRef> selected,
                           std::span<const int> class_indices,
                           double blur_sigma) {
  const int m = static_cast<int>(selected.size());
  if (m > kMaxExactShapleySegments) {
    throw ResourceError("exact Shapley over " + std::to_string(m) +
                        " segments needs 2^" + std::to_string(m) +
                        " model calls; limit is " +
                        std::to_string(kMaxExactShapleySegments) +
                        " (sampled estimators are not supported)");
  }
  if (m < 1) throw InputError("no segments selected for Shapley values");
  if (class_indices.empty()) throw InputError("no classes requested");
  for (const auto& seg : selected) CheckSegmentFits(image, seg);

  const auto blurred = kernels::GaussianBlur(image, blur_sigma);
  std::vector<BBox> boxes;
  for (const auto& seg : selected) boxes.push_back(seg.bbox);
  const auto images = kernels::CoalitionImages(image, blurred, boxes);
  const auto scores = model.Predict(images);

  ShapleyResult result;
  result.coalition_values.assign(images.size(),
                                 std::vector<double>(class_indices.size()));
  for (std::size_t mask = 0; mask < images.size(); ++mask) {
    for (std::size_t k = 0; k < class_indices.size(); ++k) {
      result.coalition_values[mask][k] = scores[mask].scores[class_indices[k]];
    }
  }
  result.values.assign(m, std::vector<double>(class_indices.size()));
  std::vector<double> v(images.size());
  for (std::size_t k = 0; k < class_indices.size(); ++k) {
    for (std::size_t mask = 0; mask < images.size(); ++mask) {
      v[mask] = result.coalition_values[mask][k];
    }
    const auto phi = ShapleyFromValues(v, m);
    for (int i = 0; i < m; ++i) result.values[i][k] = phi[i];
  }
  return result;
}

std::vector<std::vector<double>> OcclusionPrescores(
    const ModelHandle& model, const ImageTensor& image,
    const ScoreVector& full_scores, std::span<const SegmentRef> segments,
    std::span<const int> class_indices, double blur_sigma) {
  const auto blurred = kernels::GaussianBlur(image, blur_sigma);
  std::vector<ImageTensor> occluded;
  occluded.reserve(segments.size());
  for (const auto& seg : segments) {
    const BBox box = seg.bbox;
    // Mask 0 over a single box is "that segment blurred".
    occluded.push_back(
        kernels::serial::CoalitionImages(image, blurred,
                                         std::span<const BBox>(&box, 1))[0]);
  }
  const auto scores = model.Predict(occluded);
  std::vector<std::vector<double>> out(class_indices.size(),
                                       std::vector<double>(segments.size()));
  for (std::size_t k = 0; k < class_indices.size(); ++k) {
    for (std::size_t s = 0; s < segments.size(); ++s) {
      out[k][s] = full_scores.scores[class_indices[k]] -
                  scores[s].scores[class_indices[k]];
    }
  }
  return out;
}

std::vector<int> AttributionClasses(const ScoreVector& scores, int k,
                                    int target_index) {
  const int classes = static_cast<int>(scores.scores.size());
  std::vector<int> order(classes);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores.scores[a] > scores.scores[b];
  });
  order.resize(std::min(k, classes));
  if (std::find(order.begin(), order.end(), target_index) == order.end()) {
    order.push_back(target_index);
  }
  return order;
}

namespace {

std::string SafeComponent(const std::string& s) {
  std::string out;
  for (char c : s) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                          c == '_' || c == '.' || c == '/'
                      ? c
                      : '_');
  }
  return out;
}

}  // namespace

std::filesystem::path SaliencyDirectory::PathFor(
    const std::string& model_id, const std::string& image_id,
    const std::string& class_name) const {
  return root_ / SafeComponent(model_id) /
         (SafeComponent(image_id) + "." + SafeComponent(class_name) + ".json");
}

std::optional<SaliencyMap> SaliencyDirectory::Find(
    const std::string& model_id, const std::string& image_id,
    const std::string& class_name) const {
  if (root_.empty()) return std::nullopt;
  const auto path = PathFor(model_id, image_id, class_name);
  if (!std::filesystem::exists(path)) return std::nullopt;
  const auto doc = io::ReadJson(path);
  try {
    const auto& s = doc.at("shape");
    return SaliencyMap(Shape{s.at(0).get<int>(), s.at(1).get<int>(),
                             s.at(2).get<int>()},
                       doc.at("saliency").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed saliency file " + path.string() + ": " +
                     e.what());
  }
}

double SegmentAttributionRecord::ShapleyFor(
    const std::string& class_name) const {
  const auto it = shapley.find(class_name);
  if (it == shapley.end()) {
    throw InputError("record for '" + seg.image_id + "' (" +
                     std::to_string(seg.row) + "," + std::to_string(seg.col) +
                     ") has no Shapley value for class '" + class_name + "'");
  }
  return it->second;
}

nlohmann::json ToJson(const SegmentAttributionRecord& r) {
  nlohmann::json j{
      {"image_id", r.seg.image_id},
      {"row", r.seg.row},
      {"col", r.seg.col},
      {"bbox", {r.seg.bbox.top, r.seg.bbox.left, r.seg.bbox.height,
                r.seg.bbox.width}},
      {"source_model", r.source_model},
      {"quadrant", QuadrantName(r.quadrant)},
      {"shapley", r.shapley},
      {"prescore", r.prescore},
  };
  if (!r.embedding.empty()) j["embedding"] = r.embedding;
  return j;
}

SegmentAttributionRecord RecordFromJson(const nlohmann::json& j) {
  SegmentAttributionRecord r;
  r.seg.image_id = j.at("image_id").get<std::string>();
  r.seg.row = j.at("row").get<int>();
  r.seg.col = j.at("col").get<int>();
  const auto& b = j.at("bbox");
  r.seg.bbox = BBox{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(),
                    b.at(3).get<int>()};
  r.source_model = j.at("source_model").get<std::string>();
  r.quadrant = ParseQuadrant(j.at("quadrant").get<std::string>());
  r.shapley = j.at("shapley").get<std::map<std::string, double>>();
  r.prescore = j.at("prescore").get<std::map<std::string, double>>();
  if (j.contains("embedding")) {
    r.embedding = j.at("embedding").get<std::vector<double>>();
  }
  return r;
}

std::string ToJsonLines(std::span<const SegmentAttributionRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += ToJson(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<SegmentAttributionRecord> RecordsFromJsonLines(
    const std::string& text) {
  std::vector<SegmentAttributionRecord> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(RecordFromJson(nlohmann::json::parse(line)));
  }
  return out;
}

std::vector<SegmentAttributionRecord> AttributeSample(
    const ModelHandle& model, const SampleSet& sample, const ImageStore& store,
    const std::string& target_class, const AttributionConfig& cfg,
    const SaliencyDirectory& saliency, AttributionStats* stats) {
  cfg.Validate();
  const int target_index = model.ClassIndex(target_class);
  const int m = cfg.segments_per_image_m;
  if (m > kMaxExactShapleySegments) {
    throw ResourceError("segments_per_image_m = " + std::to_string(m) +
                        " exceeds the exact Shapley limit of " +
                        std::to_string(kMaxExactShapleySegments));
  }
  const long n = static_cast<long>(sample.members.size());
  std::vector<std::vector<SegmentAttributionRecord>> per_image(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<AttributionStats> per_image_stats(n);

#pragma omp parallel for schedule(dynamic)
  for (long idx = 0; idx < n; ++idx) {
    const SampleMember& member = sample.members[idx];
    try {
      const auto image_ptr = store.Get(member.image_id);
      const ImageTensor& image = *image_ptr;
      const auto segments = GridSegments(image.height(), image.width(),
                                         cfg.grid_rows, cfg.grid_cols,
                                         member.image_id);
      const double sigma = cfg.SigmaFor(image.shape());
      const auto classes =
          AttributionClasses(member.scores, cfg.top_classes_k, target_index);
      AttributionStats& st = per_image_stats[idx];

      std::vector<std::vector<double>> prescores(classes.size());
      std::vector<int> missing;  // class positions without external saliency
      for (std::size_t k = 0; k < classes.size(); ++k) {
        auto external = saliency.Find(model.id(), member.image_id,
                                      model.class_names()[classes[k]]);
        if (external) {
          if (external->shape() != image.shape()) {
            throw InputError("external saliency for '" + member.image_id +
                             "' has shape " + external->shape().ToString());
          }
          prescores[k] = SegmentPrescores(*external, segments);
        } else {
          missing.push_back(static_cast<int>(k));
        }
      }
      if (!missing.empty()) {
        if (model.supports_gradient()) {
          const ImageTensor baseline(image.shape(), cfg.baseline_value);
          for (int k : missing) {
            const auto ig = IntegratedGradients(model, image, baseline,
                                                classes[k], cfg.ig_steps);
            st.gradient_calls += cfg.ig_steps;
            prescores[k] = SegmentPrescores(ig, segments);
          }
        } else {
          std::vector<int> missing_classes;
          for (int k : missing) missing_classes.push_back(classes[k]);
          const auto occ = OcclusionPrescores(model, image, member.scores,
                                              segments, missing_classes, sigma);
          st.occlusion_images += segments.size();
          for (std::size_t i = 0; i < missing.size(); ++i) {
            prescores[missing[i]] = occ[i];
          }
        }
      }

      const auto chosen = SelectTopSegments(prescores, m);
      std::vector<SegmentRef> selected;
      for (int s : chosen) selected.push_back(segments[s]);
      const auto shap = ShapleyExact(model, image, selected, classes, sigma);
      st.coalition_images += std::uint64_t{1} << m;

      auto& out = per_image[idx];
      for (std::size_t i = 0; i < selected.size(); ++i) {
        SegmentAttributionRecord rec;
        rec.seg = selected[i];
        rec.source_model = model.id();
        rec.quadrant = member.quadrant;
        for (std::size_t k = 0; k < classes.size(); ++k) {
          const auto& name = model.class_names()[classes[k]];
          rec.shapley[name] = shap.values[i][k];
          rec.prescore[name] = prescores[k][chosen[i]];
        }
        out.push_back(std::move(rec));
      }
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  // First failure in sample order; no partial output.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<SegmentAttributionRecord> records;
  records.reserve(static_cast<std::size_t>(n) * m);
  for (auto& image_records : per_image) {
    for (auto& r : image_records) records.push_back(std::move(r));
  }
  if (stats != nullptr) {
    for (const auto& st : per_image_stats) {
      stats->coalition_images += st.coalition_images;
      stats->occlusion_images += st.occlusion_images;
      stats->gradient_calls += st.gradient_calls;
    }
  }
  return records;
}

}  // namespace attrcmp
