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

#include "attrcmp/model.hpp"

#include <algorithm>
#include <cmath>

#include "attrcmp/error.hpp"
#include "attrcmp/io.hpp"
#include "attrcmp/rng.hpp"

namespace attrcmp {

namespace {

constexpr std::pair<ModelKind, std::string_view> kKindNames[] = {
    {ModelKind::kBuiltinLinear, "builtin-linear"},
    {ModelKind::kBuiltinMlp, "builtin-mlp"},
    {ModelKind::kBuiltinConstant, "builtin-constant"},
    {ModelKind::kBuiltinRandom, "builtin-random"},
    {ModelKind::kBuiltinHandcrafted, "builtin-handcrafted"},
    {ModelKind::kBuiltinEmbedder, "builtin-embedder"},
    {ModelKind::kRemote, "remote"},
};

bool IsEmbedderOnly(const ModelInfo& info) {
  return info.kind == ModelKind::kBuiltinEmbedder ||
         (info.kind == ModelKind::kRemote && info.class_names.empty() &&
          info.supports_embedding);
}

}  // namespace

std::string_view ModelKindName(ModelKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ModelKind ParseModelKind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw InputError("unknown model kind '" + std::string(name) + "'");
}

int ScoreVector::Argmax() const {
  if (scores.empty()) throw InputError("empty score vector");
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) -
                          scores.begin());
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

SaliencyMap ModelBackend::Gradient(const ImageTensor&, int) const {
  throw CapabilityError("model does not provide gradients");
}

std::vector<std::vector<double>> ModelBackend::Embed(
    std::span<const ImageTensor>) const {
  throw CapabilityError("model does not provide embeddings");
}

ModelHandle::ModelHandle(ModelInfo info,
                         std::shared_ptr<const ModelBackend> backend)
    : info_(std::move(info)),
      backend_(std::move(backend)),
      counters_(std::make_shared<CallCounters>()) {
  if (!IsEmbedderOnly(info_)) {
    if (info_.class_names.empty()) {
      throw InputError("model '" + info_.id + "' has no class names");
    }
    const Shape& s = info_.input_shape;
    if (s.height < 1 || s.width < 1 || s.channels < 1) {
      throw InputError("model '" + info_.id + "' has invalid input shape " +
                       s.ToString());
    }
  }
  if (info_.fingerprint.empty()) info_.fingerprint = io::Sha256Hex(info_.id);
}

int ModelHandle::ClassIndex(std::string_view name) const {
  const auto it = std::find(info_.class_names.begin(), info_.class_names.end(),
                            name);
  if (it == info_.class_names.end()) {
    throw InputError("class '" + std::string(name) + "' unknown to model '" +
                     info_.id + "'");
  }
  return static_cast<int>(it - info_.class_names.begin());
}

void ModelHandle::CheckInput(const ImageTensor& image) const {
  if (image.shape() != info_.input_shape) {
    throw InputError("model '" + info_.id + "' expects " +
                     info_.input_shape.ToString() + ", got " +
                     image.shape().ToString());
  }
}

std::vector<ScoreVector> ModelHandle::Predict(
    std::span<const ImageTensor> images) const {
  if (IsEmbedderOnly(info_)) {
    throw CapabilityError("model '" + info_.id + "' is an embedder");
  }
  if (images.empty()) return {};
  for (const auto& image : images) CheckInput(image);
  counters_->predict_calls.fetch_add(1, std::memory_order_relaxed);
  counters_->predict_images.fetch_add(images.size(),
                                      std::memory_order_relaxed);
  auto out = backend_->Predict(images);
  if (out.size() != images.size()) {
    throw GatewayError("model '" + info_.id + "' returned " +
                       std::to_string(out.size()) + " score vectors for " +
                       std::to_string(images.size()) + " images");
  }
  for (const auto& sv : out) {
    if (static_cast<int>(sv.scores.size()) != num_classes()) {
      throw GatewayError("model '" + info_.id + "' returned " +
                         std::to_string(sv.scores.size()) + " scores for " +
                         std::to_string(num_classes()) + " classes");
    }
  }
  return out;
}

ScoreVector ModelHandle::Predict(const ImageTensor& image) const {
  return Predict(std::span<const ImageTensor>(&image, 1)).front();
}

SaliencyMap ModelHandle::Gradient(const ImageTensor& image,
                                  int class_index) const {
  if (!info_.supports_gradient) {
    throw CapabilityError("model '" + info_.id + "' does not support gradients");
  }
  CheckInput(image);
  if (class_index < 0 || class_index >= num_classes()) {
    throw InputError("class index " + std::to_string(class_index) +
                     " out of range for model '" + info_.id + "'");
  }
  counters_->gradient_calls.fetch_add(1, std::memory_order_relaxed);
  return backend_->Gradient(image, class_index);
}

std::vector<std::vector<double>> ModelHandle::Embed(
    std::span<const ImageTensor> patches) const {
  if (!info_.supports_embedding) {
    throw CapabilityError("model '" + info_.id + "' does not embed patches");
  }
  if (patches.empty()) throw InputError("embed called with no patches");
  counters_->embed_calls.fetch_add(1, std::memory_order_relaxed);
  counters_->embed_patches.fetch_add(patches.size(),
                                     std::memory_order_relaxed);
  auto out = backend_->Embed(patches);
  if (out.size() != patches.size()) {
    throw GatewayError("embedder '" + info_.id + "' returned " +
                       std::to_string(out.size()) + " vectors for " +
                       std::to_string(patches.size()) + " patches");
  }
  return out;
}

ModelHandle ModelHandle::WithFingerprint(std::string fingerprint) const {
  ModelHandle copy = *this;
  copy.info_.fingerprint = std::move(fingerprint);
  return copy;
}

void ModelHandle::ResetCounters() const {
  counters_->predict_calls = 0;
  counters_->predict_images = 0;
  counters_->gradient_calls = 0;
  counters_->embed_calls = 0;
  counters_->embed_patches = 0;
}

namespace {

Shape ShapeFromJson(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw InputError("input_shape must be [H, W, C]");
  }
  return Shape{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

std::vector<std::string> ClassesFromJson(const nlohmann::json& spec) {
  if (!spec.contains("class_names")) {
    throw InputError("model spec lacks class_names");
  }
  return spec.at("class_names").get<std::vector<std::string>>();
}

}  // namespace

ModelHandle ModelFromSpec(const nlohmann::json& spec,
                          const std::string& default_id) {
  if (!spec.is_object() || !spec.contains("kind")) {
    throw InputError("model spec must be an object with a 'kind' field");
  }
  const std::string id = spec.value("id", default_id);
  const ModelKind kind = ParseModelKind(spec.at("kind").get<std::string>());
  const std::string fingerprint = io::Sha256Hex(io::CanonicalDump(spec));

  auto build = [&]() -> ModelHandle {
    switch (kind) {
      case ModelKind::kBuiltinConstant:
        return MakeConstantModel(id, ShapeFromJson(spec.at("input_shape")),
                                 ClassesFromJson(spec));
      case ModelKind::kBuiltinLinear: {
        const Shape shape = ShapeFromJson(spec.at("input_shape"));
        auto classes = ClassesFromJson(spec);
        LinearWeights weights;
        if (spec.contains("weights")) {
          weights.class_weights =
              spec.at("weights").get<std::vector<std::vector<double>>>();
          weights.biases = spec.value(
              "biases", std::vector<double>(classes.size(), 0.0));
        } else {
          Rng rng(spec.value("seed", 0ULL));
          const double scale =
              spec.value("weight_scale", 1.0) / std::sqrt(double(shape.size()));
          weights.class_weights.assign(classes.size(),
                                       std::vector<double>(shape.size()));
          for (auto& w : weights.class_weights) {
            for (double& v : w) v = scale * rng.Normal();
          }
          weights.biases.assign(classes.size(), 0.0);
        }
        return MakeLinearModel(id, shape, std::move(classes),
                               std::move(weights));
      }
      case ModelKind::kBuiltinMlp: {
        const Shape shape = ShapeFromJson(spec.at("input_shape"));
        auto classes = ClassesFromJson(spec);
        auto weights = MlpWeights::Random(
            static_cast<int>(shape.size()), spec.value("hidden", 16),
            static_cast<int>(classes.size()), spec.value("seed", 0ULL),
            spec.value("weight_scale", 1.0));
        return MakeMlpModel(id, shape, std::move(classes), std::move(weights));
      }
      case ModelKind::kBuiltinRandom:
        return MakeRandomModel(id, ShapeFromJson(spec.at("input_shape")),
                               ClassesFromJson(spec),
                               spec.value("seed", 1234ULL),
                               spec.value("hidden", 16));
      case ModelKind::kBuiltinHandcrafted: {
        HandcraftedParams p;
        p.window = spec.value("window", p.window);
        p.stride = spec.value("stride", p.stride);
        p.pool_sharpness = spec.value("pool_sharpness", p.pool_sharpness);
        p.redness_gain = spec.value("redness_gain", p.redness_gain);
        p.watermark_gain = spec.value("watermark_gain", p.watermark_gain);
        p.watermark_threshold =
            spec.value("watermark_threshold", p.watermark_threshold);
        p.softplus_sharpness =
            spec.value("softplus_sharpness", p.softplus_sharpness);
        return MakeHandcraftedModel(id, ShapeFromJson(spec.at("input_shape")),
                                    ClassesFromJson(spec), p);
      }
      case ModelKind::kBuiltinEmbedder:
        return MakeBuiltinEmbedder(id);
      case ModelKind::kRemote:
        return MakeRemoteModel(id, spec.at("url").get<std::string>());
    }
    throw InputError("unhandled model kind");
  };
  try {
    return build().WithFingerprint(fingerprint);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("invalid model spec for '" + id + "': " + e.what());
  }
}

}  // namespace attrcmp
