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

#ifndef ATTRCMP_MODEL_HPP_
#define ATTRCMP_MODEL_HPP_

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attrcmp/tensor.hpp"
#include "json.hpp"

namespace attrcmp {

enum class ModelKind {
  kBuiltinLinear,
  kBuiltinMlp,
  kBuiltinConstant,
  kBuiltinRandom,
  kBuiltinHandcrafted,
  kBuiltinEmbedder,
  kRemote,
};

std::string_view ModelKindName(ModelKind kind);
ModelKind ParseModelKind(std::string_view name);

// Softmax-normalized class scores. Kept in double; see the model backends.
struct ScoreVector {
  std::vector<double> scores;

  // Lowest index wins ties.
  int Argmax() const;
  double Max() const { return scores[Argmax()]; }
  bool operator==(const ScoreVector&) const = default;
};

struct ModelInfo {
  std::string id;
  ModelKind kind = ModelKind::kBuiltinConstant;
  Shape input_shape;
  std::vector<std::string> class_names;
  bool supports_gradient = false;
  bool supports_embedding = false;
  // Content hash of the construction spec; part of every cache key.
  std::string fingerprint;
};

// What a concrete model implements. Shape checks and call accounting live in
// ModelHandle, so backends can assume well-formed input.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::vector<ScoreVector> Predict(
      std::span<const ImageTensor> images) const = 0;
  // d softmax_c / d pixel.
  virtual SaliencyMap Gradient(const ImageTensor& image,
                               int class_index) const;
  virtual std::vector<std::vector<double>> Embed(
      std::span<const ImageTensor> patches) const;
};

struct CallCounters {
  std::atomic<std::uint64_t> predict_calls{0};
  std::atomic<std::uint64_t> predict_images{0};
  std::atomic<std::uint64_t> gradient_calls{0};
  std::atomic<std::uint64_t> embed_calls{0};
  std::atomic<std::uint64_t> embed_patches{0};
};

// Uniform, thread-safe front end over a backend. Copies share the backend and
// the call counters.
class ModelHandle {
 public:
  ModelHandle(ModelInfo info, std::shared_ptr<const ModelBackend> backend);

  const ModelInfo& info() const { return info_; }
  const std::string& id() const { return info_.id; }
  ModelKind kind() const { return info_.kind; }
  const Shape& input_shape() const { return info_.input_shape; }
  const std::vector<std::string>& class_names() const {
    return info_.class_names;
  }
  int num_classes() const { return static_cast<int>(info_.class_names.size()); }
  bool supports_gradient() const { return info_.supports_gradient; }

  // Throws InputError for unknown names.
  int ClassIndex(std::string_view name) const;

  std::vector<ScoreVector> Predict(std::span<const ImageTensor> images) const;
  ScoreVector Predict(const ImageTensor& image) const;
  SaliencyMap Gradient(const ImageTensor& image, int class_index) const;
  std::vector<std::vector<double>> Embed(
      std::span<const ImageTensor> patches) const;

  // Copy sharing backend and counters, with a replaced cache fingerprint.
  ModelHandle WithFingerprint(std::string fingerprint) const;

  const CallCounters& counters() const { return *counters_; }
  void ResetCounters() const;

 private:
  void CheckInput(const ImageTensor& image) const;

  ModelInfo info_;
  std::shared_ptr<const ModelBackend> backend_;
  std::shared_ptr<CallCounters> counters_;
};

std::vector<double> Softmax(std::span<const double> logits);

// ---- builtin models ----

struct LinearWeights {
  // One weight tensor (flattened, image layout) per class.
  std::vector<std::vector<double>> class_weights;
  std::vector<double> biases;
};

ModelHandle MakeLinearModel(std::string id, Shape shape,
                            std::vector<std::string> class_names,
                            LinearWeights weights);

// tanh hidden layer followed by a linear readout and softmax.
struct MlpWeights {
  int inputs = 0;
  int hidden = 0;
  int outputs = 0;
  std::vector<double> w1;  // hidden x inputs
  std::vector<double> b1;
  std::vector<double> w2;  // outputs x hidden
  std::vector<double> b2;

  // Gaussian init: w1 ~ N(0, scale^2 / inputs), w2 ~ N(0, scale^2 / hidden).
  static MlpWeights Random(int inputs, int hidden, int outputs,
                           std::uint64_t seed, double scale = 1.0);
};

ModelHandle MakeMlpModel(std::string id, Shape shape,
                         std::vector<std::string> class_names,
                         MlpWeights weights);

// Fixed-seed randomly weighted MLP standing in for an untrained network.
// Reports no gradient.
ModelHandle MakeRandomModel(std::string id, Shape shape,
                            std::vector<std::string> class_names,
                            std::uint64_t seed = 1234, int hidden = 16);

ModelHandle MakeConstantModel(std::string id, Shape shape,
                              std::vector<std::string> class_names);

// Two-class scorer for the synthetic watermark scenario. Class 0 responds to
// red evidence in the top half, class 1 to red evidence in the bottom half;
// optionally class 1 also responds to the brightest white patch anywhere.
// Redness is R - B, so gray and white pixels contribute nothing to it.
struct HandcraftedParams {
  int window = 4;
  int stride = 2;
  double pool_sharpness = 20.0;   // smooth-max temperature
  double redness_gain = 6.0;
  double watermark_gain = 0.0;    // 0 disables the watermark term
  double watermark_threshold = 0.5;
  double softplus_sharpness = 20.0;
};

ModelHandle MakeHandcraftedModel(std::string id, Shape shape,
                                 std::vector<std::string> class_names,
                                 HandcraftedParams params);

// Splits a patch into a 3x3 grid and emits per-cell per-channel means in
// (cell row, cell col, channel) order: 9 * C values for any patch size.
ModelHandle MakeBuiltinEmbedder(std::string id = "builtin-embedder");

// Client for the JSON-over-HTTP adapter protocol. Queries /info eagerly.
ModelHandle MakeRemoteModel(std::string id, const std::string& url);

// Builds any model from its JSON spec ({"kind": ..., ...}).
ModelHandle ModelFromSpec(const nlohmann::json& spec,
                          const std::string& default_id);

}  // namespace attrcmp

#endif  // ATTRCMP_MODEL_HPP_
