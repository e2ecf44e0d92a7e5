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

// Analytic in-process models used for tests, validation runs and the
// synthetic watermark scenario.

#include <algorithm>
#include <cmath>

#include "attrcmp/error.hpp"
#include "attrcmp/model.hpp"
#include "attrcmp/rng.hpp"

namespace attrcmp {
namespace {

class ConstantBackend final : public ModelBackend {
 public:
  explicit ConstantBackend(int classes) : classes_(classes) {}
  std::vector<ScoreVector> Predict(
      std::span<const ImageTensor> images) const override {
    return std::vector<ScoreVector>(
        images.size(), ScoreVector{std::vector<double>(classes_, 1.0 / classes_)});
  }

 private:
  int classes_;
};

class LinearBackend final : public ModelBackend {
 public:
  LinearBackend(Shape shape, LinearWeights weights)
      : shape_(shape), weights_(std::move(weights)) {}

  std::vector<double> Probabilities(const ImageTensor& image) const {
    const auto& x = image.data();
    std::vector<double> logits(weights_.class_weights.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
      const auto& w = weights_.class_weights[c];
      double z = weights_.biases[c];
      for (std::size_t i = 0; i < x.size(); ++i) z += w[i] * x[i];
      logits[c] = z;
    }
    return Softmax(logits);
  }

  std::vector<ScoreVector> Predict(
      std::span<const ImageTensor> images) const override {
    std::vector<ScoreVector> out;
    out.reserve(images.size());
    for (const auto& image : images) out.push_back({Probabilities(image)});
    return out;
  }

  // p_c * (w_c - sum_j p_j w_j)
  SaliencyMap Gradient(const ImageTensor& image,
                       int class_index) const override {
    const auto p = Probabilities(image);
    SaliencyMap grad(shape_, 0.0);
    auto& g = grad.data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double coef = (static_cast<int>(j) == class_index ? 1.0 : 0.0) -
                          p[j];
      const auto& w = weights_.class_weights[j];
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += coef * w[i];
    }
    for (double& v : g) v *= p[class_index];
    return grad;
  }

 private:
  Shape shape_;
  LinearWeights weights_;
};

class MlpBackend final : public ModelBackend {
 public:
  MlpBackend(Shape shape, MlpWeights weights)
      : shape_(shape), w_(std::move(weights)) {}

  void Forward(const ImageTensor& image, std::vector<double>* hidden,
               std::vector<double>* probs) const {
    const auto& x = image.data();
    hidden->assign(w_.hidden, 0.0);
    for (int h = 0; h < w_.hidden; ++h) {
      const double* row = w_.w1.data() + static_cast<std::size_t>(h) * w_.inputs;
      double a = w_.b1[h];
      for (int i = 0; i < w_.inputs; ++i) a += row[i] * x[i];
      (*hidden)[h] = std::tanh(a);
    }
    std::vector<double> logits(w_.outputs);
    for (int c = 0; c < w_.outputs; ++c) {
      double z = w_.b2[c];
      for (int h = 0; h < w_.hidden; ++h) {
        z += w_.w2[static_cast<std::size_t>(c) * w_.hidden + h] * (*hidden)[h];
      }
      logits[c] = z;
    }
    *probs = Softmax(logits);
  }

  std::vector<ScoreVector> Predict(
      std::span<const ImageTensor> images) const override {
    std::vector<ScoreVector> out;
    out.reserve(images.size());
    std::vector<double> hidden, probs;
    for (const auto& image : images) {
      Forward(image, &hidden, &probs);
      out.push_back({probs});
    }
    return out;
  }

  SaliencyMap Gradient(const ImageTensor& image,
                       int class_index) const override {
    std::vector<double> hidden, p;
    Forward(image, &hidden, &p);
    // d p_c / d logits
    std::vector<double> dz(w_.outputs);
    for (int j = 0; j < w_.outputs; ++j) {
      dz[j] = p[class_index] * ((j == class_index ? 1.0 : 0.0) - p[j]);
    }
    std::vector<double> da(w_.hidden, 0.0);
    for (int h = 0; h < w_.hidden; ++h) {
      double s = 0.0;
      for (int j = 0; j < w_.outputs; ++j) {
        s += w_.w2[static_cast<std::size_t>(j) * w_.hidden + h] * dz[j];
      }
      da[h] = s * (1.0 - hidden[h] * hidden[h]);
    }
    SaliencyMap grad(shape_, 0.0);
    auto& g = grad.data();
    for (int h = 0; h < w_.hidden; ++h) {
      const double* row = w_.w1.data() + static_cast<std::size_t>(h) * w_.inputs;
      for (int i = 0; i < w_.inputs; ++i) g[i] += da[h] * row[i];
    }
    return grad;
  }

 private:
  Shape shape_;
  MlpWeights w_;
};

struct SmoothMax {
  double value = 0.0;
  std::vector<double> weights;  // d value / d input_i
};

// log-mean-exp pooling: equals the common value for constant input and tends
// to the maximum as sharpness grows.
SmoothMax PoolSmoothMax(const std::vector<double>& v, double sharpness) {
  SmoothMax out;
  const double peak = *std::max_element(v.begin(), v.end());
  out.weights.resize(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.weights[i] = std::exp(sharpness * (v[i] - peak));
    total += out.weights[i];
  }
  for (double& w : out.weights) w /= total;
  out.value = peak + std::log(total / static_cast<double>(v.size())) / sharpness;
  return out;
}

double Softplus(double u, double k) {
  const double t = k * u;
  return (t > 30.0 ? t : std::log1p(std::exp(t))) / k;
}

double Sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

class HandcraftedBackend final : public ModelBackend {
 public:
  HandcraftedBackend(Shape shape, HandcraftedParams params)
      : shape_(shape), p_(params) {
    for (int r = 0; r + p_.window <= shape.height; r += p_.stride) {
      for (int c = 0; c + p_.window <= shape.width; c += p_.stride) {
        const int id = static_cast<int>(windows_.size());
        windows_.push_back({r, c});
        if (r + p_.window <= shape.height / 2) top_.push_back(id);
        if (r >= shape.height / 2) bottom_.push_back(id);
      }
    }
    if (top_.empty() || bottom_.empty()) {
      throw InputError("image too small for handcrafted scorer windows");
    }
  }

  struct Features {
    SmoothMax top, bottom, white;
    double watermark_arg = 0.0;
    std::vector<double> probs;
  };

  Features Evaluate(const ImageTensor& image) const {
    const double area = static_cast<double>(p_.window) * p_.window;
    std::vector<double> red(windows_.size()), blue(windows_.size());
    for (std::size_t w = 0; w < windows_.size(); ++w) {
      double sr = 0.0, sb = 0.0;
      for (int dr = 0; dr < p_.window; ++dr) {
        for (int dc = 0; dc < p_.window; ++dc) {
          const int r = windows_[w].first + dr, c = windows_[w].second + dc;
          sr += double(image.at(r, c, 0)) - double(image.at(r, c, 2));
          sb += image.at(r, c, 2);
        }
      }
      red[w] = sr / area;
      blue[w] = sb / area;
    }
    auto subset = [&](const std::vector<int>& ids) {
      std::vector<double> v;
      v.reserve(ids.size());
      for (int id : ids) v.push_back(red[id]);
      return v;
    };
    Features f;
    f.top = PoolSmoothMax(subset(top_), p_.pool_sharpness);
    f.bottom = PoolSmoothMax(subset(bottom_), p_.pool_sharpness);
    std::vector<double> logits = {p_.redness_gain * f.top.value,
                                  p_.redness_gain * f.bottom.value};
    if (p_.watermark_gain != 0.0) {
      f.white = PoolSmoothMax(blue, p_.pool_sharpness);
      f.watermark_arg = f.white.value - p_.watermark_threshold;
      logits[1] += p_.watermark_gain *
                   Softplus(f.watermark_arg, p_.softplus_sharpness);
    }
    f.probs = Softmax(logits);
    return f;
  }

  std::vector<ScoreVector> Predict(
      std::span<const ImageTensor> images) const override {
    std::vector<ScoreVector> out;
    out.reserve(images.size());
    for (const auto& image : images) out.push_back({Evaluate(image).probs});
    return out;
  }

  SaliencyMap Gradient(const ImageTensor& image,
                       int class_index) const override {
    const Features f = Evaluate(image);
    const double area = static_cast<double>(p_.window) * p_.window;
    // dz1 - dz0 accumulated per pixel; dp1/dx = p0 p1 (dz1 - dz0).
    SaliencyMap diff(shape_, 0.0);
    auto spread = [&](int window, double coef, bool redness) {
      const auto [r0, c0] = windows_[window];
      for (int dr = 0; dr < p_.window; ++dr) {
        for (int dc = 0; dc < p_.window; ++dc) {
          if (redness) {
            diff.at(r0 + dr, c0 + dc, 0) += coef;
            diff.at(r0 + dr, c0 + dc, 2) -= coef;
          } else {
            diff.at(r0 + dr, c0 + dc, 2) += coef;
          }
        }
      }
    };
    for (std::size_t i = 0; i < top_.size(); ++i) {
      spread(top_[i], -p_.redness_gain * f.top.weights[i] / area, true);
    }
    for (std::size_t i = 0; i < bottom_.size(); ++i) {
      spread(bottom_[i], p_.redness_gain * f.bottom.weights[i] / area, true);
    }
    if (p_.watermark_gain != 0.0) {
      const double outer = p_.watermark_gain *
                           Sigmoid(p_.softplus_sharpness * f.watermark_arg);
      for (std::size_t i = 0; i < windows_.size(); ++i) {
        spread(static_cast<int>(i), outer * f.white.weights[i] / area, false);
      }
    }
    const double scale =
        f.probs[0] * f.probs[1] * (class_index == 1 ? 1.0 : -1.0);
    for (double& v : diff.data()) v *= scale;
    return diff;
  }

 private:
  Shape shape_;
  HandcraftedParams p_;
  std::vector<std::pair<int, int>> windows_;
  std::vector<int> top_, bottom_;
};

// Cell boundaries floor(i * n / 3).
int CellEdge(int i, int n) { return i * n / 3; }

class EmbedderBackend final : public ModelBackend {
 public:
  std::vector<std::vector<double>> Embed(
      std::span<const ImageTensor> patches) const override {
    std::vector<std::vector<double>> out;
    out.reserve(patches.size());
    const int channels = patches.front().channels();
    for (const auto& patch : patches) {
      if (patch.channels() != channels) {
        throw InputError("builtin embedder needs a uniform channel count");
      }
      std::vector<double> v;
      v.reserve(9 * channels);
      for (int gr = 0; gr < 3; ++gr) {
        int r0 = CellEdge(gr, patch.height()), r1 = CellEdge(gr + 1, patch.height());
        if (r1 <= r0) {
          r0 = std::min(patch.height() - 1, (2 * gr + 1) * patch.height() / 6);
          r1 = r0 + 1;
        }
        for (int gc = 0; gc < 3; ++gc) {
          int c0 = CellEdge(gc, patch.width()), c1 = CellEdge(gc + 1, patch.width());
          if (c1 <= c0) {
            c0 = std::min(patch.width() - 1, (2 * gc + 1) * patch.width() / 6);
            c1 = c0 + 1;
          }
          const double count = static_cast<double>(r1 - r0) * (c1 - c0);
          for (int ch = 0; ch < channels; ++ch) {
            double s = 0.0;
            for (int r = r0; r < r1; ++r) {
              for (int c = c0; c < c1; ++c) s += patch.at(r, c, ch);
            }
            v.push_back(s / count);
          }
        }
      }
      out.push_back(std::move(v));
    }
    return out;
  }

  std::vector<ScoreVector> Predict(std::span<const ImageTensor>) const override {
    throw CapabilityError("builtin embedder does not classify");
  }
};

void CheckClassCount(const std::vector<std::string>& names, std::size_t n,
                     const char* what) {
  if (names.size() != n) {
    throw InputError(std::string(what) + ": " + std::to_string(n) +
                     " weight rows for " + std::to_string(names.size()) +
                     " classes");
  }
}

}  // namespace

MlpWeights MlpWeights::Random(int inputs, int hidden, int outputs,
                              std::uint64_t seed, double scale) {
  if (inputs < 1 || hidden < 1 || outputs < 1) {
    throw InputError("MLP dimensions must be >= 1");
  }
  MlpWeights w;
  w.inputs = inputs;
  w.hidden = hidden;
  w.outputs = outputs;
  Rng rng(seed);
  const double s1 = scale / std::sqrt(static_cast<double>(inputs));
  const double s2 = scale / std::sqrt(static_cast<double>(hidden));
  w.w1.resize(static_cast<std::size_t>(hidden) * inputs);
  for (double& v : w.w1) v = s1 * rng.Normal();
  w.b1.resize(hidden);
  for (double& v : w.b1) v = 0.1 * scale * rng.Normal();
  w.w2.resize(static_cast<std::size_t>(outputs) * hidden);
  for (double& v : w.w2) v = s2 * rng.Normal();
  w.b2.assign(outputs, 0.0);
  return w;
}

ModelHandle MakeConstantModel(std::string id, Shape shape,
                              std::vector<std::string> class_names) {
  const int classes = static_cast<int>(class_names.size());
  ModelInfo info{std::move(id), ModelKind::kBuiltinConstant, shape,
                 std::move(class_names), false, false, ""};
  return ModelHandle(std::move(info),
                     std::make_shared<ConstantBackend>(std::max(classes, 1)));
}

ModelHandle MakeLinearModel(std::string id, Shape shape,
                            std::vector<std::string> class_names,
                            LinearWeights weights) {
  CheckClassCount(class_names, weights.class_weights.size(), "builtin-linear");
  if (weights.biases.size() != class_names.size()) {
    throw InputError("builtin-linear: bias count does not match classes");
  }
  for (const auto& w : weights.class_weights) {
    if (w.size() != shape.size()) {
      throw InputError("builtin-linear: weight tensor size " +
                       std::to_string(w.size()) + " does not match shape " +
                       shape.ToString());
    }
  }
  ModelInfo info{std::move(id), ModelKind::kBuiltinLinear, shape,
                 std::move(class_names), true, false, ""};
  return ModelHandle(std::move(info),
                     std::make_shared<LinearBackend>(shape, std::move(weights)));
}

ModelHandle MakeMlpModel(std::string id, Shape shape,
                         std::vector<std::string> class_names,
                         MlpWeights weights) {
  CheckClassCount(class_names, static_cast<std::size_t>(weights.outputs),
                  "builtin-mlp");
  if (static_cast<std::size_t>(weights.inputs) != shape.size()) {
    throw InputError("builtin-mlp: input width does not match shape " +
                     shape.ToString());
  }
  ModelInfo info{std::move(id), ModelKind::kBuiltinMlp, shape,
                 std::move(class_names), true, false, ""};
  return ModelHandle(std::move(info),
                     std::make_shared<MlpBackend>(shape, std::move(weights)));
}

ModelHandle MakeRandomModel(std::string id, Shape shape,
                            std::vector<std::string> class_names,
                            std::uint64_t seed, int hidden) {
  auto weights =
      MlpWeights::Random(static_cast<int>(shape.size()), hidden,
                         static_cast<int>(class_names.size()), seed);
  ModelInfo info{std::move(id), ModelKind::kBuiltinRandom, shape,
                 std::move(class_names), false, false, ""};
  return ModelHandle(std::move(info),
                     std::make_shared<MlpBackend>(shape, std::move(weights)));
}

ModelHandle MakeHandcraftedModel(std::string id, Shape shape,
                                 std::vector<std::string> class_names,
                                 HandcraftedParams params) {
  if (class_names.size() != 2) {
    throw InputError("builtin-handcrafted scores exactly two classes");
  }
  if (shape.channels != 3) {
    throw InputError("builtin-handcrafted needs RGB input");
  }
  ModelInfo info{std::move(id), ModelKind::kBuiltinHandcrafted, shape,
                 std::move(class_names), true, false, ""};
  return ModelHandle(std::move(info),
                     std::make_shared<HandcraftedBackend>(shape, params));
}

ModelHandle MakeBuiltinEmbedder(std::string id) {
  ModelInfo info{std::move(id), ModelKind::kBuiltinEmbedder, Shape{1, 1, 1},
                 {}, false, true, ""};
  return ModelHandle(std::move(info), std::make_shared<EmbedderBackend>());
}

}  // namespace attrcmp
