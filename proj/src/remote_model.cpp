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

// Client side of the adapter wire protocol: JSON bodies over HTTP POST.

#include <memory>
#include <string>

#include "attrcmp/error.hpp"
#include "attrcmp/model.hpp"
#include "httplib.h"

namespace attrcmp {
namespace {

nlohmann::json ShapeJson(const Shape& s) {
  return nlohmann::json::array({s.height, s.width, s.channels});
}

class RemoteBackend final : public ModelBackend {
 public:
  explicit RemoteBackend(std::string url) : url_(std::move(url)) {}

  // httplib clients are not shareable across threads; open one per call.
  nlohmann::json Post(const std::string& route, const nlohmann::json& body,
                      int* status_out = nullptr) const {
    httplib::Client client(url_);
    client.set_connection_timeout(10);
    client.set_read_timeout(300);
    auto res = client.Post(route, body.dump(), "application/json");
    if (!res) {
      throw GatewayError("POST " + url_ + route + " failed: " +
                         httplib::to_string(res.error()));
    }
    if (status_out != nullptr) *status_out = res->status;
    if (res->status != 200) {
      if (status_out != nullptr && res->status == 501) return nullptr;
      throw GatewayError("POST " + url_ + route + " returned " +
                         std::to_string(res->status) + ": " + res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw GatewayError("POST " + url_ + route +
                         " returned malformed JSON: " + res->body);
    }
  }

  std::vector<ScoreVector> Predict(
      std::span<const ImageTensor> images) const override {
    nlohmann::json body;
    body["shape"] = ShapeJson(images.front().shape());
    body["images"] = nlohmann::json::array();
    for (const auto& image : images) body["images"].push_back(image.data());
    const auto reply = Post("/predict", body);
    std::vector<ScoreVector> out;
    try {
      for (const auto& row : reply.at("scores")) {
        out.push_back({row.get<std::vector<double>>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw GatewayError("malformed /predict response: " + reply.dump());
    }
    return out;
  }

  SaliencyMap Gradient(const ImageTensor& image,
                       int class_index) const override {
    nlohmann::json body;
    body["image"] = image.data();
    body["shape"] = ShapeJson(image.shape());
    body["class_index"] = class_index;
    int status = 0;
    const auto reply = Post("/gradient", body, &status);
    if (status == 501) {
      throw CapabilityError("remote model at " + url_ +
                            " has no gradient endpoint");
    }
    try {
      return SaliencyMap(image.shape(),
                         reply.at("gradient").get<std::vector<double>>());
    } catch (const nlohmann::json::exception&) {
      throw GatewayError("malformed /gradient response: " + reply.dump());
    } catch (const InputError& e) {
      throw GatewayError(std::string("/gradient: ") + e.what());
    }
  }

  std::vector<std::vector<double>> Embed(
      std::span<const ImageTensor> patches) const override {
    nlohmann::json body;
    body["patches"] = nlohmann::json::array();
    for (const auto& p : patches) {
      body["patches"].push_back({{"data", p.data()}, {"shape", ShapeJson(p.shape())}});
    }
    const auto reply = Post("/embed", body);
    std::vector<std::vector<double>> out;
    try {
      out = reply.at("embeddings").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception&) {
      throw GatewayError("malformed /embed response: " + reply.dump());
    }
    for (const auto& v : out) {
      if (v.size() != out.front().size()) {
        throw GatewayError("remote embedder returned mixed dimensions " +
                           std::to_string(out.front().size()) + " and " +
                           std::to_string(v.size()));
      }
    }
    return out;
  }

 private:
  std::string url_;
};

}  // namespace

ModelHandle MakeRemoteModel(std::string id, const std::string& url) {
  auto backend = std::make_shared<RemoteBackend>(url);
  const auto reply = backend->Post("/info", nlohmann::json::object());
  ModelInfo info;
  info.id = std::move(id);
  info.kind = ModelKind::kRemote;
  try {
    const auto& s = reply.at("input_shape");
    info.input_shape = Shape{s.at(0).get<int>(), s.at(1).get<int>(),
                             s.at(2).get<int>()};
    info.class_names = reply.at("class_names").get<std::vector<std::string>>();
    info.supports_gradient = reply.value("supports_gradient", false);
    info.supports_embedding = reply.value("supports_embedding", true);
  } catch (const nlohmann::json::exception&) {
    throw GatewayError("malformed /info response from " + url + ": " +
                       reply.dump());
  }
  return ModelHandle(std::move(info), std::move(backend));
}

}  // namespace attrcmp
