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

#include "attrcmp/dataset.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "attrcmp/error.hpp"
#include "attrcmp/io.hpp"
#include "attrcmp/rng.hpp"

namespace attrcmp {
namespace {

std::string Trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string SafeName(const std::string& s) {
  std::string out;
  for (char c : s) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                          c == '_' || c == '.'
                      ? c
                      : '_');
  }
  return out;
}

}  // namespace

std::string_view QuadrantName(Quadrant q) {
  switch (q) {
    case Quadrant::kTP: return "TP";
    case Quadrant::kTN: return "TN";
    case Quadrant::kFP: return "FP";
    case Quadrant::kFN: return "FN";
  }
  return "?";
}

Quadrant ParseQuadrant(std::string_view name) {
  for (Quadrant q : kQuadrantOrder) {
    if (QuadrantName(q) == name) return q;
  }
  throw InputError("unknown quadrant '" + std::string(name) + "'");
}

DatasetManifest LoadManifest(
    const std::filesystem::path& csv_path,
    std::span<const std::vector<std::string>> class_lists) {
  if (!std::filesystem::exists(csv_path)) {
    throw IngestionError("manifest " + csv_path.string() + " not found");
  }
  DatasetManifest manifest;
  manifest.root = csv_path.parent_path();
  std::istringstream in(io::ReadText(csv_path));
  std::string line;
  if (!std::getline(in, line) || Trim(line) != "image_path,label") {
    throw IngestionError("manifest " + csv_path.string() +
                         ": header must be 'image_path,label'");
  }
  std::set<std::string> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = Trim(line);
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    const std::string where =
        csv_path.string() + ":" + std::to_string(line_no);
    if (comma == std::string::npos) {
      throw IngestionError(where + ": expected 'image_path,label'");
    }
    ManifestEntry entry{Trim(line.substr(0, comma)),
                        Trim(line.substr(comma + 1))};
    if (entry.image_path.empty() || entry.label.empty()) {
      throw IngestionError(where + ": empty field");
    }
    if (!seen.insert(entry.image_path).second) {
      throw IngestionError(where + ": duplicate image_path '" +
                           entry.image_path + "'");
    }
    for (const auto& classes : class_lists) {
      if (std::find(classes.begin(), classes.end(), entry.label) ==
          classes.end()) {
        throw IngestionError(where + ": label '" + entry.label +
                             "' is not a class of every model");
      }
    }
    const auto image_path = manifest.root / entry.image_path;
    if (!std::filesystem::exists(image_path)) {
      throw IngestionError(where + ": image '" + entry.image_path +
                           "' not found");
    }
    try {
      io::ReadPngShape(image_path);
    } catch (const IoError& e) {
      throw IngestionError(where + ": image '" + entry.image_path +
                           "' unreadable: " + e.what());
    }
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

Quadrant ClassifyQuadrant(const ScoreVector& prediction,
                          const std::string& label,
                          const std::string& target_class,
                          const std::vector<std::string>& class_names) {
  auto index_of = [&](const std::string& name) {
    const auto it = std::find(class_names.begin(), class_names.end(), name);
    if (it == class_names.end()) {
      throw InputError("unknown class '" + name + "'");
    }
    return static_cast<int>(it - class_names.begin());
  };
  const int target = index_of(target_class);
  index_of(label);
  if (prediction.scores.size() != class_names.size()) {
    throw InputError("prediction covers " +
                     std::to_string(prediction.scores.size()) +
                     " classes, expected " +
                     std::to_string(class_names.size()));
  }
  const bool predicted_target = prediction.Argmax() == target;
  const bool is_target = label == target_class;
  if (predicted_target) return is_target ? Quadrant::kTP : Quadrant::kFP;
  return is_target ? Quadrant::kFN : Quadrant::kTN;
}

std::shared_ptr<const ImageTensor> ImageStore::Get(
    const std::string& image_id) const {
  {
    std::lock_guard lock(mu_);
    const auto it = cache_.find(image_id);
    if (it != cache_.end()) return it->second;
  }
  std::shared_ptr<const ImageTensor> image;
  try {
    image = std::make_shared<const ImageTensor>(io::ReadPng(root_ / image_id));
  } catch (const IoError& e) {
    throw IngestionError("image '" + image_id + "': " + e.what());
  }
  std::lock_guard lock(mu_);
  return cache_.emplace(image_id, std::move(image)).first->second;
}

void ImageStore::Put(const std::string& image_id, ImageTensor image) {
  std::lock_guard lock(mu_);
  cache_[image_id] = std::make_shared<const ImageTensor>(std::move(image));
}

std::filesystem::path PredictionCache::PathFor(const ModelHandle& model,
                                               const ImageTensor& image) const {
  return dir_ / (SafeName(model.id()) + "-" + model.info().fingerprint.substr(0, 16)) /
         (io::ImageDigest(image) + ".json");
}

std::optional<ScoreVector> PredictionCache::Get(const ModelHandle& model,
                                                const ImageTensor& image) const {
  if (dir_.empty()) return std::nullopt;
  const auto path = PathFor(model, image);
  if (!std::filesystem::exists(path)) {
    ++misses_;
    return std::nullopt;
  }
  try {
    const auto doc = io::ReadJson(path);
    ScoreVector sv{doc.at("scores").get<std::vector<double>>()};
    if (static_cast<int>(sv.scores.size()) != model.num_classes()) {
      ++misses_;
      return std::nullopt;
    }
    ++hits_;
    return sv;
  } catch (const std::exception&) {
    ++misses_;
    return std::nullopt;
  }
}

void PredictionCache::Put(const ModelHandle& model, const ImageTensor& image,
                          const ScoreVector& scores) {
  if (dir_.empty()) return;
  const auto path = PathFor(model, image);
  std::lock_guard lock(write_mu_);
  io::WriteJson(path, nlohmann::json{{"scores", scores.scores}});
}

std::vector<Prediction> PredictManifest(const ModelHandle& model,
                                        const DatasetManifest& manifest,
                                        const ImageStore& store,
                                        PredictionCache* cache) {
  const long n = static_cast<long>(manifest.entries.size());
  std::vector<Prediction> out(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const auto& entry = manifest.entries[i];
    try {
      const auto image = store.Get(entry.image_path);
      std::optional<ScoreVector> scores;
      if (cache != nullptr) scores = cache->Get(model, *image);
      if (!scores) {
        scores = model.Predict(*image);
        if (cache != nullptr) cache->Put(model, *image, *scores);
      }
      out[i] = {entry.image_path, entry.label, std::move(*scores)};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (long i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      throw IngestionError("predicting '" + manifest.entries[i].image_path +
                           "' with model '" + model.id() + "': " + errors[i]);
    }
  }
  return out;
}

std::array<int, 4> SampleSet::QuadrantCounts() const {
  std::array<int, 4> counts{};
  for (const auto& m : members) ++counts[static_cast<int>(m.quadrant)];
  return counts;
}

std::array<int, 4> BalancedQuota(const std::array<int, 4>& available,
                                 int budget) {
  int total_available = 0;
  for (int a : available) total_available += a;
  const int total = std::min(budget, total_available);
  std::array<int, 4> take{};
  int used = 0;
  for (int q = 0; q < 4; ++q) {
    take[q] = std::min(budget / 4, available[q]);
    used += take[q];
  }
  int remaining = total - used;
  while (remaining > 0) {
    for (int q = 0; q < 4 && remaining > 0; ++q) {
      if (take[q] < available[q]) {
        ++take[q];
        --remaining;
      }
    }
  }
  return take;
}

SampleSet SampleBalanced(std::span<const Prediction> candidates,
                         const ModelHandle& model,
                         const std::string& target_class, int budget,
                         std::uint64_t seed) {
  if (candidates.empty()) throw InputError("cannot sample an empty manifest");
  if (budget < 4) throw InputError("sample budget must be >= 4");
  model.ClassIndex(target_class);
  std::array<std::vector<const Prediction*>, 4> groups;
  for (const auto& c : candidates) {
    const Quadrant q =
        ClassifyQuadrant(c.scores, c.label, target_class, model.class_names());
    groups[static_cast<int>(q)].push_back(&c);
  }
  std::array<int, 4> available{};
  for (int q = 0; q < 4; ++q) available[q] = static_cast<int>(groups[q].size());
  const auto take = BalancedQuota(available, budget);

  Rng rng(seed);
  SampleSet set{model.id(), target_class, seed, {}};
  for (int q = 0; q < 4; ++q) {
    rng.Shuffle(groups[q]);
    for (int i = 0; i < take[q]; ++i) {
      const Prediction* p = groups[q][i];
      set.members.push_back(
          {p->image_id, p->label, static_cast<Quadrant>(q), p->scores});
    }
  }
  return set;
}

std::vector<std::string> FilterConfidentDisagreement(const SampleSet& set_a,
                                                     const SampleSet& set_b,
                                                     double threshold) {
  if (!(threshold > 0.5 && threshold <= 1.0)) {
    throw InputError("confidence threshold must lie in (0.5, 1]");
  }
  std::map<std::string, const SampleMember*> b_by_id;
  for (const auto& m : set_b.members) b_by_id[m.image_id] = &m;
  std::vector<std::string> out;
  for (const auto& a : set_a.members) {
    const auto it = b_by_id.find(a.image_id);
    if (it == b_by_id.end()) continue;
    const auto& b = *it->second;
    if (a.scores.Argmax() != b.scores.Argmax() &&
        a.scores.Max() >= threshold && b.scores.Max() >= threshold) {
      out.push_back(a.image_id);
    }
  }
  return out;
}

nlohmann::json ToJson(const SampleSet& set) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : set.members) {
    members.push_back({{"image_id", m.image_id},
                       {"label", m.label},
                       {"quadrant", QuadrantName(m.quadrant)},
                       {"scores", m.scores.scores}});
  }
  const auto counts = set.QuadrantCounts();
  return {{"model_id", set.model_id},
          {"target_class", set.target_class},
          {"seed", set.seed},
          {"quadrant_counts",
           {{"TP", counts[0]}, {"TN", counts[1]}, {"FP", counts[2]},
            {"FN", counts[3]}}},
          {"members", members}};
}

SampleSet SampleSetFromJson(const nlohmann::json& j) {
  SampleSet set;
  set.model_id = j.at("model_id").get<std::string>();
  set.target_class = j.at("target_class").get<std::string>();
  set.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& m : j.at("members")) {
    set.members.push_back(
        {m.at("image_id").get<std::string>(), m.at("label").get<std::string>(),
         ParseQuadrant(m.at("quadrant").get<std::string>()),
         ScoreVector{m.at("scores").get<std::vector<double>>()}});
  }
  return set;
}

}  // namespace attrcmp
