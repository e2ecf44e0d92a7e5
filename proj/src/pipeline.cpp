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

#include "attrcmp/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "attrcmp/io.hpp"
#include "attrcmp/kernels.hpp"
#include "attrcmp/segmenter.hpp"

namespace attrcmp {
namespace fs = std::filesystem;

namespace {

constexpr std::array<const char*, 2> kRoles = {"A", "B"};

constexpr const char* kPredictionsFile = "predictions.json";
constexpr const char* kSamplesFile = "samples.json";
constexpr std::array<const char*, 2> kAttributionFiles = {
    "attributions_A.jsonl", "attributions_B.jsonl"};
constexpr const char* kClustersFile = "clusters.json";
constexpr const char* kStateFile = "run_state.json";
constexpr const char* kSummaryFile = "summary.json";
constexpr std::array<ReportKind, 3> kReportKinds = {
    ReportKind::kClusterHistogram, ReportKind::kConceptCluster,
    ReportKind::kConfusionMatrix};

fs::path Resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

nlohmann::json ResolveSpec(const nlohmann::json& j, const fs::path& base) {
  if (j.is_string()) return io::ReadJson(Resolve(j.get<std::string>(), base));
  return j;
}

std::string Fingerprint(std::initializer_list<std::string> parts) {
  std::string joined;
  for (const auto& p : parts) {
    joined += p;
    joined.push_back('\n');
  }
  return io::Sha256Hex(joined);
}

std::string SpecId(const nlohmann::json& spec, const char* fallback) {
  return spec.is_object() ? spec.value("id", std::string(fallback))
                          : std::string(fallback);
}

ErrorKind KindOf(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return err->kind();
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return ErrorKind::kIo;
  if (dynamic_cast<const std::bad_alloc*>(&e)) return ErrorKind::kResource;
  return ErrorKind::kInput;
}

}  // namespace

FilterMode ParseFilterMode(std::string_view name) {
  if (name == "none") return FilterMode::kNone;
  if (name == "confident_disagreement") return FilterMode::kConfidentDisagreement;
  if (name == "false_positives_only") return FilterMode::kFalsePositivesOnly;
  throw InputError("unknown filter mode '" + std::string(name) + "'");
}

std::string_view FilterModeName(FilterMode mode) {
  switch (mode) {
    case FilterMode::kNone: return "none";
    case FilterMode::kConfidentDisagreement: return "confident_disagreement";
    case FilterMode::kFalsePositivesOnly: return "false_positives_only";
  }
  return "none";
}

void PipelineConfig::Validate() const {
  if (manifest.empty()) throw InputError("config: manifest is required");
  if (output_dir.empty()) throw InputError("config: output_dir is required");
  if (!model_a.is_object() || !model_b.is_object()) {
    throw InputError("config: model_a and model_b must be model specs");
  }
  if (SpecId(model_a, kRoles[0]) == SpecId(model_b, kRoles[1])) {
    throw InputError("config: model_a and model_b need distinct ids");
  }
  if (target_class.empty()) throw InputError("config: target_class is required");
  if (budget < 1) throw InputError("config: budget must be >= 1");
  if (threads < 0) throw InputError("config: threads must be >= 0");
  if (filter.mode == FilterMode::kConfidentDisagreement &&
      !(filter.threshold > 0.5 && filter.threshold <= 1.0)) {
    throw InputError("config: filter.threshold must be in (0.5, 1]");
  }
  attribution.Validate();
}

nlohmann::json ToJson(const PipelineConfig& cfg) {
  nlohmann::json j{
      {"manifest", cfg.manifest.string()},
      {"model_a", cfg.model_a},
      {"model_b", cfg.model_b},
      {"embedder", cfg.embedder},
      {"target_class", cfg.target_class},
      {"budget", cfg.budget},
      {"attribution", ToJson(cfg.attribution)},
      {"clustering", ToJson(cfg.clustering)},
      {"ordering", ClusterOrderName(cfg.ordering)},
      {"within_cluster_sort", WithinClusterOrderName(cfg.within_cluster)},
      {"filter",
       {{"mode", FilterModeName(cfg.filter.mode)},
        {"threshold", cfg.filter.threshold}}},
      {"output_dir", cfg.output_dir.string()},
      {"cache_dir", cfg.cache_dir.string()},
      {"saliency_dir", cfg.saliency_dir.string()},
      {"threads", cfg.threads},
      {"title", cfg.title}};
  j["seed"] = cfg.seed ? nlohmann::json(*cfg.seed) : nlohmann::json(nullptr);
  return j;
}

PipelineConfig PipelineConfigFromJson(const nlohmann::json& j,
                                      const fs::path& base_dir) {
  static const std::vector<std::string> kKnown = {
      "manifest",  "model_a",     "model_b",      "embedder",
      "target_class", "budget",   "attribution",  "clustering",
      "ordering",  "within_cluster_sort", "filter", "output_dir",
      "cache_dir", "saliency_dir", "threads",     "title",
      "seed"};
  if (!j.is_object()) throw InputError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw InputError("config: unknown field '" + key + "'");
    }
  }
  try {
    PipelineConfig cfg;
    cfg.manifest = Resolve(j.value("manifest", std::string()), base_dir);
    if (j.contains("model_a")) cfg.model_a = ResolveSpec(j["model_a"], base_dir);
    if (j.contains("model_b")) cfg.model_b = ResolveSpec(j["model_b"], base_dir);
    if (j.contains("embedder")) {
      cfg.embedder = ResolveSpec(j["embedder"], base_dir);
    }
    cfg.target_class = j.value("target_class", std::string());
    cfg.budget = j.value("budget", cfg.budget);
    if (j.contains("attribution")) {
      cfg.attribution = AttributionConfigFromJson(j["attribution"]);
    }
    if (j.contains("clustering")) {
      cfg.clustering = ClusterConfigFromJson(j["clustering"]);
    }
    if (j.contains("ordering")) {
      cfg.ordering = ParseClusterOrder(j["ordering"].get<std::string>());
    }
    if (j.contains("within_cluster_sort")) {
      cfg.within_cluster =
          ParseWithinClusterOrder(j["within_cluster_sort"].get<std::string>());
    }
    if (j.contains("filter")) {
      const auto& f = j["filter"];
      if (f.is_string()) {
        cfg.filter.mode = ParseFilterMode(f.get<std::string>());
      } else {
        cfg.filter.mode = ParseFilterMode(f.value("mode", std::string("none")));
        cfg.filter.threshold = f.value("threshold", cfg.filter.threshold);
      }
    }
    cfg.output_dir = Resolve(j.value("output_dir", std::string()), base_dir);
    if (j.contains("cache_dir")) {
      cfg.cache_dir = j["cache_dir"].get<std::string>();
    }
    cfg.saliency_dir =
        Resolve(j.value("saliency_dir", std::string()), base_dir);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.title = j.value("title", cfg.title);
    if (j.contains("seed") && !j["seed"].is_null()) {
      cfg.seed = j["seed"].get<std::uint64_t>();
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

nlohmann::json LoadConfigDocument(const fs::path& file) {
  try {
    return io::ReadJson(file);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + file.string() + ": " + e.what());
  }
}

void ApplyOverride(nlohmann::json& doc, std::string_view dotted_key,
                   std::string_view value) {
  if (dotted_key.empty()) throw InputError("empty override key");
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part(dotted_key.substr(start, dot - start));
    if (part.empty()) {
      throw InputError("malformed override key '" + std::string(dotted_key) +
                       "'");
    }
    if (!node->is_object()) *node = nlohmann::json::object();
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  auto parsed = nlohmann::json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? nlohmann::json(std::string(value)) : parsed;
}

StageError::StageError(ErrorKind kind, std::string stage, fs::path artifact,
                       const std::string& cause)
    : Error(kind, "stage '" + stage + "' (" + artifact.string() + "): " + cause),
      stage_(std::move(stage)),
      artifact_(std::move(artifact)) {}

std::uint64_t RunSummary::TotalModelCalls() const {
  std::uint64_t total = 0;
  for (const auto& c : calls) total += c.predict_calls + c.gradient_calls;
  return total;
}

nlohmann::json RunSummary::ToJson() const {
  nlohmann::json files_json = nlohmann::json::object();
  for (const auto& [k, v] : files) files_json[k] = v.string();
  nlohmann::json clusters = nlohmann::json::array();
  for (std::size_t i = 0; i < ordered_stats.size(); ++i) {
    const auto& s = ordered_stats[i];
    clusters.push_back({{"rank", i + 1},
                        {"cluster_id", s.cluster_id},
                        {"total", s.total},
                        {"mean_a", s.models[0].mean},
                        {"mean_b", s.models[1].mean},
                        {"count_a", s.models[0].count},
                        {"count_b", s.models[1].count}});
  }
  nlohmann::json calls_json = nlohmann::json::object();
  for (int w = 0; w < 2; ++w) {
    const auto& c = calls[w];
    calls_json[model_ids[w]] = {
        {"predict_calls", c.predict_calls},
        {"predict_images", c.predict_images},
        {"expected_predict_images", c.expected_predict_images},
        {"gradient_calls", c.gradient_calls},
        {"embed_calls", c.embed_calls},
        {"cache_hits", c.cache_hits},
        {"cache_misses", c.cache_misses}};
  }
  auto counts = [](const std::array<int, 4>& q) {
    nlohmann::json j = nlohmann::json::object();
    for (Quadrant x : kQuadrantOrder) {
      j[std::string(QuadrantName(x))] = q[static_cast<int>(x)];
    }
    return j;
  };
  return {{"output_dir", output_dir.string()},
          {"files", files_json},
          {"model_ids", model_ids},
          {"target_class", target_class},
          {"num_clusters", num_clusters},
          {"global_max_mean", global_max_mean},
          {"clusters", clusters},
          {"quadrants", {{"A", counts(quadrant_counts_a)},
                         {"B", counts(quadrant_counts_b)}}},
          {"records", {records[0], records[1]}},
          {"model_calls", calls_json},
          {"embedder_calls", embedder_calls},
          {"stages_run", stages_run},
          {"stages_reused", stages_reused}};
}

struct Pipeline::State {
  nlohmann::json run_state = nlohmann::json::object();
  std::array<std::string, 2> model_ids;
  std::array<std::string, 2> model_fp;

  std::array<std::optional<ModelHandle>, 2> models;
  std::optional<ModelHandle> embedder;
  std::optional<DatasetManifest> manifest;
  std::unique_ptr<ImageStore> store;
  std::unique_ptr<PredictionCache> cache;

  std::string fp_ingest, fp_sample, fp_attribute, fp_cluster, fp_report;

  bool have_predictions = false, have_samples = false,
       have_records = false, have_clusters = false;
  std::array<std::vector<Prediction>, 2> predictions;
  std::array<SampleSet, 2> samples;
  std::array<std::vector<SegmentAttributionRecord>, 2> records;
  std::vector<SegmentAttributionRecord> pooled;
  KMeansResult kmeans;
  Binning binning;
  std::vector<ConceptCluster> clusters;
  std::vector<ClusterStats> stats;
  std::vector<int> order;

  std::array<ModelCallTally, 2> tally;
  std::vector<std::string> stages_run, stages_reused;
  std::map<std::string, fs::path> files;
};

Pipeline::Pipeline(PipelineConfig cfg)
    : cfg_(std::move(cfg)), st_(std::make_unique<State>()) {
  cfg_.Validate();
  if (cfg_.threads > 0) kernels::SetThreads(cfg_.threads);
  if (cfg_.seed) cfg_.clustering.seed = *cfg_.seed;
  st_->model_ids = {SpecId(cfg_.model_a, kRoles[0]),
                    SpecId(cfg_.model_b, kRoles[1])};
  st_->model_fp = {io::Sha256Hex(io::CanonicalDump(cfg_.model_a)),
                   io::Sha256Hex(io::CanonicalDump(cfg_.model_b))};
  std::error_code ec;
  fs::create_directories(cfg_.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " +
                  cfg_.output_dir.string() + ": " + ec.message());
  }
  const auto state_path = ArtifactPath(kStateFile);
  if (fs::exists(state_path)) {
    try {
      st_->run_state = io::ReadJson(state_path);
    } catch (const std::exception&) {
      st_->run_state = nlohmann::json::object();  // unreadable: recompute all
    }
  }
  const fs::path cache =
      cfg_.cache_dir.empty() ? fs::path() : Resolve(cfg_.cache_dir, cfg_.output_dir);
  st_->cache = std::make_unique<PredictionCache>(cache);
}

Pipeline::~Pipeline() = default;

fs::path Pipeline::ArtifactPath(std::string_view name) const {
  return cfg_.output_dir / std::string(name);
}

namespace {

template <typename F>
void Guard(const char* stage, const fs::path& artifact, F&& body) {
  try {
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(KindOf(e), stage, artifact, e.what());
  }
}

bool AllExist(std::initializer_list<fs::path> paths) {
  return std::all_of(paths.begin(), paths.end(),
                     [](const fs::path& p) { return fs::exists(p); });
}

nlohmann::json PredictionsToJson(const std::vector<Prediction>& preds) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : preds) {
    arr.push_back({{"image_id", p.image_id},
                   {"label", p.label},
                   {"scores", p.scores.scores}});
  }
  return arr;
}

std::vector<Prediction> PredictionsFromJson(const nlohmann::json& arr) {
  std::vector<Prediction> out;
  for (const auto& p : arr) {
    out.push_back({p.at("image_id").get<std::string>(),
                   p.at("label").get<std::string>(),
                   ScoreVector{p.at("scores").get<std::vector<double>>()}});
  }
  return out;
}

nlohmann::json KMeansToJson(const KMeansResult& km) {
  return {{"assignments", km.assignments},
          {"centroids", km.centroids},
          {"inertia_history", km.inertia_history},
          {"inertia", km.inertia},
          {"iterations", km.iterations},
          {"converged", km.converged},
          {"restart", km.restart}};
}

KMeansResult KMeansFromJson(const nlohmann::json& j) {
  KMeansResult km;
  km.assignments = j.at("assignments").get<std::vector<int>>();
  km.centroids = j.at("centroids").get<kernels::Points>();
  km.inertia_history = j.at("inertia_history").get<std::vector<double>>();
  km.inertia = j.at("inertia").get<double>();
  km.iterations = j.at("iterations").get<int>();
  km.converged = j.at("converged").get<bool>();
  km.restart = j.value("restart", 0);
  return km;
}

std::string ManifestDigest(const DatasetManifest& m, const fs::path& csv) {
  std::string acc = io::Sha256Hex(io::ReadText(csv));
  for (const auto& e : m.entries) {
    acc += io::Sha256Hex(io::ReadText(m.root / e.image_path));
  }
  return io::Sha256Hex(acc);
}

}  // namespace

// ---- stages ----

void Pipeline::Ingest() {
  const auto artifact = ArtifactPath(kPredictionsFile);
  Guard("ingest", artifact, [&] {
    auto& s = *st_;
    for (int w = 0; w < 2; ++w) {
      if (!s.models[w]) {
        s.models[w] = ModelFromSpec(w == 0 ? cfg_.model_a : cfg_.model_b,
                                    kRoles[w]);
      }
    }
    if (!s.manifest) {
      const std::array<std::vector<std::string>, 2> classes = {
          s.models[0]->class_names(), s.models[1]->class_names()};
      s.manifest = LoadManifest(cfg_.manifest, classes);
      s.store = std::make_unique<ImageStore>(s.manifest->root);
      for (int w = 0; w < 2; ++w) s.models[w]->ClassIndex(cfg_.target_class);
    }
    s.fp_ingest = Fingerprint({"ingest", ManifestDigest(*s.manifest, cfg_.manifest),
                               s.model_ids[0], s.model_fp[0], s.model_ids[1],
                               s.model_fp[1]});
    if (s.have_predictions) return;
    if (s.run_state.value("ingest", "") == s.fp_ingest && AllExist({artifact})) {
      const auto doc = io::ReadJson(artifact);
      for (int w = 0; w < 2; ++w) {
        s.predictions[w] = PredictionsFromJson(doc.at("models").at(w).at("predictions"));
      }
      s.stages_reused.push_back("ingest");
    } else {
      nlohmann::json doc{{"models", nlohmann::json::array()}};
      for (int w = 0; w < 2; ++w) {
        const auto hits0 = s.cache->hits(), misses0 = s.cache->misses();
        PredictionCache* cache = cfg_.cache_dir.empty() ? nullptr : s.cache.get();
        s.predictions[w] = PredictManifest(*s.models[w], *s.manifest, *s.store, cache);
        const std::uint64_t hits = s.cache->hits() - hits0;
        const std::uint64_t misses = s.cache->misses() - misses0;
        s.tally[w].cache_hits += hits;
        s.tally[w].cache_misses += misses;
        s.tally[w].expected_predict_images +=
            cache ? misses : s.manifest->entries.size();
        doc["models"].push_back({{"id", s.model_ids[w]},
                                 {"predictions", PredictionsToJson(s.predictions[w])}});
      }
      io::WriteJson(artifact, doc);
      s.run_state["ingest"] = s.fp_ingest;
      io::WriteJson(ArtifactPath(kStateFile), s.run_state);
      s.stages_run.push_back("ingest");
    }
    s.have_predictions = true;
    s.files["predictions"] = artifact;
  });
}

void Pipeline::Sample() {
  Ingest();
  const auto artifact = ArtifactPath(kSamplesFile);
  Guard("sample", artifact, [&] {
    auto& s = *st_;
    if (!cfg_.seed) throw InputError("a seed is required for sampling");
    s.fp_sample = Fingerprint(
        {"sample", s.fp_ingest, cfg_.target_class, std::to_string(cfg_.budget),
         std::to_string(*cfg_.seed), FilterModeName(cfg_.filter.mode).data(),
         fmt::format("{}", cfg_.filter.threshold)});
    if (s.have_samples) return;
    if (s.run_state.value("sample", "") == s.fp_sample && AllExist({artifact})) {
      const auto doc = io::ReadJson(artifact);
      for (int w = 0; w < 2; ++w) s.samples[w] = SampleSetFromJson(doc.at(w));
      s.stages_reused.push_back("sample");
    } else {
      std::array<std::vector<Prediction>, 2> pools = s.predictions;
      if (cfg_.filter.mode == FilterMode::kFalsePositivesOnly) {
        for (int w = 0; w < 2; ++w) {
          std::erase_if(pools[w], [&](const Prediction& p) {
            return ClassifyQuadrant(p.scores, p.label, cfg_.target_class,
                                    s.models[w]->class_names()) != Quadrant::kFP;
          });
        }
      } else if (cfg_.filter.mode == FilterMode::kConfidentDisagreement) {
        std::array<SampleSet, 2> full;
        for (int w = 0; w < 2; ++w) {
          full[w].model_id = s.model_ids[w];
          full[w].target_class = cfg_.target_class;
          for (const auto& p : s.predictions[w]) {
            full[w].members.push_back(
                {p.image_id, p.label,
                 ClassifyQuadrant(p.scores, p.label, cfg_.target_class,
                                  s.models[w]->class_names()),
                 p.scores});
          }
        }
        const auto keep = FilterConfidentDisagreement(full[0], full[1],
                                                      cfg_.filter.threshold);
        const std::set<std::string> keep_set(keep.begin(), keep.end());
        for (auto& pool : pools) {
          std::erase_if(pool, [&](const Prediction& p) {
            return !keep_set.contains(p.image_id);
          });
        }
      }
      nlohmann::json doc = nlohmann::json::array();
      for (int w = 0; w < 2; ++w) {
        s.samples[w] = SampleBalanced(pools[w], *s.models[w], cfg_.target_class,
                                      cfg_.budget, *cfg_.seed);
        doc.push_back(ToJson(s.samples[w]));
      }
      io::WriteJson(artifact, doc);
      s.run_state["sample"] = s.fp_sample;
      io::WriteJson(ArtifactPath(kStateFile), s.run_state);
      s.stages_run.push_back("sample");
    }
    s.have_samples = true;
    s.files["samples"] = artifact;
  });
}

void Pipeline::Attribute() {
  Sample();
  const std::array<fs::path, 2> artifacts = {ArtifactPath(kAttributionFiles[0]),
                                             ArtifactPath(kAttributionFiles[1])};
  auto& s = *st_;
  s.fp_attribute = Fingerprint({"attribute", s.fp_sample,
                                io::CanonicalDump(ToJson(cfg_.attribution)),
                                cfg_.saliency_dir.string()});
  if (s.have_records) return;
  const bool reuse = s.run_state.value("attribute", "") == s.fp_attribute &&
                     AllExist({artifacts[0], artifacts[1]});
  for (int w = 0; w < 2; ++w) {
    Guard("attribute", artifacts[w], [&] {
      if (reuse) {
        s.records[w] = RecordsFromJsonLines(io::ReadText(artifacts[w]));
        return;
      }
      AttributionStats stats;
      s.records[w] = AttributeSample(*s.models[w], s.samples[w], *s.store,
                                     cfg_.target_class, cfg_.attribution,
                                     SaliencyDirectory(cfg_.saliency_dir), &stats);
      s.tally[w].expected_predict_images +=
          stats.coalition_images + stats.occlusion_images;
      io::WriteTextAtomic(artifacts[w], ToJsonLines(s.records[w]));
    });
    s.files[std::string("attributions_") + kRoles[w]] = artifacts[w];
  }
  if (reuse) {
    s.stages_reused.push_back("attribute");
  } else {
    s.run_state["attribute"] = s.fp_attribute;
    io::WriteJson(ArtifactPath(kStateFile), s.run_state);
    s.stages_run.push_back("attribute");
  }
  s.have_records = true;
}

void Pipeline::Cluster() {
  Attribute();
  const auto artifact = ArtifactPath(kClustersFile);
  Guard("cluster", artifact, [&] {
    auto& s = *st_;
    s.fp_cluster = Fingerprint(
        {"cluster", s.fp_attribute, io::CanonicalDump(cfg_.embedder),
         io::CanonicalDump(ToJson(cfg_.clustering)),
         ClusterOrderName(cfg_.ordering).data()});
    if (s.have_clusters) return;
    const bool reuse =
        s.run_state.value("cluster", "") == s.fp_cluster && AllExist({artifact});
    if (reuse) {
      const auto doc = io::ReadJson(artifact);
      s.pooled.clear();
      for (const auto& r : doc.at("pooled")) s.pooled.push_back(RecordFromJson(r));
      s.kmeans = KMeansFromJson(doc.at("kmeans"));
      s.binning.limit = doc.at("binning").at("limit").get<double>();
      s.binning.bins = doc.at("binning").at("bins").get<int>();
      s.stages_reused.push_back("cluster");
    } else {
      if (!s.embedder) s.embedder = ModelFromSpec(cfg_.embedder, "embedder");
      s.pooled = PoolAndEmbed(s.records[0], s.records[1], *s.embedder, *s.store);
      kernels::Points points;
      points.reserve(s.pooled.size());
      for (const auto& r : s.pooled) points.push_back(r.embedding);
      cfg_.clustering.Validate(points.size());
      s.kmeans = KMeans(points, cfg_.clustering);
      std::vector<double> scores;
      for (const auto& r : s.pooled) scores.push_back(r.ShapleyFor(cfg_.target_class));
      s.binning = Binning::ForScores(scores);
    }
    s.clusters = GroupClusters(s.pooled, s.kmeans);
    s.stats = ComputeStats(s.clusters, cfg_.target_class, s.binning, s.model_ids);
    s.order = OrderClusters(s.stats, cfg_.ordering);
    if (!reuse) {
      nlohmann::json pooled = nlohmann::json::array();
      for (const auto& r : s.pooled) pooled.push_back(ToJson(r));
      nlohmann::json stats = nlohmann::json::array();
      for (const auto& st : s.stats) stats.push_back(ToJson(st));
      io::WriteJson(artifact, {{"model_ids", s.model_ids},
                               {"target_class", cfg_.target_class},
                               {"config", ToJson(cfg_.clustering)},
                               {"ordering", ClusterOrderName(cfg_.ordering)},
                               {"binning", ToJson(s.binning)},
                               {"kmeans", KMeansToJson(s.kmeans)},
                               {"order", s.order},
                               {"stats", stats},
                               {"pooled", pooled}});
      s.run_state["cluster"] = s.fp_cluster;
      io::WriteJson(ArtifactPath(kStateFile), s.run_state);
      s.stages_run.push_back("cluster");
    }
    s.have_clusters = true;
    s.files["clusters"] = artifact;
  });
}

void Pipeline::Report() {
  Cluster();
  auto& s = *st_;
  s.fp_report = Fingerprint({"report", s.fp_cluster,
                             WithinClusterOrderName(cfg_.within_cluster).data(),
                             cfg_.title});
  std::vector<fs::path> paths;
  for (ReportKind k : kReportKinds) {
    const std::string base(ReportKindName(k));
    paths.push_back(ArtifactPath(base + ".html"));
    paths.push_back(ArtifactPath(base + ".json"));
  }
  const bool reuse =
      s.run_state.value("report", "") == s.fp_report &&
      std::all_of(paths.begin(), paths.end(),
                  [](const fs::path& p) { return fs::exists(p); });
  if (!reuse) {
    Guard("report", cfg_.output_dir, [&] {
      ReportInput in;
      in.title = cfg_.title;
      in.target_class = cfg_.target_class;
      in.model_ids = s.model_ids;
      in.binning = s.binning;
      for (int id : s.order) {
        const auto& cluster = s.clusters[id];
        in.clusters.push_back(
            {cluster, s.stats[id],
             SortWithinCluster(cluster, cfg_.within_cluster, cfg_.target_class,
                               s.model_ids)});
      }
      const ImageStore& store = *s.store;
      const PatchSource patches = [&store](const SegmentRef& seg) {
        return CropSegment(*store.Get(seg.image_id), seg);
      };
      const std::array<ReportDocument, 3> docs = {
          RenderHistogramView(in, patches), RenderConceptView(in, patches),
          RenderConfusionView(in, patches)};
      for (std::size_t i = 0; i < docs.size(); ++i) {
        io::WriteTextAtomic(paths[2 * i], docs[i].html);
        io::WriteJson(paths[2 * i + 1], docs[i].sidecar);
      }
    });
    s.run_state["report"] = s.fp_report;
    io::WriteJson(ArtifactPath(kStateFile), s.run_state);
    s.stages_run.push_back("report");
  } else {
    s.stages_reused.push_back("report");
  }
  for (std::size_t i = 0; i < kReportKinds.size(); ++i) {
    const std::string base(ReportKindName(kReportKinds[i]));
    s.files[base + "_html"] = paths[2 * i];
    s.files[base + "_json"] = paths[2 * i + 1];
  }
}

RunSummary Pipeline::Run() {
  Report();
  auto summary = Summary();
  summary.files["summary"] = ArtifactPath(kSummaryFile);
  io::WriteJson(ArtifactPath(kSummaryFile), summary.ToJson());
  return summary;
}

RunSummary Pipeline::Summary() const {
  const auto& s = *st_;
  RunSummary out;
  out.output_dir = cfg_.output_dir;
  out.files = s.files;
  out.model_ids = s.model_ids;
  out.target_class = cfg_.target_class;
  out.num_clusters = static_cast<int>(s.clusters.size());
  out.global_max_mean = s.stats.empty() ? 0.0 : s.stats.front().global_max_mean;
  for (int id : s.order) out.ordered_stats.push_back(s.stats[id]);
  if (s.have_samples) {
    out.quadrant_counts_a = s.samples[0].QuadrantCounts();
    out.quadrant_counts_b = s.samples[1].QuadrantCounts();
  }
  out.records = {s.records[0].size(), s.records[1].size()};
  for (int w = 0; w < 2; ++w) {
    out.calls[w] = s.tally[w];
    if (s.models[w]) {
      const auto& c = s.models[w]->counters();
      out.calls[w].predict_calls = c.predict_calls;
      out.calls[w].predict_images = c.predict_images;
      out.calls[w].gradient_calls = c.gradient_calls;
      out.calls[w].embed_calls = c.embed_calls;
      out.calls[w].embed_patches = c.embed_patches;
    }
  }
  if (s.embedder) out.embedder_calls = s.embedder->counters().embed_calls;
  out.stages_run = s.stages_run;
  out.stages_reused = s.stages_reused;
  return out;
}

const std::array<SampleSet, 2>& Pipeline::samples() const { return st_->samples; }
const std::array<std::vector<SegmentAttributionRecord>, 2>& Pipeline::records()
    const {
  return st_->records;
}
const std::vector<ConceptCluster>& Pipeline::clusters() const {
  return st_->clusters;
}
const std::vector<ClusterStats>& Pipeline::stats() const { return st_->stats; }
const std::vector<int>& Pipeline::order() const { return st_->order; }

RunSummary RunPipeline(const PipelineConfig& cfg) {
  Pipeline p(cfg);
  return p.Run();
}

// ---- untrained-model check ----

nlohmann::json UntrainedVerdict::ToJson() const {
  return {{"verdict", pass ? "pass" : "fail"},
          {"opponent_kind", opponent_kind},
          {"threshold", threshold},
          {"threshold_note", "artifact-level acceptance threshold on "
                             "max |mean_B| / global_max_mean"},
          {"max_abs_mean_b", max_abs_mean_b},
          {"global_max_mean", global_max_mean},
          {"ratio", ratio},
          {"per_cluster_ratio", per_cluster_ratio},
          {"nonzero_b_values", nonzero_b_values},
          {"run", run.ToJson()}};
}

UntrainedVerdict ValidateUntrained(const PipelineConfig& cfg) {
  const std::string kind = cfg.model_b.value("kind", std::string());
  if (kind != ModelKindName(ModelKind::kBuiltinConstant) &&
      kind != ModelKindName(ModelKind::kBuiltinRandom)) {
    throw InputError("untrained check needs model_b of kind builtin-constant "
                     "or builtin-random, got '" + kind + "'");
  }
  Pipeline p(cfg);
  UntrainedVerdict v;
  v.opponent_kind = kind;
  v.run = p.Run();
  v.global_max_mean = v.run.global_max_mean;
  for (const auto& r : p.records()[1]) {
    for (const auto& [_, value] : r.shapley) {
      if (value != 0.0) ++v.nonzero_b_values;
    }
  }
  for (const auto& s : v.run.ordered_stats) {
    const double mb = std::abs(s.models[1].mean);
    v.max_abs_mean_b = std::max(v.max_abs_mean_b, mb);
    v.per_cluster_ratio.push_back(
        v.global_max_mean > 0.0 ? mb / v.global_max_mean
                                : (mb == 0.0 ? 0.0
                                             : std::numeric_limits<double>::infinity()));
  }
  if (v.global_max_mean > 0.0) {
    v.ratio = v.max_abs_mean_b / v.global_max_mean;
  } else {
    v.ratio = v.max_abs_mean_b == 0.0 ? 0.0
                                      : std::numeric_limits<double>::infinity();
  }
  if (kind == ModelKindName(ModelKind::kBuiltinConstant)) {
    v.pass = v.nonzero_b_values == 0;
  } else {
    v.pass = v.ratio <= v.threshold;
  }
  io::WriteJson(cfg.output_dir / "untrained_verdict.json", v.ToJson());
  return v;
}

}  // namespace attrcmp
