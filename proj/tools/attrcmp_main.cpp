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

// attrcmp: compare how two image classifiers use visual concepts.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "attrcmp/io.hpp"
#include "attrcmp/pipeline.hpp"
#include "attrcmp/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using attrcmp::PipelineConfig;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;

struct ConfigArgs {
  std::string config_file;
  std::optional<std::uint64_t> seed;
};

// Trailing `--dotted.key value` / `--dotted.key=value` pairs.
void ApplyExtras(nlohmann::json& doc, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& arg = extras[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) {
      throw attrcmp::InputError("unexpected argument '" + arg + "'");
    }
    const std::string body = arg.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      attrcmp::ApplyOverride(doc, body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (i + 1 >= extras.size()) {
      throw attrcmp::InputError("override '" + arg + "' needs a value");
    }
    attrcmp::ApplyOverride(doc, body, extras[++i]);
  }
}

PipelineConfig BuildConfig(const ConfigArgs& args,
                           const std::vector<std::string>& extras) {
  nlohmann::json doc = nlohmann::json::object();
  fs::path base = fs::current_path();
  if (!args.config_file.empty()) {
    doc = attrcmp::LoadConfigDocument(args.config_file);
    base = fs::absolute(args.config_file).parent_path();
  }
  // Command-line paths are relative to the working directory, so resolve the
  // file's own relative paths before overrides land.
  for (const char* key : {"manifest", "output_dir", "saliency_dir"}) {
    if (doc.contains(key) && doc[key].is_string() &&
        !doc[key].get<std::string>().empty()) {
      const fs::path p = doc[key].get<std::string>();
      if (p.is_relative()) doc[key] = (base / p).lexically_normal().string();
    }
  }
  for (const char* key : {"model_a", "model_b", "embedder"}) {
    if (doc.contains(key) && doc[key].is_string()) {
      const fs::path p = doc[key].get<std::string>();
      doc[key] = attrcmp::io::ReadJson(p.is_relative() ? base / p : p);
    }
  }
  ApplyExtras(doc, extras);
  if (args.seed) doc["seed"] = *args.seed;
  return attrcmp::PipelineConfigFromJson(doc, fs::current_path());
}

void Print(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

void AddConfigOptions(CLI::App* cmd, ConfigArgs* args, bool seed_required) {
  cmd->add_option("-c,--config", args->config_file, "pipeline config JSON")
      ->check(CLI::ExistingFile);
  auto* seed = cmd->add_option("--seed", args->seed,
                               "seed for every stochastic stage");
  if (seed_required) seed->required();
  cmd->allow_extras();
  cmd->footer("Any config field can be overridden with --field value, using "
              "dots for nested fields (e.g. --attribution.ig_steps 64).");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compare the visual concepts two image classifiers rely on."};
  app.require_subcommand(1);

  ConfigArgs args;
  std::vector<std::pair<std::string, CLI::App*>> stages;
  for (const char* name : {"ingest", "sample", "attribute", "cluster", "report"}) {
    auto* cmd = app.add_subcommand(name, std::string("run up to the ") + name +
                                             " stage");
    stages.emplace_back(name, cmd);
  }
  auto* run = app.add_subcommand("run", "run every stage");
  for (auto& [_, cmd] : stages) AddConfigOptions(cmd, &args, false);
  AddConfigOptions(run, &args, true);

  auto* scenario = app.add_subcommand("scenario", "generate synthetic datasets");
  scenario->require_subcommand(1);
  auto* watermark = scenario->add_subcommand(
      "watermark", "two-class blob images with a planted watermark");
  attrcmp::WatermarkScenarioParams wm;
  std::string wm_out;
  watermark->add_option("--seed", wm.seed, "generator seed")->required();
  watermark->add_option("-n,--n-images", wm.n_images, "images, >= 40")
      ->capture_default_str();
  watermark->add_option("--rate", wm.watermark_rate,
                        "fraction of class-1 images stamped")
      ->capture_default_str();
  watermark->add_option("--redness-gain", wm.redness_gain, "both models")
      ->capture_default_str();
  watermark->add_option("--watermark-gain", wm.watermark_gain,
                        "model B stamp sensitivity")
      ->capture_default_str();
  watermark->add_option("-o,--out", wm_out, "output directory")->required();

  auto* validate = app.add_subcommand("validate", "built-in validation checks");
  validate->require_subcommand(1);
  auto* untrained = validate->add_subcommand(
      "untrained", "model B replaced by an untrained stand-in");
  std::string opponent = "random";
  untrained->add_option("--opponent", opponent)
      ->check(CLI::IsMember({"random", "constant"}))
      ->capture_default_str();
  AddConfigOptions(untrained, &args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (watermark->parsed()) {
      const auto sc = attrcmp::GenerateWatermarkScenario(wm, wm_out);
      Print({{"dir", sc.dir.string()},
             {"manifest", sc.manifest.string()},
             {"model_a", sc.model_a_spec.string()},
             {"model_b", sc.model_b_spec.string()},
             {"config", sc.config.string()},
             {"class_counts", {sc.class_counts[0], sc.class_counts[1]}},
             {"watermarked_count", sc.stamps.size()}});
      return kExitOk;
    }
    if (untrained->parsed()) {
      PipelineConfig cfg = BuildConfig(args, untrained->remaining());
      if (!cfg.seed) cfg.seed = 0;
      nlohmann::json b{{"id", "B"},
                       {"kind", opponent == "random" ? "builtin-random"
                                                     : "builtin-constant"}};
      b["input_shape"] = cfg.model_a.at("input_shape");
      b["class_names"] = cfg.model_a.at("class_names");
      cfg.model_b = b;
      const auto verdict = attrcmp::ValidateUntrained(cfg);
      Print(verdict.ToJson());
      return verdict.pass ? kExitOk : kExitValidation;
    }
    if (run->parsed()) {
      const auto summary = attrcmp::RunPipeline(BuildConfig(args, run->remaining()));
      Print(summary.ToJson());
      return kExitOk;
    }
    for (std::size_t i = 0; i < stages.size(); ++i) {
      auto* cmd = stages[i].second;
      if (!cmd->parsed()) continue;
      attrcmp::Pipeline p(BuildConfig(args, cmd->remaining()));
      switch (i) {
        case 0: p.Ingest(); break;
        case 1: p.Sample(); break;
        case 2: p.Attribute(); break;
        case 3: p.Cluster(); break;
        default: p.Report(); break;
      }
      Print(p.Summary().ToJson());
      return kExitOk;
    }
  } catch (const attrcmp::Error& e) {
    std::cerr << "error [" << attrcmp::ErrorKindName(e.kind()) << "]: "
              << e.what() << '\n';
    return e.kind() == attrcmp::ErrorKind::kInput ? kExitValidation
                                                  : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}
