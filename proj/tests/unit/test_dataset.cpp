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

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "attrcmp/dataset.hpp"
#include "attrcmp/io.hpp"
#include "test_util.hpp"

namespace attrcmp {
namespace {

using testing::RandomImage;
using testing::TempDir;

const std::vector<std::string> kFlowers = {"sunflower", "daisy", "tulip"};

ScoreVector Scores(std::vector<double> s) { return ScoreVector{std::move(s)}; }

void WriteFile(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

// 4 PNGs and a manifest naming them.
std::filesystem::path SmallDataset(const TempDir& dir) {
  std::filesystem::create_directories(dir / "img");
  for (int i = 0; i < 4; ++i) {
    io::WritePng(dir / ("img/" + std::to_string(i) + ".png"),
                 RandomImage(Shape{6, 6, 3}, i));
  }
  WriteFile(dir / "m.csv",
            "image_path,label\nimg/0.png,daisy\nimg/1.png,tulip\n"
            "img/2.png,sunflower\nimg/3.png,daisy\n");
  return dir / "m.csv";
}

TEST(Manifest, Loads) {
  TempDir dir("manifest");
  const std::vector<std::vector<std::string>> lists = {kFlowers};
  const auto m = LoadManifest(SmallDataset(dir), lists);
  ASSERT_EQ(m.entries.size(), 4u);
  EXPECT_EQ(m.entries[1].image_path, "img/1.png");
  EXPECT_EQ(m.entries[1].label, "tulip");
  EXPECT_EQ(m.root, dir.path());
}

TEST(Manifest, UnknownLabel) {
  TempDir dir("manifest");
  const auto csv = SmallDataset(dir);
  WriteFile(csv, "image_path,label\nimg/0.png,rose\n");
  const std::vector<std::vector<std::string>> lists = {kFlowers};
  EXPECT_THROW(LoadManifest(csv, lists), IngestionError);
}

TEST(Manifest, DuplicatePathMissingImageAndBadHeader) {
  TempDir dir("manifest");
  const auto csv = SmallDataset(dir);
  WriteFile(csv, "image_path,label\nimg/0.png,daisy\nimg/0.png,tulip\n");
  EXPECT_THROW(LoadManifest(csv), IngestionError);
  WriteFile(csv, "image_path,label\nimg/9.png,daisy\n");
  EXPECT_THROW(LoadManifest(csv), IngestionError);
  WriteFile(csv, "path,label\nimg/0.png,daisy\n");
  EXPECT_THROW(LoadManifest(csv), IngestionError);
  EXPECT_THROW(LoadManifest(dir / "none.csv"), IngestionError);
}

TEST(Quadrant, Examples) {
  const auto tp = Scores({0.7, 0.2, 0.1});
  EXPECT_EQ(ClassifyQuadrant(tp, "sunflower", "sunflower", kFlowers),
            Quadrant::kTP);
  EXPECT_EQ(ClassifyQuadrant(tp, "daisy", "sunflower", kFlowers),
            Quadrant::kFP);
  const auto other = Scores({0.1, 0.3, 0.6});
  EXPECT_EQ(ClassifyQuadrant(other, "tulip", "sunflower", kFlowers),
            Quadrant::kTN);
  // A wrong non-target prediction still counts as a true negative.
  EXPECT_EQ(ClassifyQuadrant(other, "daisy", "sunflower", kFlowers),
            Quadrant::kTN);
  EXPECT_EQ(ClassifyQuadrant(other, "sunflower", "sunflower", kFlowers),
            Quadrant::kFN);
  // Ties go to the lowest index.
  EXPECT_EQ(ClassifyQuadrant(Scores({0.4, 0.4, 0.2}), "daisy", "sunflower",
                             kFlowers),
            Quadrant::kFP);
  EXPECT_THROW(ClassifyQuadrant(tp, "rose", "sunflower", kFlowers), InputError);
}

TEST(Quadrant, NamesRoundTrip) {
  for (Quadrant q : kQuadrantOrder) {
    EXPECT_EQ(ParseQuadrant(QuadrantName(q)), q);
  }
  EXPECT_THROW(ParseQuadrant("XX"), InputError);
}

TEST(Quota, EvenWhenPlentiful) {
  EXPECT_EQ(BalancedQuota({30, 30, 30, 30}, 100),
            (std::array<int, 4>{25, 25, 25, 25}));
}

TEST(Quota, ShortQuadrantRedistributesRoundRobin) {
  // TP, TN, FP, FN
  EXPECT_EQ(BalancedQuota({40, 40, 40, 5}, 100),
            (std::array<int, 4>{32, 32, 31, 5}));
  EXPECT_EQ(BalancedQuota({1, 2, 3, 4}, 100), (std::array<int, 4>{1, 2, 3, 4}));
  EXPECT_EQ(BalancedQuota({10, 0, 0, 0}, 8), (std::array<int, 4>{8, 0, 0, 0}));
}

std::vector<Prediction> Candidates() {
  // 30 images per quadrant for target "sunflower".
  std::vector<Prediction> out;
  for (int i = 0; i < 120; ++i) {
    const int q = i % 4;
    Prediction p;
    p.image_id = "i" + std::to_string(i);
    const bool target_label = q == 0 || q == 3;
    const bool predict_target = q == 0 || q == 2;
    p.label = target_label ? "sunflower" : "tulip";
    p.scores = predict_target ? Scores({0.8, 0.1, 0.1}) : Scores({0.1, 0.1, 0.8});
    out.push_back(p);
  }
  return out;
}

TEST(Sampler, BalancedAndSeeded) {
  const auto model = MakeConstantModel("A", Shape{4, 4, 3}, kFlowers);
  const auto cands = Candidates();
  const auto s1 = SampleBalanced(cands, model, "sunflower", 100, 5);
  EXPECT_EQ(s1.members.size(), 100u);
  EXPECT_EQ(s1.QuadrantCounts(), (std::array<int, 4>{25, 25, 25, 25}));
  std::set<std::string> ids;
  for (const auto& m : s1.members) ids.insert(m.image_id);
  EXPECT_EQ(ids.size(), 100u);

  const auto s2 = SampleBalanced(cands, model, "sunflower", 100, 5);
  ASSERT_EQ(s2.members.size(), s1.members.size());
  for (std::size_t i = 0; i < s1.members.size(); ++i) {
    EXPECT_EQ(s1.members[i].image_id, s2.members[i].image_id);
  }
  const auto s3 = SampleBalanced(cands, model, "sunflower", 100, 6);
  bool differs = false;
  for (std::size_t i = 0; i < s1.members.size(); ++i) {
    differs |= s1.members[i].image_id != s3.members[i].image_id;
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(SampleBalanced(cands, model, "sunflower", 3, 5), InputError);
  EXPECT_THROW(SampleBalanced({}, model, "sunflower", 100, 5), InputError);
}

TEST(Sampler, JsonRoundTrip) {
  const auto model = MakeConstantModel("A", Shape{4, 4, 3}, kFlowers);
  const auto s = SampleBalanced(Candidates(), model, "sunflower", 12, 1);
  const auto back = SampleSetFromJson(ToJson(s));
  EXPECT_EQ(back.model_id, "A");
  EXPECT_EQ(back.seed, 1u);
  ASSERT_EQ(back.members.size(), s.members.size());
  for (std::size_t i = 0; i < s.members.size(); ++i) {
    EXPECT_EQ(back.members[i].image_id, s.members[i].image_id);
    EXPECT_EQ(back.members[i].quadrant, s.members[i].quadrant);
    EXPECT_EQ(back.members[i].scores, s.members[i].scores);
  }
}

SampleSet OneMember(const std::string& id, ScoreVector s) {
  SampleSet set;
  set.members.push_back({id, "sunflower", Quadrant::kTP, std::move(s)});
  return set;
}

TEST(Filter, ConfidentDisagreement) {
  const auto a = OneMember("x", Scores({0.95, 0.03, 0.02}));
  const auto b = OneMember("x", Scores({0.05, 0.90, 0.05}));
  EXPECT_EQ(FilterConfidentDisagreement(a, b, 0.8),
            (std::vector<std::string>{"x"}));
  EXPECT_TRUE(FilterConfidentDisagreement(a, b, 0.99).empty());
  const auto agree = OneMember("x", Scores({0.97, 0.02, 0.01}));
  EXPECT_TRUE(FilterConfidentDisagreement(a, agree, 0.8).empty());
  const auto elsewhere = OneMember("y", Scores({0.05, 0.90, 0.05}));
  EXPECT_TRUE(FilterConfidentDisagreement(a, elsewhere, 0.8).empty());
  EXPECT_THROW(FilterConfidentDisagreement(a, b, 0.5), InputError);
  EXPECT_THROW(FilterConfidentDisagreement(a, b, 1.5), InputError);
}

TEST(Cache, SecondPassHitsWithoutModelCalls) {
  TempDir dir("cache");
  const auto csv = SmallDataset(dir);
  const auto model = ModelFromSpec({{"kind", "builtin-linear"},
                                    {"input_shape", {6, 6, 3}},
                                    {"class_names", kFlowers}},
                                   "lin");
  const std::vector<std::vector<std::string>> lists = {kFlowers};
  const auto manifest = LoadManifest(csv, lists);
  ImageStore store(manifest.root);
  PredictionCache cache(dir / "cache");
  const auto first = PredictManifest(model, manifest, store, &cache);
  EXPECT_EQ(cache.misses(), 4u);
  EXPECT_EQ(model.counters().predict_images, 4u);
  const auto second = PredictManifest(model, manifest, store, &cache);
  EXPECT_EQ(cache.hits(), 4u);
  EXPECT_EQ(model.counters().predict_images, 4u);
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].image_id, second[i].image_id);
    EXPECT_EQ(first[i].scores, second[i].scores);
  }
  // Another model never sees these entries.
  const auto other = MakeConstantModel("other", Shape{6, 6, 3}, kFlowers);
  EXPECT_FALSE(cache.Get(other, *store.Get("img/0.png")).has_value());
}

}  // namespace
}  // namespace attrcmp
