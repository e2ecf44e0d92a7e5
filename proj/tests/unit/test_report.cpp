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

#include <cstdlib>
#include <regex>

#include "attrcmp/io.hpp"
#include "attrcmp/report.hpp"
#include "report_fixture.hpp"

namespace attrcmp {
namespace {

using testing::FixturePatch;
using testing::ReportFixture;

std::vector<std::smatch> AllMatches(const std::string& text,
                                    const std::string& pattern) {
  const std::regex re(pattern);
  std::vector<std::smatch> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
       it != std::sregex_iterator(); ++it) {
    out.push_back(*it);
  }
  return out;
}

// Compares against tests/golden/<kind>.html. ATTRCMP_UPDATE_GOLDEN=1 rewrites.
void CheckGolden(const ReportDocument& doc) {
  const auto path = std::filesystem::path(ATTRCMP_GOLDEN_DIR) /
                    (std::string(ReportKindName(doc.kind)) + ".html");
  if (const char* u = std::getenv("ATTRCMP_UPDATE_GOLDEN"); u && *u == '1') {
    io::WriteTextAtomic(path, doc.html);
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << path;
  EXPECT_EQ(doc.html, io::ReadText(path)) << "differs from " << path;
}

TEST(Report, GoldenFiles) {
  const auto in = ReportFixture();
  CheckGolden(RenderHistogramView(in, FixturePatch));
  CheckGolden(RenderConceptView(in, FixturePatch));
  CheckGolden(RenderConfusionView(in, FixturePatch));
}

TEST(Report, RenderingIsDeterministic) {
  const auto in = ReportFixture();
  EXPECT_EQ(RenderConceptView(in, FixturePatch).html,
            RenderConceptView(in, FixturePatch).html);
}

TEST(Report, ColorsPresent) {
  const auto in = ReportFixture();
  const ReportStyle style;
  for (const auto& doc : {RenderHistogramView(in, FixturePatch),
                          RenderConceptView(in, FixturePatch),
                          RenderConfusionView(in, FixturePatch)}) {
    for (const auto& c : style.model_colors) {
      EXPECT_NE(doc.html.find(c), std::string::npos) << c;
    }
    for (const auto& c : style.quadrant_colors) {
      EXPECT_NE(doc.html.find(c), std::string::npos) << c;
    }
  }
  EXPECT_EQ(style.quadrant_colors[static_cast<int>(Quadrant::kTP)], "#0000FF");
  EXPECT_EQ(style.quadrant_colors[static_cast<int>(Quadrant::kTN)], "#FF0000");
  EXPECT_EQ(style.quadrant_colors[static_cast<int>(Quadrant::kFP)], "#0AC7C7");
  EXPECT_EQ(style.quadrant_colors[static_cast<int>(Quadrant::kFN)], "#FE04F9");
}

TEST(Report, HistogramTicksSharedAcrossClusters) {
  const auto doc = RenderHistogramView(ReportFixture(), FixturePatch);
  for (const std::string cls : {"tick-min", "tick-zero", "tick-max"}) {
    const auto ticks =
        AllMatches(doc.html, "class=\"tick " + cls + "\"[^>]*>([^<]*)</text>");
    ASSERT_EQ(ticks.size(), 4u) << cls;  // two rows in each of two clusters
    for (const auto& m : ticks) EXPECT_EQ(m[1], ticks[0][1]);
  }
  EXPECT_EQ(doc.sidecar["ticks"],
            (nlohmann::json{"-0.3", "0", "0.3"}));
}

TEST(Report, HistogramTruncatesCrowdedBins) {
  const auto in = ReportFixture();
  const auto doc = RenderHistogramView(in, FixturePatch);
  // Zero scores land in the centre bin.
  EXPECT_EQ(in.binning.BinOf(0.0), 10);
  const auto& first = doc.sidecar["clusters"][0];
  EXPECT_EQ(first["cluster_id"], 0);
  const auto& centre = first["bins"]["A"][10];
  EXPECT_EQ(centre["count"], 9);
  EXPECT_EQ(centre["shown"], 5);
  EXPECT_EQ(centre["overflow"], 4);
  EXPECT_NE(doc.html.find("data-bin=\"10\""), std::string::npos);
  const auto overflow =
      AllMatches(doc.html, "<text class=\"overflow\"[^>]*>([^<]*)</text>");
  ASSERT_EQ(overflow.size(), 1u);
  EXPECT_EQ(overflow[0][1], "+4");
  // 5 + 3 + 2 tiles drawn in total.
  EXPECT_EQ(AllMatches(doc.html, "<g class=\"tile\"").size(), 10u);
}

TEST(Report, EmptyModelRowStillRendered) {
  const auto in = ReportFixture();
  const auto hist = RenderHistogramView(in, FixturePatch);
  EXPECT_NE(hist.html.find("<g class=\"model-row\" data-model=\"B\" "
                           "data-count=\"0\">"),
            std::string::npos);
  const auto concept_doc = RenderConceptView(in, FixturePatch);
  EXPECT_NE(concept_doc.html.find("data-model=\"B\" data-mean=\"0.0000\" "
                              "data-empty=\"true\""),
            std::string::npos);
}

TEST(Report, MeanBarReachesReferenceLine) {
  const auto in = ReportFixture();
  const auto doc = RenderConceptView(in, FixturePatch);
  // Cluster 0, model B holds the largest mean.
  const double gmm = in.clusters[0].stats.global_max_mean;
  EXPECT_NEAR(gmm, (0.2 - 0.1 + 0.25) / 3.0, 1e-15);
  const auto bars = AllMatches(
      doc.html,
      "<line class=\"mean-bar\" data-model=\"(A|B)\" data-mean=\"([^\"]*)\" "
      "data-empty=\"[a-z]*\" x1=\"([^\"]*)\" y1=\"[^\"]*\" x2=\"([^\"]*)\"");
  const auto refs = AllMatches(
      doc.html, "<line class=\"reference-line\" data-value=\"[^\"]*\" "
                "x1=\"([^\"]*)\" y1=\"[^\"]*\" x2=\"([^\"]*)\"");
  ASSERT_EQ(bars.size(), 4u);
  ASSERT_EQ(refs.size(), 2u);
  const auto& top_b = bars[1];  // first cluster, model B
  EXPECT_EQ(top_b[1], "B");
  EXPECT_EQ(top_b[4], refs[0][1]);
  EXPECT_EQ(refs[0][1], refs[0][2]);
  EXPECT_EQ(refs[0][1], refs[1][1]);  // same reference in every cluster
  // Zero means stay on the axis.
  const auto& top_a = bars[0];
  EXPECT_EQ(top_a[3], top_a[4]);
}

TEST(Report, QuadrantBordersAndSignedBars) {
  const auto doc = RenderConceptView(ReportFixture(), FixturePatch);
  const auto tiles = AllMatches(
      doc.html,
      "<g class=\"tile\" data-model=\"([AB])\" data-image=\"([^\"]*)\" "
      "data-cell=\"[^\"]*\" data-quadrant=\"([A-Z]*)\" data-score=\"([^\"]*)\">"
      "<image[^>]*/><rect[^>]*stroke=\"([^\"]*)\"[^>]*/>"
      "(<line class=\"score-bar\" x1=\"([^\"]*)\" y1=\"[^\"]*\" "
      "x2=\"([^\"]*)\")?");
  ASSERT_EQ(tiles.size(), 14u);
  const ReportStyle style;
  bool saw_negative = false, saw_positive = false;
  for (const auto& t : tiles) {
    const Quadrant q = ParseQuadrant(t[3].str());
    EXPECT_EQ(t[5], style.quadrant_colors[static_cast<int>(q)]);
    ASSERT_TRUE(t[6].matched);
    const double score = std::stod(t[4]);
    const double x1 = std::stod(t[7]), x2 = std::stod(t[8]);
    if (score < 0) {
      EXPECT_LT(x2, x1);
      saw_negative = true;
    } else if (score > 0) {
      EXPECT_GT(x2, x1);
      saw_positive = true;
    } else {
      EXPECT_EQ(x2, x1);
    }
    if (t[2] == "img2") {
      EXPECT_EQ(t[3], "FP");
      EXPECT_EQ(t[5], "#0AC7C7");
    }
  }
  EXPECT_TRUE(saw_negative);
  EXPECT_TRUE(saw_positive);
}

TEST(Report, ConfusionPanelsPartitionMembers) {
  const auto in = ReportFixture();
  const auto doc = RenderConfusionView(in, FixturePatch);
  const auto& c0 = doc.sidecar["clusters"][0]["panels"];
  EXPECT_EQ(c0["A"]["TP"], 3);
  EXPECT_EQ(c0["A"]["TN"], 2);
  EXPECT_EQ(c0["A"]["FP"], 2);
  EXPECT_EQ(c0["A"]["FN"], 2);
  EXPECT_EQ(c0["B"]["TP"], 1);
  EXPECT_EQ(c0["B"]["FP"], 1);
  EXPECT_EQ(c0["B"]["FN"], 1);
  EXPECT_EQ(c0["B"]["TN"], 0);
  const auto slots = AllMatches(
      doc.html, "<g class=\"quadrant\" data-quadrant=\"([A-Z]*)\" "
                "data-slot=\"([0-9],[0-9])\" data-count=\"([0-9]*)\">");
  ASSERT_EQ(slots.size(), 16u);
  std::map<std::string, std::string> slot_of;
  for (const auto& m : slots) slot_of[m[1]] = m[2];
  EXPECT_EQ(slot_of["TP"], "0,0");
  EXPECT_EQ(slot_of["FP"], "0,1");
  EXPECT_EQ(slot_of["FN"], "1,0");
  EXPECT_EQ(slot_of["TN"], "1,1");

  const auto single = RenderConfusionView(in.clusters[1], in, FixturePatch);
  EXPECT_EQ(single.sidecar["clusters"].size(), 1u);
  EXPECT_EQ(single.sidecar["clusters"][0]["panels"]["A"]["TP"], 1);
  EXPECT_EQ(single.sidecar["clusters"][0]["panels"]["B"]["TP"], 0);
}

TEST(Report, EmptyClusterRenders) {
  auto in = ReportFixture();
  ClusterView empty;
  empty.cluster.cluster_id = 7;
  empty.stats.cluster_id = 7;
  empty.stats.model_ids = in.model_ids;
  for (auto& m : empty.stats.models) m.histogram.assign(in.binning.bins, 0);
  in.clusters.push_back(empty);
  for (const auto& doc : {RenderHistogramView(in, FixturePatch),
                          RenderConceptView(in, FixturePatch),
                          RenderConfusionView(in, FixturePatch)}) {
    EXPECT_NE(doc.html.find("data-cluster-id=\"7\""), std::string::npos);
    EXPECT_EQ(doc.sidecar["clusters"].size(), 3u);
  }
}

TEST(Report, ThumbnailsAreEmbedded) {
  const auto doc = RenderHistogramView(ReportFixture(), FixturePatch);
  EXPECT_EQ(doc.thumbnails, 10);
  EXPECT_NE(doc.html.find("href=\"data:image/png;base64,"), std::string::npos);
  EXPECT_NE(doc.html.find("Fixture &lt;A|B&gt;"), std::string::npos);
}

}  // namespace
}  // namespace attrcmp
