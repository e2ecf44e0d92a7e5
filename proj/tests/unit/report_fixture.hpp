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

#ifndef ATTRCMP_TESTS_REPORT_FIXTURE_HPP_
#define ATTRCMP_TESTS_REPORT_FIXTURE_HPP_

#include <string>
#include <vector>

#include "attrcmp/clustering.hpp"
#include "attrcmp/report.hpp"

namespace attrcmp::testing {

inline SegmentAttributionRecord ReportRecord(const std::string& model,
                                             const std::string& image, int cell,
                                             double score, Quadrant q) {
  SegmentAttributionRecord r;
  r.seg = SegmentRef{image, cell / 4, cell % 4,
                     BBox{4 * (cell / 4), 4 * (cell % 4), 4, 4}};
  r.source_model = model;
  r.quadrant = q;
  r.shapley = {{"t", score}};
  return r;
}

// Two clusters: the first holds nine zero-score A segments (one histogram bin
// overflows) and three mixed B segments; the second has A members only.
inline ReportInput ReportFixture() {
  const std::array<std::string, 2> ids = {"A", "B"};
  std::vector<ConceptCluster> clusters(2);
  clusters[0].cluster_id = 0;
  clusters[1].cluster_id = 1;
  for (int i = 0; i < 9; ++i) {
    clusters[0].members.push_back(ReportRecord(
        "A", "img" + std::to_string(i), i, 0.0, kQuadrantOrder[i % 4]));
  }
  clusters[0].members.push_back(ReportRecord("B", "img1", 3, 0.2, Quadrant::kTP));
  clusters[0].members.push_back(
      ReportRecord("B", "img2", 5, -0.1, Quadrant::kFP));
  clusters[0].members.push_back(
      ReportRecord("B", "img3", 6, 0.25, Quadrant::kFN));
  clusters[1].members.push_back(ReportRecord("A", "img4", 7, 0.3, Quadrant::kTP));
  clusters[1].members.push_back(
      ReportRecord("A", "img5", 8, -0.2, Quadrant::kTN));

  std::vector<double> scores;
  for (const auto& c : clusters) {
    for (const auto& r : c.members) scores.push_back(r.ShapleyFor("t"));
  }
  ReportInput in;
  in.title = "Fixture <A|B>";
  in.target_class = "t";
  in.model_ids = ids;
  in.binning = Binning::ForScores(scores);
  const auto stats = ComputeStats(clusters, "t", in.binning, ids);
  for (int id : OrderClusters(stats, ClusterOrder::kImbalance)) {
    in.clusters.push_back(
        {clusters[id], stats[id],
         SortWithinCluster(clusters[id], WithinClusterOrder::kAttributionDesc,
                           "t", ids)});
  }
  return in;
}

// 4x4 RGB patch whose color depends only on the cell.
inline ImageTensor FixturePatch(const SegmentRef& seg) {
  ImageTensor img(Shape{seg.bbox.height, seg.bbox.width, 3});
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      img.at(r, c, 0) = static_cast<float>(seg.row) / 4.0f;
      img.at(r, c, 1) = static_cast<float>(seg.col) / 4.0f;
      img.at(r, c, 2) = static_cast<float>((r + c) % 2);
    }
  }
  return img;
}

}  // namespace attrcmp::testing

#endif  // ATTRCMP_TESTS_REPORT_FIXTURE_HPP_
