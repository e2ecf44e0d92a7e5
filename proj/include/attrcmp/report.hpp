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

#ifndef ATTRCMP_REPORT_HPP_
#define ATTRCMP_REPORT_HPP_

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "attrcmp/clustering.hpp"
#include "json.hpp"

namespace attrcmp {

struct ReportStyle {
  // Indexed by Quadrant: TP, TN, FP, FN.
  std::array<std::string, 4> quadrant_colors = {"#0000FF", "#FF0000",
                                                "#0AC7C7", "#FE04F9"};
  // Model A, model B.
  std::array<std::string, 2> model_colors = {"#FF7F0D", "#1F77B4"};
  int tile_px = 32;
  int hist_tile_truncation = 5;
};

enum class ReportKind { kClusterHistogram, kConceptCluster, kConfusionMatrix };

std::string_view ReportKindName(ReportKind kind);

struct ReportDocument {
  ReportKind kind = ReportKind::kClusterHistogram;
  std::string html;
  // Every number drawn in the document, for machine checks.
  nlohmann::json sidecar;
  int thumbnails = 0;
};

// One cluster as it will be displayed: stats plus already sorted rows.
struct ClusterView {
  ConceptCluster cluster;
  ClusterStats stats;
  std::array<std::vector<SegmentAttributionRecord>, 2> rows;
};

struct ReportInput {
  std::string title;
  std::string target_class;
  std::array<std::string, 2> model_ids;
  Binning binning;
  std::vector<ClusterView> clusters;  // display order
};

// Pixels of a segment, for thumbnails.
using PatchSource = std::function<ImageTensor(const SegmentRef&)>;

// Per cluster, tile histograms for A (upper) and B (lower) on the shared
// axis; at most hist_tile_truncation tiles per bin plus a "+n" marker.
ReportDocument RenderHistogramView(const ReportInput& input,
                                   const PatchSource& patches,
                                   const ReportStyle& style = ReportStyle());

// Per cluster, thumbnail rows with quadrant borders and signed score bars,
// then composition, full histogram and mean-attribution plots.
ReportDocument RenderConceptView(const ReportInput& input,
                                 const PatchSource& patches,
                                 const ReportStyle& style = ReportStyle());

// Each cluster exploded into side-by-side 2x2 confusion panels (A left,
// B right; TP top-left, FP top-right, FN bottom-left, TN bottom-right).
ReportDocument RenderConfusionView(const ReportInput& input,
                                   const PatchSource& patches,
                                   const ReportStyle& style = ReportStyle());

// Single-cluster form of the above.
ReportDocument RenderConfusionView(const ClusterView& cluster,
                                   const ReportInput& context,
                                   const PatchSource& patches,
                                   const ReportStyle& style = ReportStyle());

}  // namespace attrcmp

#endif  // ATTRCMP_REPORT_HPP_
