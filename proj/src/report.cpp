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

// Static HTML + inline SVG renderers. Output is a pure function of the input:
// no timestamps, fixed number formatting, deterministic iteration order.

#include "attrcmp/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "attrcmp/io.hpp"

namespace attrcmp {
namespace {

constexpr int kGap = 2;
constexpr int kMargin = 40;
constexpr const char* kBlack = "#000000";

std::string Esc(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

double NoNegZero(double v) { return v == 0.0 ? 0.0 : v; }

std::string Num(double v) { return fmt::format("{:.2f}", NoNegZero(v)); }
std::string Score(double v) { return fmt::format("{:.4f}", NoNegZero(v)); }
std::string Tick(double v) { return fmt::format("{:g}", NoNegZero(v)); }

// PNG data URIs, encoded once per segment.
class Thumbnails {
 public:
  explicit Thumbnails(const PatchSource& source) : source_(source) {}

  const std::string& Uri(const SegmentRef& seg) {
    const auto key = std::make_tuple(seg.image_id, seg.row, seg.col);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      const auto png = io::EncodePng(source_(seg));
      it = cache_.emplace(key, "data:image/png;base64," + io::Base64(png)).first;
    }
    ++uses_;
    return it->second;
  }
  int uses() const { return uses_; }

 private:
  const PatchSource& source_;
  std::map<std::tuple<std::string, int, int>, std::string> cache_;
  int uses_ = 0;
};

const char* ModelLetter(int which) { return which == 0 ? "A" : "B"; }

struct TileOptions {
  bool score_bar = false;
  double bar_limit = 1.0;
};

std::string TileSvg(double x, double y, const SegmentAttributionRecord& r,
                    int which, const std::string& target, Thumbnails& thumbs,
                    const ReportStyle& style, const TileOptions& opt) {
  const int t = style.tile_px;
  const double score = r.ShapleyFor(target);
  std::string s = fmt::format(
      "<g class=\"tile\" data-model=\"{}\" data-image=\"{}\" "
      "data-cell=\"{},{}\" data-quadrant=\"{}\" data-score=\"{}\">",
      ModelLetter(which), Esc(r.seg.image_id), r.seg.row, r.seg.col,
      QuadrantName(r.quadrant), Score(score));
  s += fmt::format(
      "<image x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
      "preserveAspectRatio=\"none\" style=\"image-rendering:pixelated\" "
      "href=\"{}\"/>",
      Num(x), Num(y), t, t, thumbs.Uri(r.seg));
  s += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
      "stroke=\"{}\" stroke-width=\"2\"/>",
      Num(x + 1), Num(y + 1), t - 2, t - 2,
      style.quadrant_colors[static_cast<int>(r.quadrant)]);
  if (opt.score_bar) {
    const double half = t / 2.0 - 2.0;
    const double cx = x + t / 2.0;
    const double len =
        std::clamp(score / opt.bar_limit, -1.0, 1.0) * half;
    const double y_bar = y + t - 5.0;
    s += fmt::format(
        "<line class=\"score-bar\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" "
        "stroke=\"{}\" stroke-width=\"4\"/>",
        Num(cx), Num(y_bar), Num(cx + len), Num(y_bar),
        style.model_colors[which]);
  }
  s += "</g>";
  return s;
}

std::string DocumentHead(std::string_view title) {
  return fmt::format(
      "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      "<title>{}</title>\n<style>\n"
      "body{{font-family:sans-serif;margin:16px;color:#222}}\n"
      "section.cluster{{margin-bottom:28px;border-top:1px solid #ccc;"
      "padding-top:8px}}\n"
      "svg text{{font-size:10px;font-family:sans-serif}}\n"
      ".legend span{{display:inline-block;margin-right:12px}}\n"
      "</style>\n</head>\n<body>\n<h1>{}</h1>\n",
      Esc(title), Esc(title));
}

std::string Legend(const ReportInput& in, const ReportStyle& style) {
  std::string s = "<p class=\"legend\">";
  for (int w = 0; w < 2; ++w) {
    s += fmt::format("<span style=\"color:{}\">&#9632; model {}: {}</span>",
                     style.model_colors[w], ModelLetter(w),
                     Esc(in.model_ids[w]));
  }
  for (Quadrant q : kQuadrantOrder) {
    s += fmt::format("<span style=\"color:{}\">&#9633; {}</span>",
                     style.quadrant_colors[static_cast<int>(q)],
                     QuadrantName(q));
  }
  s += fmt::format("<span>target class: {}</span></p>\n", Esc(in.target_class));
  return s;
}

std::string ClusterHeading(const ClusterView& v, int rank) {
  return fmt::format(
      "<section class=\"cluster\" data-cluster-id=\"{}\" data-rank=\"{}\">\n"
      "<h2>Cluster {} <small>(id {}, {} segments)</small></h2>\n",
      v.cluster.cluster_id, rank + 1, rank + 1, v.cluster.cluster_id,
      v.stats.total);
}

bool ScoreDescending(const SegmentAttributionRecord& x,
                     const SegmentAttributionRecord& y,
                     const std::string& target) {
  const double sx = x.ShapleyFor(target), sy = y.ShapleyFor(target);
  if (sx != sy) return sx > sy;
  return std::tie(x.seg.image_id, x.seg.row, x.seg.col) <
         std::tie(y.seg.image_id, y.seg.row, y.seg.col);
}

nlohmann::json StatsJson(const ClusterView& v, int rank) {
  nlohmann::json j = ToJson(v.stats);
  j["rank"] = rank + 1;
  return j;
}

}  // namespace

std::string_view ReportKindName(ReportKind kind) {
  switch (kind) {
    case ReportKind::kClusterHistogram: return "cluster_histogram";
    case ReportKind::kConceptCluster: return "concept_cluster";
    case ReportKind::kConfusionMatrix: return "confusion_matrix";
  }
  return "report";
}

ReportDocument RenderHistogramView(const ReportInput& in,
                                   const PatchSource& patches,
                                   const ReportStyle& style) {
  Thumbnails thumbs(patches);
  const Binning& bin = in.binning;
  const int t = style.tile_px;
  const int cap = style.hist_tile_truncation;
  const int col_w = t + kGap;
  const int plot_w = bin.bins * col_w;
  const int row_h = cap * (t + kGap) + 14;  // tiles + overflow marker
  const int axis_h = 18;
  const int panel_h = row_h + axis_h;
  const int svg_w = plot_w + 2 * kMargin;
  const int svg_h = 2 * panel_h + 8;
  const std::string tick_min = Tick(-bin.limit), tick_max = Tick(bin.limit);

  std::string html = DocumentHead(in.title + " | cluster histograms");
  html += Legend(in, style);
  nlohmann::json side{{"kind", ReportKindName(ReportKind::kClusterHistogram)},
                      {"target_class", in.target_class},
                      {"model_ids", in.model_ids},
                      {"binning", ToJson(bin)},
                      {"ticks", {tick_min, "0", tick_max}},
                      {"tile_cap", cap},
                      {"clusters", nlohmann::json::array()}};

  for (std::size_t rank = 0; rank < in.clusters.size(); ++rank) {
    const ClusterView& v = in.clusters[rank];
    html += ClusterHeading(v, static_cast<int>(rank));
    html += fmt::format("<svg class=\"histogram\" width=\"{}\" height=\"{}\" "
                        "viewBox=\"0 0 {} {}\">\n",
                        svg_w, svg_h, svg_w, svg_h);
    nlohmann::json cj = StatsJson(v, static_cast<int>(rank));
    cj["bins"] = nlohmann::json::object();
    for (int w = 0; w < 2; ++w) {
      const double top = w * panel_h;
      const double base = top + row_h;
      std::vector<std::vector<const SegmentAttributionRecord*>> by_bin(bin.bins);
      for (const auto& r : v.rows[w]) {
        by_bin[bin.BinOf(r.ShapleyFor(in.target_class))].push_back(&r);
      }
      html += fmt::format(
          "<g class=\"model-row\" data-model=\"{}\" data-count=\"{}\">",
          ModelLetter(w), v.rows[w].size());
      html += fmt::format(
          "<text x=\"4\" y=\"{}\" fill=\"{}\" font-weight=\"bold\">{}</text>",
          Num(top + 12), style.model_colors[w], ModelLetter(w));
      nlohmann::json bins_json = nlohmann::json::array();
      for (int b = 0; b < bin.bins; ++b) {
        auto& members = by_bin[b];
        std::sort(members.begin(), members.end(),
                  [&](const auto* x, const auto* y) {
                    return ScoreDescending(*x, *y, in.target_class);
                  });
        const int shown = std::min<int>(cap, members.size());
        const int overflow = static_cast<int>(members.size()) - shown;
        const double x = kMargin + b * col_w;
        for (int i = 0; i < shown; ++i) {
          const double y = base - (i + 1) * (t + kGap);
          html += TileSvg(x, y, *members[i], w, in.target_class, thumbs, style,
                          TileOptions{});
        }
        if (overflow > 0) {
          html += fmt::format(
              "<text class=\"overflow\" data-bin=\"{}\" x=\"{}\" y=\"{}\" "
              "text-anchor=\"middle\">+{}</text>",
              b, Num(x + t / 2.0), Num(base - shown * (t + kGap) - 3),
              overflow);
        }
        bins_json.push_back({{"bin", b},
                             {"count", members.size()},
                             {"shown", shown},
                             {"overflow", overflow}});
      }
      // Axis with identical tick labels for every cluster.
      html += fmt::format(
          "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"/>",
          kMargin, Num(base + 1), kMargin + plot_w, Num(base + 1), kBlack);
      html += fmt::format(
          "<text class=\"tick tick-min\" x=\"{}\" y=\"{}\" "
          "text-anchor=\"start\">{}</text>",
          kMargin, Num(base + 13), tick_min);
      html += fmt::format(
          "<text class=\"tick tick-zero\" x=\"{}\" y=\"{}\" "
          "text-anchor=\"middle\">0</text>",
          Num(kMargin + plot_w / 2.0), Num(base + 13));
      html += fmt::format(
          "<text class=\"tick tick-max\" x=\"{}\" y=\"{}\" "
          "text-anchor=\"end\">{}</text>",
          kMargin + plot_w, Num(base + 13), tick_max);
      html += "</g>\n";
      cj["bins"][ModelLetter(w)] = bins_json;
    }
    html += "</svg>\n</section>\n";
    side["clusters"].push_back(cj);
  }
  html += "</body>\n</html>\n";
  return {ReportKind::kClusterHistogram, std::move(html), std::move(side),
          thumbs.uses()};
}

ReportDocument RenderConceptView(const ReportInput& in,
                                 const PatchSource& patches,
                                 const ReportStyle& style) {
  Thumbnails thumbs(patches);
  const Binning& bin = in.binning;
  const int t = style.tile_px;
  const int per_line = 20;

  int max_total = 1;
  double extent = 0.0;
  for (const auto& v : in.clusters) {
    max_total = std::max(max_total, v.stats.total);
    extent = std::max({extent, std::abs(v.stats.models[0].mean),
                       std::abs(v.stats.models[1].mean),
                       std::abs(v.stats.global_max_mean)});
  }
  if (!(extent > 0.0)) extent = 1.0;

  std::string html = DocumentHead(in.title + " | concept clusters");
  html += Legend(in, style);
  nlohmann::json side{{"kind", ReportKindName(ReportKind::kConceptCluster)},
                      {"target_class", in.target_class},
                      {"model_ids", in.model_ids},
                      {"binning", ToJson(bin)},
                      {"importance_extent", extent},
                      {"clusters", nlohmann::json::array()}};

  for (std::size_t rank = 0; rank < in.clusters.size(); ++rank) {
    const ClusterView& v = in.clusters[rank];
    html += ClusterHeading(v, static_cast<int>(rank));
    nlohmann::json cj = StatsJson(v, static_cast<int>(rank));

    // Thumbnail rows.
    for (int w = 0; w < 2; ++w) {
      const auto& row = v.rows[w];
      const int lines = std::max<int>(1, (row.size() + per_line - 1) / per_line);
      const int width = kMargin + per_line * (t + kGap);
      const int height = lines * (t + kGap);
      html += fmt::format(
          "<svg class=\"members\" data-model=\"{}\" data-count=\"{}\" "
          "width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
          ModelLetter(w), row.size(), width, height, width, height);
      html += fmt::format(
          "<text x=\"4\" y=\"14\" fill=\"{}\" font-weight=\"bold\">{}</text>",
          style.model_colors[w], ModelLetter(w));
      for (std::size_t i = 0; i < row.size(); ++i) {
        const double x = kMargin + (i % per_line) * (t + kGap);
        const double y = (i / per_line) * (t + kGap);
        html += TileSvg(x, y, row[i], w, in.target_class, thumbs, style,
                        TileOptions{true, bin.limit});
      }
      html += "</svg><br>\n";
      nlohmann::json scores = nlohmann::json::array();
      for (const auto& r : row) scores.push_back(r.ShapleyFor(in.target_class));
      cj["row_scores"][ModelLetter(w)] = scores;
    }

    const int pw = 220, ph = 120, pad = 20;
    html += "<div class=\"plots\">";

    // Composition: total (black), A, B.
    {
      html += fmt::format(
          "<svg class=\"plot composition\" width=\"{}\" height=\"{}\" "
          "viewBox=\"0 0 {} {}\">",
          pw, ph, pw, ph);
      const std::array<int, 3> counts = {v.stats.total, v.stats.models[0].count,
                                         v.stats.models[1].count};
      const std::array<std::string, 3> colors = {kBlack, style.model_colors[0],
                                                 style.model_colors[1]};
      const std::array<const char*, 3> names = {"total", "A", "B"};
      const double bar_w = (pw - 2.0 * pad) / 3.0 - 6.0;
      for (int i = 0; i < 3; ++i) {
        const double h = (ph - 2.0 * pad) * counts[i] / max_total;
        const double x = pad + i * (bar_w + 6.0);
        html += fmt::format(
            "<rect class=\"composition-bar\" data-series=\"{}\" "
            "data-count=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
            "fill=\"{}\"/>",
            names[i], counts[i], Num(x), Num(ph - pad - h), Num(bar_w), Num(h),
            colors[i]);
        html += fmt::format(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            Num(x + bar_w / 2), ph - 6, counts[i]);
      }
      html += "<text x=\"4\" y=\"12\">composition</text></svg>";
    }

    // Full (untruncated) histograms on the shared axis.
    {
      html += fmt::format(
          "<svg class=\"plot score-histogram\" width=\"{}\" height=\"{}\" "
          "viewBox=\"0 0 {} {}\">",
          pw, ph, pw, ph);
      int peak = 1;
      for (const auto& m : v.stats.models) {
        for (int c : m.histogram) peak = std::max(peak, c);
      }
      const double slot = (pw - 2.0 * pad) / bin.bins;
      for (int b = 0; b < bin.bins; ++b) {
        for (int w = 0; w < 2; ++w) {
          const int c = v.stats.models[w].histogram[b];
          if (c == 0) continue;
          const double h = (ph - 2.0 * pad) * c / peak;
          html += fmt::format(
              "<rect class=\"hist-bar\" data-model=\"{}\" data-bin=\"{}\" "
              "data-count=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
              "fill=\"{}\" fill-opacity=\"0.8\"/>",
              ModelLetter(w), b, c, Num(pad + b * slot + w * slot / 2),
              Num(ph - pad - h), Num(slot / 2), Num(h), style.model_colors[w]);
        }
      }
      html += fmt::format(
          "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"/>", pad,
          ph - pad, pw - pad, ph - pad, kBlack);
      html += fmt::format(
          "<text class=\"tick tick-min\" x=\"{}\" y=\"{}\">{}</text>"
          "<text class=\"tick tick-max\" x=\"{}\" y=\"{}\" "
          "text-anchor=\"end\">{}</text>",
          pad, ph - 6, Tick(-bin.limit), pw - pad, ph - 6, Tick(bin.limit));
      html += "<text x=\"4\" y=\"12\">coherence</text></svg>";
    }

    // Importance: signed mean bars with a reference at the global max mean.
    {
      html += fmt::format(
          "<svg class=\"plot importance\" width=\"{}\" height=\"{}\" "
          "viewBox=\"0 0 {} {}\">",
          pw, ph, pw, ph);
      const double x0 = pw / 2.0;
      const double half = pw / 2.0 - pad;
      auto x_of = [&](double value) { return Num(x0 + value / extent * half); };
      html += fmt::format(
          "<line class=\"zero-line\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" "
          "stroke=\"#888888\"/>",
          Num(x0), pad, Num(x0), ph - pad);
      for (int w = 0; w < 2; ++w) {
        const double y = pad + 20.0 + w * 34.0;
        const auto& m = v.stats.models[w];
        html += fmt::format(
            "<line class=\"mean-bar\" data-model=\"{}\" data-mean=\"{}\" "
            "data-empty=\"{}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" "
            "stroke=\"{}\" stroke-width=\"16\"/>",
            ModelLetter(w), Score(m.mean), m.empty ? "true" : "false", Num(x0),
            Num(y), x_of(m.mean), Num(y), style.model_colors[w]);
        html += fmt::format("<text x=\"4\" y=\"{}\">{} {}</text>", Num(y + 4),
                            ModelLetter(w), m.empty ? "(none)" : Score(m.mean));
      }
      html += fmt::format(
          "<line class=\"reference-line\" data-value=\"{}\" x1=\"{}\" "
          "y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>",
          Score(v.stats.global_max_mean), x_of(v.stats.global_max_mean), pad,
          x_of(v.stats.global_max_mean), ph - pad, kBlack);
      html += "<text x=\"4\" y=\"12\">importance</text></svg>";
    }
    html += "</div>\n</section>\n";
    side["clusters"].push_back(cj);
  }
  html += "</body>\n</html>\n";
  return {ReportKind::kConceptCluster, std::move(html), std::move(side),
          thumbs.uses()};
}

namespace {

// Display slot of each quadrant in a 2x2 panel: {row, col}.
std::pair<int, int> QuadrantSlot(Quadrant q) {
  switch (q) {
    case Quadrant::kTP: return {0, 0};
    case Quadrant::kFP: return {0, 1};
    case Quadrant::kFN: return {1, 0};
    case Quadrant::kTN: return {1, 1};
  }
  return {1, 1};
}

std::string ConfusionSection(const ClusterView& v, int rank,
                             const ReportInput& in, Thumbnails& thumbs,
                             const ReportStyle& style, nlohmann::json* cj) {
  const int t = style.tile_px;
  const int per_line = 5;
  const int cell_w = per_line * (t + kGap) + 8;
  // cells[model][quadrant]
  std::array<std::array<std::vector<const SegmentAttributionRecord*>, 4>, 2>
      cells;
  for (int w = 0; w < 2; ++w) {
    for (const auto& r : v.rows[w]) {
      cells[w][static_cast<int>(r.quadrant)].push_back(&r);
    }
    for (auto& c : cells[w]) {
      std::sort(c.begin(), c.end(), [&](const auto* x, const auto* y) {
        return ScoreDescending(*x, *y, in.target_class);
      });
    }
  }
  auto lines_for = [&](const std::vector<const SegmentAttributionRecord*>& c) {
    return std::max<int>(1, (c.size() + per_line - 1) / per_line);
  };
  std::array<int, 2> row_lines = {1, 1};
  for (int w = 0; w < 2; ++w) {
    for (Quadrant q : kQuadrantOrder) {
      const int slot_row = QuadrantSlot(q).first;
      row_lines[slot_row] = std::max(row_lines[slot_row],
                                     lines_for(cells[w][static_cast<int>(q)]));
    }
  }
  const int header = 16;
  const std::array<int, 2> row_h = {header + row_lines[0] * (t + kGap) + 6,
                                    header + row_lines[1] * (t + kGap) + 6};
  const int panel_w = 2 * cell_w;
  const int svg_w = 2 * panel_w + 3 * 16;
  const int svg_h = 20 + row_h[0] + row_h[1];

  std::string s = ClusterHeading(v, rank);
  s += fmt::format(
      "<svg class=\"confusion\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\">\n",
      svg_w, svg_h, svg_w, svg_h);
  for (int w = 0; w < 2; ++w) {
    const double px = 16 + w * (panel_w + 16);
    s += fmt::format(
        "<g class=\"panel\" data-model=\"{}\" data-count=\"{}\">"
        "<text x=\"{}\" y=\"12\" fill=\"{}\" font-weight=\"bold\">{} ({})</text>",
        ModelLetter(w), v.rows[w].size(), Num(px), style.model_colors[w],
        ModelLetter(w), Esc(in.model_ids[w]));
    nlohmann::json pj = nlohmann::json::object();
    for (Quadrant q : kQuadrantOrder) {
      const auto [sr, sc] = QuadrantSlot(q);
      const auto& members = cells[w][static_cast<int>(q)];
      const double cx = px + sc * cell_w;
      const double cy = 20 + (sr == 0 ? 0 : row_h[0]);
      const auto& color = style.quadrant_colors[static_cast<int>(q)];
      s += fmt::format(
          "<g class=\"quadrant\" data-quadrant=\"{}\" data-slot=\"{},{}\" "
          "data-count=\"{}\">",
          QuadrantName(q), sr, sc, members.size());
      s += fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" "
          "stroke=\"{}\"/>",
          Num(cx), Num(cy), cell_w - 2, row_h[sr] - 2, color);
      s += fmt::format(
          "<text x=\"{}\" y=\"{}\" fill=\"{}\">{} ({})</text>", Num(cx + 4),
          Num(cy + 12), color, QuadrantName(q), members.size());
      for (std::size_t i = 0; i < members.size(); ++i) {
        const double x = cx + 4 + (i % per_line) * (t + kGap);
        const double y = cy + header + (i / per_line) * (t + kGap);
        s += TileSvg(x, y, *members[i], w, in.target_class, thumbs, style,
                     TileOptions{true, in.binning.limit});
      }
      s += "</g>";
      pj[std::string(QuadrantName(q))] = members.size();
    }
    s += "</g>\n";
    (*cj)["panels"][ModelLetter(w)] = pj;
  }
  s += "</svg>\n</section>\n";
  return s;
}

}  // namespace

ReportDocument RenderConfusionView(const ReportInput& in,
                                   const PatchSource& patches,
                                   const ReportStyle& style) {
  Thumbnails thumbs(patches);
  std::string html = DocumentHead(in.title + " | cluster confusion matrices");
  html += Legend(in, style);
  nlohmann::json side{{"kind", ReportKindName(ReportKind::kConfusionMatrix)},
                      {"target_class", in.target_class},
                      {"model_ids", in.model_ids},
                      {"clusters", nlohmann::json::array()}};
  for (std::size_t rank = 0; rank < in.clusters.size(); ++rank) {
    nlohmann::json cj = StatsJson(in.clusters[rank], static_cast<int>(rank));
    html += ConfusionSection(in.clusters[rank], static_cast<int>(rank), in,
                             thumbs, style, &cj);
    side["clusters"].push_back(cj);
  }
  html += "</body>\n</html>\n";
  return {ReportKind::kConfusionMatrix, std::move(html), std::move(side),
          thumbs.uses()};
}

ReportDocument RenderConfusionView(const ClusterView& cluster,
                                   const ReportInput& context,
                                   const PatchSource& patches,
                                   const ReportStyle& style) {
  ReportInput single = context;
  single.clusters = {cluster};
  return RenderConfusionView(single, patches, style);
}

}  // namespace attrcmp
