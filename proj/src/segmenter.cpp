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

#include "attrcmp/segmenter.hpp"

#include <algorithm>

#include "attrcmp/error.hpp"
#include "attrcmp/kernels.hpp"

namespace attrcmp {

std::vector<SegmentRef> GridSegments(int height, int width, int grid_rows,
                                     int grid_cols,
                                     const std::string& image_id) {
  if (grid_rows < 1 || grid_cols < 1) {
    throw InputError("grid must have at least one row and column");
  }
  if (height < grid_rows || width < grid_cols) {
    throw InputError("image " + std::to_string(height) + "x" +
                     std::to_string(width) + " smaller than grid " +
                     std::to_string(grid_rows) + "x" +
                     std::to_string(grid_cols));
  }
  const int cell_h = height / grid_rows, cell_w = width / grid_cols;
  std::vector<SegmentRef> out;
  out.reserve(static_cast<std::size_t>(grid_rows) * grid_cols);
  for (int r = 0; r < grid_rows; ++r) {
    const int h = r == grid_rows - 1 ? height - cell_h * r : cell_h;
    for (int c = 0; c < grid_cols; ++c) {
      const int w = c == grid_cols - 1 ? width - cell_w * c : cell_w;
      out.push_back({image_id, r, c, BBox{r * cell_h, c * cell_w, h, w}});
    }
  }
  return out;
}

double AutoSigma(int height, int width, int grid_rows, int grid_cols) {
  return std::max(height / grid_rows, width / grid_cols) / 2.0;
}

void CheckSegmentFits(const ImageTensor& image, const SegmentRef& seg) {
  const BBox& b = seg.bbox;
  if (b.top < 0 || b.left < 0 || b.height < 1 || b.width < 1 ||
      b.top + b.height > image.height() || b.left + b.width > image.width()) {
    throw InputError("segment (" + std::to_string(seg.row) + "," +
                     std::to_string(seg.col) + ") of '" + seg.image_id +
                     "' does not belong to a " + image.shape().ToString() +
                     " image");
  }
}

ImageTensor BlurExclude(const ImageTensor& image,
                        std::span<const SegmentRef> excluded, double sigma) {
  for (const auto& seg : excluded) CheckSegmentFits(image, seg);
  if (!(sigma > 0.0)) throw InputError("blur sigma must be positive");
  if (excluded.empty()) return image;
  const auto blurred = kernels::GaussianBlur(image, sigma);
  std::vector<BBox> boxes;
  for (const auto& seg : excluded) boxes.push_back(seg.bbox);
  ImageTensor out = image;
  for (const BBox& b : boxes) {
    for (int r = b.top; r < b.top + b.height; ++r) {
      for (int c = b.left; c < b.left + b.width; ++c) {
        for (int ch = 0; ch < image.channels(); ++ch) {
          out.at(r, c, ch) = static_cast<float>(
              std::clamp(blurred.at(r, c, ch), 0.0, 1.0));
        }
      }
    }
  }
  return out;
}

ImageTensor CropSegment(const ImageTensor& image, const SegmentRef& seg) {
  CheckSegmentFits(image, seg);
  const BBox& b = seg.bbox;
  ImageTensor out(Shape{b.height, b.width, image.channels()});
  for (int r = 0; r < b.height; ++r) {
    for (int c = 0; c < b.width; ++c) {
      for (int ch = 0; ch < image.channels(); ++ch) {
        out.at(r, c, ch) = image.at(b.top + r, b.left + c, ch);
      }
    }
  }
  return out;
}

}  // namespace attrcmp
