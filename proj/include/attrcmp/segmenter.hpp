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

#ifndef ATTRCMP_SEGMENTER_HPP_
#define ATTRCMP_SEGMENTER_HPP_

#include <compare>
#include <span>
#include <string>
#include <vector>

#include "attrcmp/tensor.hpp"

namespace attrcmp {

struct BBox {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  bool Contains(int row, int col) const {
    return row >= top && row < top + height && col >= left &&
           col < left + width;
  }
  long area() const { return static_cast<long>(height) * width; }
  auto operator<=>(const BBox&) const = default;
};

// One cell of the grid partition of an image.
struct SegmentRef {
  std::string image_id;
  int row = 0;
  int col = 0;
  BBox bbox;

  auto operator<=>(const SegmentRef&) const = default;
};

// Row-major grid. Cells are floor(height / grid_rows) tall (likewise for
// width); the remainder goes to the last row / column.
std::vector<SegmentRef> GridSegments(int height, int width, int grid_rows = 4,
                                     int grid_cols = 4,
                                     const std::string& image_id = "");

// Default blur strength: half the larger cell edge.
double AutoSigma(int height, int width, int grid_rows, int grid_cols);

// Blurs the whole image (separable Gaussian, radius ceil(3 sigma), reflect
// padding) and takes excluded-cell pixels from the blurred copy.
ImageTensor BlurExclude(const ImageTensor& image,
                        std::span<const SegmentRef> excluded, double sigma);

ImageTensor CropSegment(const ImageTensor& image, const SegmentRef& seg);

// Throws InputError if the bbox does not fit inside the image.
void CheckSegmentFits(const ImageTensor& image, const SegmentRef& seg);

}  // namespace attrcmp

#endif  // ATTRCMP_SEGMENTER_HPP_
