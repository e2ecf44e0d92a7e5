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

#include <cmath>

#include "attrcmp/kernels.hpp"
#include "attrcmp/segmenter.hpp"
#include "test_util.hpp"

namespace attrcmp {
namespace {

using testing::RandomImage;

TEST(Grid, EvenSplit) {
  const auto segs = GridSegments(64, 64, 4, 4, "x");
  ASSERT_EQ(segs.size(), 16u);
  for (int i = 0; i < 16; ++i) {
    EXPECT_EQ(segs[i].image_id, "x");
    EXPECT_EQ(segs[i].row, i / 4);
    EXPECT_EQ(segs[i].col, i % 4);
    EXPECT_EQ(segs[i].bbox, (BBox{16 * (i / 4), 16 * (i % 4), 16, 16}));
  }
}

TEST(Grid, RemainderGoesToLastRowAndColumn) {
  const auto segs = GridSegments(10, 10);
  ASSERT_EQ(segs.size(), 16u);
  const int expect[4] = {2, 2, 2, 4};
  for (const auto& s : segs) {
    EXPECT_EQ(s.bbox.height, expect[s.row]);
    EXPECT_EQ(s.bbox.width, expect[s.col]);
    EXPECT_EQ(s.bbox.top, 2 * s.row);
    EXPECT_EQ(s.bbox.left, 2 * s.col);
  }
}

TEST(Grid, CoversImageExactlyOnce) {
  for (auto [h, w] : {std::pair{4, 4}, {10, 13}, {33, 31}, {64, 7}}) {
    std::vector<int> hits(h * w, 0);
    for (const auto& s : GridSegments(h, w)) {
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) hits[r * w + c] += s.bbox.Contains(r, c);
      }
    }
    for (int v : hits) ASSERT_EQ(v, 1) << h << "x" << w;
  }
  for (const auto& s : GridSegments(4, 4)) EXPECT_EQ(s.bbox.area(), 1);
}

TEST(Grid, TooSmall) {
  EXPECT_THROW(GridSegments(3, 8), InputError);
  EXPECT_THROW(GridSegments(8, 8, 0, 4), InputError);
}

TEST(Blur, KernelWeightsForUnitSigma) {
  const auto k = kernels::GaussianKernel(1.0);
  ASSERT_EQ(k.size(), 7u);
  // exp(-d^2 / 2) / sum, quoted to five decimals.
  const double want[7] = {0.00443, 0.05400, 0.24204, 0.39905,
                          0.24204, 0.05400, 0.00443};
  double norm = 0.0;
  for (int d = -3; d <= 3; ++d) norm += std::exp(-0.5 * d * d);
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    EXPECT_NEAR(k[i], want[i], 1e-5);
    EXPECT_NEAR(k[i], std::exp(-0.5 * (i - 3) * (i - 3)) / norm, 1e-15);
    sum += k[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(Blur, ConstantImageStaysConstant) {
  ImageTensor img(Shape{12, 9, 3}, 0.625f);
  const auto segs = GridSegments(12, 9);
  const auto out = BlurExclude(img, segs, 2.5);
  for (float v : out.values()) EXPECT_NEAR(v, 0.625f, 1e-6);
}

TEST(Blur, EmptyExclusionIsIdentity) {
  const auto img = RandomImage(Shape{16, 16, 3}, 3);
  EXPECT_EQ(BlurExclude(img, {}, 2.0), img);
}

TEST(Blur, OnlyExcludedCellsChange) {
  const auto img = RandomImage(Shape{16, 16, 3}, 4);
  const auto segs = GridSegments(16, 16);
  const std::vector<SegmentRef> ex = {segs[5], segs[10]};
  const auto out = BlurExclude(img, ex, 2.0);
  const auto blurred = kernels::GaussianBlur(img, 2.0);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      const bool in = segs[5].bbox.Contains(r, c) || segs[10].bbox.Contains(r, c);
      for (int ch = 0; ch < 3; ++ch) {
        if (in) {
          EXPECT_EQ(out.at(r, c, ch), static_cast<float>(blurred.at(r, c, ch)));
        } else {
          EXPECT_EQ(out.at(r, c, ch), img.at(r, c, ch));
        }
      }
    }
  }
}

TEST(Blur, ForeignSegmentRejected) {
  const auto img = RandomImage(Shape{8, 8, 3}, 5);
  const auto big = GridSegments(16, 16);
  EXPECT_THROW(BlurExclude(img, std::vector<SegmentRef>{big[15]}, 1.0),
               InputError);
  EXPECT_THROW(BlurExclude(img, std::vector<SegmentRef>{}, 0.0), InputError);
}

TEST(Crop, MatchesSourcePixels) {
  const auto img = RandomImage(Shape{10, 10, 3}, 6);
  for (const auto& s : GridSegments(10, 10)) {
    const auto crop = CropSegment(img, s);
    ASSERT_EQ(crop.shape(), (Shape{s.bbox.height, s.bbox.width, 3}));
    for (int r = 0; r < s.bbox.height; ++r) {
      for (int c = 0; c < s.bbox.width; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
          EXPECT_EQ(crop.at(r, c, ch),
                    img.at(s.bbox.top + r, s.bbox.left + c, ch));
        }
      }
    }
  }
}

TEST(AutoSigma, HalfTheCellEdge) {
  EXPECT_DOUBLE_EQ(AutoSigma(64, 64, 4, 4), 8.0);
  EXPECT_DOUBLE_EQ(AutoSigma(32, 48, 4, 4), 6.0);
}

}  // namespace
}  // namespace attrcmp
