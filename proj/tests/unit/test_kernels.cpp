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

// The OpenMP kernels must reproduce the serial reference bit for bit at any
// thread count.

#include <gtest/gtest.h>

#include "attrcmp/kernels.hpp"
#include "attrcmp/rng.hpp"
#include "test_util.hpp"

namespace attrcmp::kernels {
namespace {

using attrcmp::testing::RandomImage;

class ThreadCounts : public ::testing::TestWithParam<int> {
 protected:
  void SetUp() override {
    saved_ = MaxThreads();
    SetThreads(GetParam());
  }
  void TearDown() override { SetThreads(saved_); }
  int saved_ = 1;
};

TEST_P(ThreadCounts, BlurMatchesSerial) {
  for (int side : {5, 32, 67}) {
    const auto img = RandomImage(Shape{side, side + 3, 3}, side);
    for (double sigma : {0.5, 1.0, 4.0, 20.0}) {
      EXPECT_EQ(GaussianBlur(img, sigma), serial::GaussianBlur(img, sigma));
    }
  }
}

TEST_P(ThreadCounts, AssignNearestMatchesSerial) {
  Rng rng(9);
  Points pts(777, std::vector<double>(27)), cents(8, std::vector<double>(27));
  for (auto& p : pts) for (double& v : p) v = rng.Uniform();
  for (auto& p : cents) for (double& v : p) v = rng.Uniform();
  cents[5] = cents[2];  // exact ties resolve to the lower id
  std::vector<int> a1, a2;
  std::vector<double> d1, d2;
  AssignNearest(pts, cents, &a1, &d1);
  serial::AssignNearest(pts, cents, &a2, &d2);
  EXPECT_EQ(a1, a2);
  EXPECT_EQ(d1, d2);
  for (int a : a1) EXPECT_NE(a, 5);
}

TEST_P(ThreadCounts, CoalitionImagesMatchSerial) {
  const auto img = RandomImage(Shape{32, 32, 3}, 1);
  const auto blurred = serial::GaussianBlur(img, 4.0);
  const std::vector<BBox> sel = {{0, 0, 8, 8}, {8, 8, 8, 8}, {24, 16, 8, 8},
                                 {16, 24, 8, 8}, {0, 24, 8, 8}};
  const auto par = CoalitionImages(img, blurred, sel);
  const auto ser = serial::CoalitionImages(img, blurred, sel);
  ASSERT_EQ(par.size(), 32u);
  EXPECT_EQ(par, ser);
  EXPECT_EQ(par[31], img);  // full coalition is the original image
}

INSTANTIATE_TEST_SUITE_P(Kernels, ThreadCounts, ::testing::Values(1, 2, 3, 8));

TEST(ReflectIndex, HalfSampleSymmetric) {
  EXPECT_EQ(ReflectIndex(0, 5), 0);
  EXPECT_EQ(ReflectIndex(4, 5), 4);
  EXPECT_EQ(ReflectIndex(-1, 5), 0);
  EXPECT_EQ(ReflectIndex(-2, 5), 1);
  EXPECT_EQ(ReflectIndex(5, 5), 4);
  EXPECT_EQ(ReflectIndex(6, 5), 3);
  EXPECT_EQ(ReflectIndex(10, 5), 0);   // periodic beyond the mirror
  EXPECT_EQ(ReflectIndex(-6, 5), 4);
  EXPECT_EQ(ReflectIndex(-3, 1), 0);
}

TEST(SquaredDistance, Basic) {
  const std::vector<double> a = {1, 2, 3}, b = {4, 6, 3};
  EXPECT_DOUBLE_EQ(SquaredDistance(a, b), 25.0);
}

}  // namespace
}  // namespace attrcmp::kernels
