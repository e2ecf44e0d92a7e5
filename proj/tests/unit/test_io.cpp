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

#include "attrcmp/io.hpp"
#include "test_util.hpp"

namespace attrcmp {
namespace {

using testing::TempDir;

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(io::Sha256Hex(std::string_view("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(io::Sha256Hex(std::string_view("")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Io, Base64KnownVectors) {
  auto b64 = [](std::string s) {
    return io::Base64(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  EXPECT_EQ(b64(""), "");
  EXPECT_EQ(b64("f"), "Zg==");
  EXPECT_EQ(b64("fo"), "Zm8=");
  EXPECT_EQ(b64("foobar"), "Zm9vYmFy");
}

TEST(Io, PngRoundTripIsExactOnEightBitGrid) {
  TempDir dir("png");
  ImageTensor img(Shape{5, 7, 3});
  for (std::size_t i = 0; i < img.size(); ++i) {
    img.values()[i] = static_cast<float>(i % 256) / 255.0f;
  }
  io::WritePng(dir / "a.png", img);
  const auto back = io::ReadPng(dir / "a.png");
  EXPECT_EQ(back.shape(), img.shape());
  for (std::size_t i = 0; i < img.size(); ++i) {
    ASSERT_EQ(back.values()[i], img.values()[i]) << i;
  }
  EXPECT_EQ(io::ReadPngShape(dir / "a.png"), img.shape());
}

TEST(Io, PngGrayscale) {
  TempDir dir("png1");
  ImageTensor img(Shape{3, 2, 1}, 0.5f);
  io::WritePng(dir / "g.png", img);
  const auto back = io::ReadPng(dir / "g.png");
  EXPECT_EQ(back.channels(), 1);
  EXPECT_NEAR(back.at(2, 1, 0), 128.0 / 255.0, 1e-7);
}

TEST(Io, UnreadablePngIsIoError) {
  TempDir dir("png2");
  std::ofstream(dir / "bad.png") << "not a png";
  EXPECT_THROW(io::ReadPng(dir / "bad.png"), Error);
  EXPECT_THROW(io::ReadPng(dir / "missing.png"), Error);
}

TEST(Io, AtomicWriteCreatesParents) {
  TempDir dir("txt");
  const auto p = dir / "x/y/z.txt";
  io::WriteTextAtomic(p, "hello");
  EXPECT_EQ(io::ReadText(p), "hello");
  io::WriteTextAtomic(p, "bye");
  EXPECT_EQ(io::ReadText(p), "bye");
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(p.parent_path())) {
    (void)e;
    ++files;
  }
  EXPECT_EQ(files, 1);  // no temporaries left behind
}

TEST(Io, ImageDigestSeesShapeAndValues) {
  ImageTensor a(Shape{2, 3, 1}, 0.25f);
  ImageTensor b(Shape{3, 2, 1}, 0.25f);
  ImageTensor c = a;
  c.values()[4] = 0.5f;
  EXPECT_NE(io::ImageDigest(a), io::ImageDigest(b));
  EXPECT_NE(io::ImageDigest(a), io::ImageDigest(c));
  EXPECT_EQ(io::ImageDigest(a), io::ImageDigest(ImageTensor(a)));
}

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(ImageTensor(Shape{0, 3, 3}), InputError);
  EXPECT_THROW(ImageTensor(Shape{2, 2, 1}, std::vector<float>(3)), InputError);
}

}  // namespace
}  // namespace attrcmp
