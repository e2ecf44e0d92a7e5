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

#include "attrcmp/io.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "attrcmp/error.hpp"

namespace attrcmp {

std::string Shape::ToString() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" +
         std::to_string(channels);
}

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInput: return "input error";
    case ErrorKind::kCapability: return "capability error";
    case ErrorKind::kGateway: return "gateway error";
    case ErrorKind::kIngestion: return "ingestion error";
    case ErrorKind::kResource: return "resource error";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

void CheckUnitRange(const ImageTensor& image) {
  for (float v : image.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw InputError("image value " + std::to_string(v) +
                       " outside [0,1]");
    }
  }
}

namespace io {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr OpenOrThrow(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

[[noreturn]] void PngError(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what != nullptr) *what = msg;
  png_longjmp(png, 1);
}

void PngWarning(png_structp, png_const_charp) {}

// Decodes header (and optionally pixels). libpng reports errors via longjmp,
// so no C++ objects with destructors may live between setjmp and the calls.
bool DecodePng(std::FILE* file, bool with_pixels, Shape* shape,
               std::vector<std::uint8_t>* pixels, std::string* error) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, error,
                                           PngError, PngWarning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, file);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);
  const int channels = png_get_channels(png, info);
  shape->height = static_cast<int>(height);
  shape->width = static_cast<int>(width);
  shape->channels = channels;
  if (with_pixels) {
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    pixels->resize(row_bytes * height);
    for (png_uint_32 r = 0; r < height; ++r) {
      png_read_row(png, pixels->data() + r * row_bytes, nullptr);
    }
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

void AppendBytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void FlushNothing(png_structp) {}

bool EncodePngRaw(const std::vector<std::uint8_t>& rows, const Shape& shape,
                  std::vector<std::uint8_t>* out, std::string* error) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, error,
                                            PngError, PngWarning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, AppendBytes, FlushNothing);
  png_set_IHDR(png, info, shape.width, shape.height, 8,
               shape.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 9);
  png_write_info(png, info);
  const std::size_t row_bytes =
      static_cast<std::size_t>(shape.width) * shape.channels;
  for (int r = 0; r < shape.height; ++r) {
    png_write_row(png, const_cast<png_bytep>(rows.data() + r * row_bytes));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

Shape ReadPngShape(const std::filesystem::path& path) {
  FilePtr file = OpenOrThrow(path, "rb");
  Shape shape;
  std::string error;
  if (!DecodePng(file.get(), false, &shape, nullptr, &error)) {
    throw IoError("unreadable PNG " + path.string() + ": " + error);
  }
  return shape;
}

ImageTensor ReadPng(const std::filesystem::path& path) {
  FilePtr file = OpenOrThrow(path, "rb");
  Shape shape;
  std::vector<std::uint8_t> pixels;
  std::string error;
  if (!DecodePng(file.get(), true, &shape, &pixels, &error)) {
    throw IoError("unreadable PNG " + path.string() + ": " + error);
  }
  std::vector<float> data(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    data[i] = static_cast<float>(pixels[i]) / 255.0f;
  }
  return ImageTensor(shape, std::move(data));
}

std::vector<std::uint8_t> EncodePng(const ImageTensor& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw InputError("PNG export supports 1 or 3 channels, got " +
                     std::to_string(image.channels()));
  }
  std::vector<std::uint8_t> rows(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const float v = std::clamp(image.data()[i], 0.0f, 1.0f);
    rows[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  std::vector<std::uint8_t> out;
  std::string error;
  if (!EncodePngRaw(rows, image.shape(), &out, &error)) {
    throw IoError("PNG encoding failed: " + error);
  }
  return out;
}

void WritePng(const std::filesystem::path& path, const ImageTensor& image) {
  const auto bytes = EncodePng(image);
  WriteTextAtomic(path, std::string_view(
                            reinterpret_cast<const char*>(bytes.data()),
                            bytes.size()));
}

std::string Base64(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string Sha256Hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(bytes.data(), bytes.size(), digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::string Sha256Hex(std::string_view text) {
  return Sha256Hex(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string ImageDigest(const ImageTensor& image) {
  std::string buffer = image.shape().ToString() + ":";
  const auto* raw = reinterpret_cast<const char*>(image.data().data());
  buffer.append(raw, image.size() * sizeof(float));
  return Sha256Hex(buffer);
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextAtomic(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory " +
                    path.parent_path().string() + ": " + ec.message());
    }
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename onto " + path.string());
}

nlohmann::json ReadJson(const std::filesystem::path& path) {
  const std::string text = ReadText(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void WriteJson(const std::filesystem::path& path, const nlohmann::json& doc) {
  WriteTextAtomic(path, CanonicalDump(doc) + "\n");
}

std::string CanonicalDump(const nlohmann::json& doc) { return doc.dump(1); }

}  // namespace io
}  // namespace attrcmp
