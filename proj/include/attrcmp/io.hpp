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

#ifndef ATTRCMP_IO_HPP_
#define ATTRCMP_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attrcmp/tensor.hpp"
#include "json.hpp"

namespace attrcmp::io {

// 8-bit PNG (gray, gray+alpha, RGB or RGBA) -> [0,1] floats. Alpha is dropped.
ImageTensor ReadPng(const std::filesystem::path& path);
// Returns the shape without decoding pixel data.
Shape ReadPngShape(const std::filesystem::path& path);

// Quantizes to 8 bits (round to nearest). Channels must be 1 or 3.
std::vector<std::uint8_t> EncodePng(const ImageTensor& image);
void WritePng(const std::filesystem::path& path, const ImageTensor& image);

std::string Base64(std::span<const std::uint8_t> bytes);

// Lower-case hex SHA-256.
std::string Sha256Hex(std::span<const std::uint8_t> bytes);
std::string Sha256Hex(std::string_view text);
std::string ImageDigest(const ImageTensor& image);

std::string ReadText(const std::filesystem::path& path);
// Writes through a temporary sibling and renames, so readers never observe a
// partially written file.
void WriteTextAtomic(const std::filesystem::path& path, std::string_view text);

nlohmann::json ReadJson(const std::filesystem::path& path);
void WriteJson(const std::filesystem::path& path, const nlohmann::json& doc);

// Stable text form used for fingerprints and on-disk artifacts.
std::string CanonicalDump(const nlohmann::json& doc);

}  // namespace attrcmp::io

#endif  // ATTRCMP_IO_HPP_
