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

#ifndef ATTRCMP_ERROR_HPP_
#define ATTRCMP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace attrcmp {

enum class ErrorKind {
  kInput,
  kCapability,
  kGateway,
  kIngestion,
  kResource,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Bad argument, shape mismatch, unknown class name.
class InputError : public Error {
 public:
  explicit InputError(const std::string& m) : Error(ErrorKind::kInput, m) {}
};

// Model lacks a requested capability (gradient, embedding).
class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& m)
      : Error(ErrorKind::kCapability, m) {}
};

// Remote adapter failure; message carries the protocol response.
class GatewayError : public Error {
 public:
  explicit GatewayError(const std::string& m) : Error(ErrorKind::kGateway, m) {}
};

// Manifest or image ingestion failure naming the offending entry.
class IngestionError : public Error {
 public:
  explicit IngestionError(const std::string& m)
      : Error(ErrorKind::kIngestion, m) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& m)
      : Error(ErrorKind::kResource, m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error(ErrorKind::kIo, m) {}
};

}  // namespace attrcmp

#endif  // ATTRCMP_ERROR_HPP_
