/*
 * Copyright 2026 The spikeopt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace spikeopt {

/// Failure categories. The numeric grouping (config / io / internal) is what
/// the C API and the CLI exit codes are derived from.
enum class Errc {
  // graph construction and execution
  DuplicateName,
  IndegreeViolation,
  UnknownNode,
  WidthMismatch,
  InvalidGraph,
  // numerics
  NumericError,
  InputRangeError,
  // datasets
  BadMagic,
  CountMismatch,
  TruncatedFile,
  Exhausted,
  // configuration
  RangeError,
  ConfigError,
  // search
  InsufficientData,
  ObjectiveFailure,
  SpaceExhausted,
  // everything touching the filesystem
  IoError,
  Internal,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Process exit code for an error category: 2 config, 3 I/O, 4 internal.
int exit_code_for(Errc code) noexcept;

}  // namespace spikeopt
