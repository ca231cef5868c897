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

#include "spikeopt/error.hpp"

namespace spikeopt {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::IndegreeViolation: return "IndegreeViolation";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::WidthMismatch: return "WidthMismatch";
    case Errc::InvalidGraph: return "InvalidGraph";
    case Errc::NumericError: return "NumericError";
    case Errc::InputRangeError: return "InputRangeError";
    case Errc::BadMagic: return "BadMagic";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::Exhausted: return "Exhausted";
    case Errc::RangeError: return "RangeError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::ObjectiveFailure: return "ObjectiveFailure";
    case Errc::SpaceExhausted: return "SpaceExhausted";
    case Errc::IoError: return "IoError";
    case Errc::Internal: return "Internal";
  }
  return "Unknown";
}

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::RangeError:
    case Errc::ConfigError:
    case Errc::DuplicateName:
    case Errc::IndegreeViolation:
    case Errc::UnknownNode:
    case Errc::WidthMismatch:
    case Errc::InvalidGraph:
    case Errc::InputRangeError:
    case Errc::Exhausted:
    case Errc::InsufficientData:
    case Errc::SpaceExhausted:
      return 2;
    case Errc::BadMagic:
    case Errc::CountMismatch:
    case Errc::TruncatedFile:
    case Errc::IoError:
      return 3;
    case Errc::NumericError:
    case Errc::ObjectiveFailure:
    case Errc::Internal:
      return 4;
  }
  return 4;
}

}  // namespace spikeopt
