// Copyright 2026 The bdlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BDLAB_ERRORS_H_
#define BDLAB_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace bdlab {

enum class ErrorCode {
  kParse,      // malformed input row or file
  kLabel,      // label not in the label space
  kEmpty,      // degenerate empty input
  kSize,       // requested size exceeds what is available
  kIo,         // filesystem failure
  kFormat,     // corrupted serialized artifact
  kVersion,    // serialized artifact from an unsupported version
  kDomain,     // argument outside the mathematical domain
  kContract,   // caller violated an operation precondition
  kLookup,     // missing key in a lookup table
  kTransport,  // external HTTP service failure
  kConfig,     // invalid run configuration
};

std::string_view ErrorCodeName(ErrorCode code);

// Single exception type for the library; callers branch on code().
class LabError : public std::runtime_error {
 public:
  LabError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bdlab

#endif  // BDLAB_ERRORS_H_
