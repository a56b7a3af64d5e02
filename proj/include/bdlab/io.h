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

#ifndef BDLAB_IO_H_
#define BDLAB_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace bdlab {

// Writes to "<path>.tmp" then renames over `path`. Throws LabError(kIo).
void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents);

// Throws LabError(kIo) if the file cannot be opened.
std::string ReadFile(const std::filesystem::path& path);

}  // namespace bdlab

#endif  // BDLAB_IO_H_
