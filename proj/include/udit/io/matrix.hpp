// Copyright 2026 The udit-tts Authors
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

#pragma once

#include <string>

#include "udit/core/tensor.hpp"

namespace udit::io {

// Portable binary matrix file. Layout:
//   bytes  0..3   magic "UDMX"
//   bytes  4..7   uint32 LE  rows
//   bytes  8..11  uint32 LE  cols
//   bytes 12..15  uint32 LE  element width in bytes (8 = float64, 4 = float32)
//   then rows*cols elements, row-major, little-endian IEEE-754.
// Used for mel dumps, cached features, and externally supplied embedding or
// posterior matrices.

// Writes a 2-D tensor. elem_width 4 stores float32 (lossy); 8 is exact.
void save_matrix(const std::string& path, const Tensor& m, int elem_width = 8);

// Reads a matrix back as a [rows x cols] float64 tensor.
Tensor load_matrix(const std::string& path);

}  // namespace udit::io
