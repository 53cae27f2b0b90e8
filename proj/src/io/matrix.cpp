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

#include "udit/io/matrix.hpp"

#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "udit/core/check.hpp"
#include "little_endian.hpp"

namespace udit::io {

namespace {
constexpr char kMagic[4] = {'U', 'D', 'M', 'X'};
}  // namespace

void save_matrix(const std::string& path, const Tensor& m, int elem_width) {
    check_arg(m.ndim() == 2, "save_matrix: tensor must be 2-D, got shape " +
                                 m.shape_str());
    check_arg(elem_width == 4 || elem_width == 8,
              "save_matrix: element width must be 4 or 8, got " +
                  std::to_string(elem_width));
    const int64_t rows = m.rows();
    const int64_t cols = m.cols();
    check_arg(rows <= std::numeric_limits<uint32_t>::max() &&
                  cols <= std::numeric_limits<uint32_t>::max(),
              "save_matrix: dimensions exceed the uint32 header range");

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_matrix: cannot open " + path +
                                 " for writing");
    os.write(kMagic, 4);
    detail::put_u32(os, static_cast<uint32_t>(rows));
    detail::put_u32(os, static_cast<uint32_t>(cols));
    detail::put_u32(os, static_cast<uint32_t>(elem_width));
    for (double v : m.vec_data()) {
        if (elem_width == 8)
            detail::put_f64(os, v);
        else
            detail::put_f32(os, static_cast<float>(v));
    }
    if (!os)
        throw std::runtime_error("save_matrix: write failed for " + path);
}

Tensor load_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("load_matrix: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || magic[0] != kMagic[0] || magic[1] != kMagic[1] ||
        magic[2] != kMagic[2] || magic[3] != kMagic[3])
        throw std::runtime_error("load_matrix: " + path +
                                 " is not a portable matrix file (bad magic)");
    const uint32_t rows = detail::get_u32(is, "matrix rows");
    const uint32_t cols = detail::get_u32(is, "matrix cols");
    const uint32_t width = detail::get_u32(is, "matrix element width");
    if (width != 4 && width != 8)
        throw std::runtime_error("load_matrix: unsupported element width " +
                                 std::to_string(width) + " in " + path);
    if (rows == 0 || cols == 0)
        throw std::runtime_error("load_matrix: empty matrix in " + path);

    Tensor out = Tensor::zeros({static_cast<int>(rows), static_cast<int>(cols)});
    double* p = out.data();
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) {
        p[i] = (width == 8)
                   ? detail::get_f64(is, "matrix payload")
                   : static_cast<double>(detail::get_f32(is, "matrix payload"));
    }
    is.peek();
    if (!is.eof())
        throw std::runtime_error("load_matrix: trailing bytes after payload in " +
                                 path);
    return out;
}

}  // namespace udit::io
