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

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "udit/core/rng.hpp"

namespace udit {

using Shape = std::vector<int>;

// Dense row-major double tensor. Value semantics; this is both the autograd
// payload and the plain matrix carrier for mels, priors, and metrics.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double value);
    static Tensor randn(Shape shape, Rng& rng);
    static Tensor from(Shape shape, std::vector<double> data);
    // 1-D convenience.
    static Tensor vec(std::initializer_list<double> v);

    const Shape& shape() const { return shape_; }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape_.size()); }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec_data() { return data_; }
    const std::vector<double>& vec_data() const { return data_; }

    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // 2-D access: row-major [rows x cols].
    double& at(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
    double at(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
    int rows() const { return shape_[0]; }
    int cols() const { return shape_[1]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;
    double min() const;
    double max() const;
    double sum() const;
    double mean() const;

    Tensor reshaped(Shape shape) const;
    Tensor transposed_2d() const;  // [r x c] -> [c x r]

    std::string shape_str() const;

private:
    Shape shape_;
    std::vector<double> data_;
};

int64_t shape_numel(const Shape& s);
std::string shape_to_string(const Shape& s);

// Elementwise helpers on plain tensors (used by the non-autograd math paths).
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, double s);
Tensor operator+(const Tensor& a, double s);

}  // namespace udit
