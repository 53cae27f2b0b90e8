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

#include "udit/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "udit/core/check.hpp"

namespace udit {

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

std::string shape_to_string(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    for (int d : shape_) check_arg(d > 0, "Tensor: non-positive dimension");
    data_.assign(static_cast<size_t>(shape_numel(shape_)), 0.0);
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor Tensor::randn(Shape shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data_) v = rng.normal();
    return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> data) {
    check_arg(shape_numel(shape) == static_cast<int64_t>(data.size()),
              "Tensor::from: data size does not match shape");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    return t;
}

Tensor Tensor::vec(std::initializer_list<double> v) {
    return from({static_cast<int>(v.size())}, std::vector<double>(v));
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double Tensor::min() const {
    check_arg(!data_.empty(), "Tensor::min on empty tensor");
    return *std::min_element(data_.begin(), data_.end());
}

double Tensor::max() const {
    check_arg(!data_.empty(), "Tensor::max on empty tensor");
    return *std::max_element(data_.begin(), data_.end());
}

double Tensor::sum() const {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

double Tensor::mean() const {
    check_arg(!data_.empty(), "Tensor::mean on empty tensor");
    return sum() / static_cast<double>(data_.size());
}

Tensor Tensor::reshaped(Shape shape) const {
    check_arg(shape_numel(shape) == numel(), "Tensor::reshaped: element count mismatch");
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
}

Tensor Tensor::transposed_2d() const {
    check_arg(ndim() == 2, "transposed_2d requires a 2-D tensor");
    Tensor out(Shape{shape_[1], shape_[0]});
    for (int r = 0; r < shape_[0]; ++r)
        for (int c = 0; c < shape_[1]; ++c) out.at(c, r) = at(r, c);
    return out;
}

std::string Tensor::shape_str() const { return shape_to_string(shape_); }

static void check_same(const Tensor& a, const Tensor& b, const char* op) {
    check_arg(a.same_shape(b), std::string(op) + ": shape mismatch " +
                                   a.shape_str() + " vs " + b.shape_str());
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    check_same(a, b, "tensor add");
    Tensor out = a;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] += b[i];
    return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    check_same(a, b, "tensor sub");
    Tensor out = a;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] -= b[i];
    return out;
}

Tensor operator*(const Tensor& a, const Tensor& b) {
    check_same(a, b, "tensor mul");
    Tensor out = a;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= b[i];
    return out;
}

Tensor operator*(const Tensor& a, double s) {
    Tensor out = a;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] *= s;
    return out;
}

Tensor operator+(const Tensor& a, double s) {
    Tensor out = a;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] += s;
    return out;
}

}  // namespace udit
