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

#include <cmath>
#include <complex>
#include <vector>

#include "udit/core/check.hpp"

namespace udit::audio {

inline constexpr double kPi = 3.14159265358979323846;

// In-place iterative radix-2 FFT. Size must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    check_arg(n > 0 && (n & (n - 1)) == 0, "fft: size must be a power of 2");
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& z : a) z /= static_cast<double>(n);
}

// Real-input FFT: returns the one-sided spectrum of n/2 + 1 bins.
inline std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
    std::vector<std::complex<double>> a(x.begin(), x.end());
    fft_inplace(a, false);
    a.resize(x.size() / 2 + 1);
    return a;
}

// Inverse of rfft for a real signal of length n (power of two).
inline std::vector<double> irfft(const std::vector<std::complex<double>>& sp, int n) {
    check_arg(static_cast<int>(sp.size()) == n / 2 + 1, "irfft: spectrum size != n/2+1");
    std::vector<std::complex<double>> a(static_cast<size_t>(n));
    for (int k = 0; k <= n / 2; ++k) a[static_cast<size_t>(k)] = sp[static_cast<size_t>(k)];
    for (int k = 1; k < n / 2; ++k)
        a[static_cast<size_t>(n - k)] = std::conj(sp[static_cast<size_t>(k)]);
    fft_inplace(a, true);
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = a[static_cast<size_t>(i)].real();
    return out;
}

}  // namespace udit::audio
