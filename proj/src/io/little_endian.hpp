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

// Byte-level little-endian encode/decode used by the binary matrix and
// checkpoint writers. Explicit byte shuffling keeps the on-disk layout
// identical regardless of host endianness.

#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace udit::io::detail {

inline void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(os, bits);
}

inline void put_f32(std::ostream& os, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(os, bits);
}

inline uint32_t get_u32(std::istream& is, const std::string& what) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is)
        throw std::runtime_error("truncated file while reading " + what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

inline uint64_t get_u64(std::istream& is, const std::string& what) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is)
        throw std::runtime_error("truncated file while reading " + what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& is, const std::string& what) {
    const uint64_t bits = get_u64(is, what);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

inline float get_f32(std::istream& is, const std::string& what) {
    const uint32_t bits = get_u32(is, what);
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace udit::io::detail
