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
#include <cstdint>
#include <random>
#include <string>

namespace udit {

// Deterministic random source. All stochastic operations take an explicit
// Rng so runs are pure functions of (inputs, seed). normal() is a cache-free
// Box-Muller: the full state is just the engine state, which serializes
// cleanly into checkpoints.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {}

    // Uniform in [0, 1).
    double uniform() { return std::generate_canonical<double, 53>(engine_); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the companion value is discarded so no
    // hidden cache survives between calls.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Uniform integer in [0, n).
    uint64_t integer(uint64_t n) {
        std::uniform_int_distribution<uint64_t> d(0, n - 1);
        return d(engine_);
    }

    std::string serialize() const;
    void deserialize(const std::string& s);

private:
    std::mt19937_64 engine_;
};

// Mixes a stream id into a seed (splitmix64 finalizer). Used to give each
// synthesis segment its own independent deterministic stream.
uint64_t derive_seed(uint64_t seed, uint64_t stream);

}  // namespace udit
