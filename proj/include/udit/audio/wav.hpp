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
#include <vector>

namespace udit::audio {

inline constexpr int kSampleRate = 22050;

// Mono amplitude signal in [-1, 1].
struct Waveform {
    std::vector<double> samples;
    int sample_rate = kSampleRate;

    double duration_seconds() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

// Reads a RIFF/WAVE file (16-bit PCM or 32-bit IEEE float), downmixes to
// mono, normalizes to [-1, 1], and resamples to 22050 Hz if needed.
Waveform load_wav(const std::string& path);

// Writes mono 16-bit PCM.
void save_wav(const std::string& path, const Waveform& w);

// Windowed-sinc resampler; output length = round(len * sr_out / sr_in).
std::vector<double> resample(const std::vector<double>& x, int sr_in, int sr_out);

}  // namespace udit::audio
