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

#include <cstdint>
#include <vector>

#include "udit/audio/wav.hpp"
#include "udit/core/tensor.hpp"

namespace udit::audio {

struct MelConfig {
    int n_mels = 80;
    int win_length = 1024;
    int hop_length = 256;
    int fft_size = 1024;
    double fmin = 0.0;
    double fmax = 8000.0;
    double log_floor = 1e-5;  // linear-amplitude clamp applied before log
};

// Throws std::invalid_argument if the config violates its constraints
// (hop <= win <= fft, n_mels < fft/2 + 1, power-of-two fft, sane band edges).
void validate(const MelConfig& cfg);

// Natural-log amplitude mel spectrogram, values [n_mels x n_frames].
struct MelSpectrogram {
    Tensor values;
    MelConfig config;

    int n_frames() const { return values.cols(); }
};

// Triangular filterbank on the Slaney mel scale with Slaney area
// normalization; shape [n_mels x fft_size/2 + 1].
Tensor mel_filterbank(const MelConfig& cfg, int sample_rate);

// Center frequency (Hz) of each mel band; the oracle for peak-bin tests.
std::vector<double> mel_center_frequencies(const MelConfig& cfg);

// Magnitude STFT with center reflect padding and a periodic Hann window of
// win taps centered in the fft frame: [fft/2 + 1 x n_frames] with
// n_frames = floor(len/hop) + 1. The shared front end of mel extraction and
// the spectral-distance metric.
Tensor magnitude_stft(const std::vector<double>& samples, int win, int hop,
                      int fft);

// magnitude_stft -> filterbank -> clamp at log_floor -> natural log.
MelSpectrogram compute_mel(const Waveform& w, const MelConfig& cfg);

// Griffin-Lim against the pseudo-inverse of the filterbank; the vocoder
// substitute. Deterministic given phase_seed. Output length
// (n_frames - 1) * hop_length.
Waveform invert_mel(const MelSpectrogram& m, int n_iters = 60, uint64_t phase_seed = 0);

}  // namespace udit::audio
