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

#include "udit/audio/mel.hpp"
#include "udit/audio/wav.hpp"
#include "udit/core/tensor.hpp"

namespace udit::eval {

// Log-spectral distance in dB. Both signals are resampled to 16 kHz,
// analyzed with a magnitude STFT (win 1024, hop 256), truncated to the
// common frame count, and compared as
//   mean over frames of sqrt(mean over bins of (20 log10(|S_ref|/|S_gen|))^2)
// with magnitudes clamped at 1e-8 before the log. Throws if either signal is
// shorter than one analysis window after resampling.
double lsd(const audio::Waveform& ref, const audio::Waveform& gen);

// A set of per-clip embedding vectors, one per row.
struct EmbeddingSet {
    Tensor vectors;          // [n_samples x d]
    std::string provenance;  // e.g. "mel-stats", "external-file"
};
void validate(const EmbeddingSet& set);

// Frechet distance between Gaussian fits of two embedding sets:
//   ||m_a - m_b||^2 + tr(C_a + C_b - 2 (C_a C_b)^{1/2}).
// Covariances are the unbiased sample estimates with a fixed 1e-6 diagonal
// ridge (applied to both sides, so equal sets still score zero). The product
// square root is evaluated through the symmetric form
// (C_b^{1/2} C_a C_b^{1/2})^{1/2} with eigenvalues floored at zero, averaged
// over both argument orders so the result is exactly symmetric; tiny
// negative totals from rounding clamp to zero.
double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b);

// KL divergence (nats) between discrete distributions on the same support:
// sum p_i ln(p_i / q_i). Inputs off normalization by less than 1e-6 are
// renormalized; both are smoothed by 1e-10 so the ratio is always defined.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q);

// Built-in embedding provider: per-band mean and standard deviation of a
// log-mel clip, concatenated to a 2 * n_mels vector (population std, so
// single-frame clips embed cleanly).
Tensor mel_stats_embedding(const audio::MelSpectrogram& m);
EmbeddingSet make_mel_stats_set(const std::vector<audio::MelSpectrogram>& clips);

}  // namespace udit::eval
