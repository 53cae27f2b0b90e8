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
#include <string>
#include <vector>

#include "udit/audio/mel.hpp"
#include "udit/core/tensor.hpp"
#include "udit/diffusion/sampler.hpp"
#include "udit/nn/model.hpp"
#include "udit/text/lexicon.hpp"

namespace udit::infer {

struct SynthesisConfig {
    int n_steps = 80;
    double tau = 1.5;
    int frame_budget = 256;
    uint64_t seed = 0;
    double duration_scale = 1.0;
    int griffin_lim_iters = 60;
};
void validate(const SynthesisConfig& cfg);

// Predicted frame count for one token: round-half-up of
// exp(log_d) * scale, floored at one frame so every token is voiced.
int frames_from_log_duration(double log_d, double scale);

// Right-pads a frame-major prior [n_frames x n_mels] to the budget with a
// fixed row (the dataset mel mean, a stand-in for silence) and records how
// many frames are real so the sampled mel can be cropped back.
struct PaddedPrior {
    Tensor mu;  // [budget x n_mels]
    int real_frames = 0;
};
PaddedPrior pad_to_budget(const Tensor& mu_frames, int budget,
                          const Tensor& pad_row);

// Deterministic per-token frame counts for a segment (dropout off).
std::vector<int> predict_durations(const nn::UDitModel& model,
                                   const std::vector<int>& token_ids,
                                   double duration_scale);

struct SegmentSynthesis {
    text::PhonemeSequence phonemes;
    std::vector<int> durations;  // frames per token; mel has their sum
    Tensor mel;                  // [n_mels x real_frames], already cropped
};

struct SynthesisResult {
    audio::Waveform wav;
    std::vector<SegmentSynthesis> segments;
    int total_frames = 0;  // sum of every duration across segments
};

// Mel for one prepared segment: expand the prior by the given durations,
// pad to the budget, run the reverse ODE, crop to the real frames. The
// segment seed fixes the whole draw.
SegmentSynthesis synthesize_segment(const nn::UDitModel& model,
                                    const text::PhonemeSequence& segment,
                                    const std::vector<int>& durations,
                                    const SynthesisConfig& cfg,
                                    const diffusion::NoiseSchedule& sched,
                                    const Tensor& mel_mean_row,
                                    uint64_t segment_seed);

// End-to-end synthesis: text -> phonemes -> 22..25-token segments ->
// durations -> frame prior -> reverse ODE mel -> Griffin-Lim waveform,
// segments concatenated in order. Each segment draws from its own stream
// derived from (seed, segment index), so the result is deterministic and
// segments could be rendered concurrently. A segment whose predicted frames
// exceed the budget is split in half and retried once.
SynthesisResult synthesize(const nn::UDitModel& model,
                           const text::Lexicon& lexicon, const std::string& text,
                           const SynthesisConfig& cfg,
                           const diffusion::NoiseSchedule& sched,
                           const audio::MelConfig& mel_cfg,
                           const Tensor& mel_mean_row);

}  // namespace udit::infer
