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
#include <memory>
#include <vector>

#include "udit/nn/decoder.hpp"
#include "udit/nn/text_encoder.hpp"

namespace udit::nn {

struct ModelConfig {
    TextEncoderConfig encoder;
    DurationPredictorConfig duration;
    DecoderConfig decoder;
};
void validate(const ModelConfig& cfg);

// The full acoustic model: text encoder, duration predictor, and the U-DiT
// score decoder, sharing one parameter store. Construction is deterministic
// given init_seed.
class UDitModel {
public:
    UDitModel(const ModelConfig& cfg, uint64_t init_seed);

    // Per-token mel-mean rows [n_tokens x n_mels]; gradients flow to encoder
    // parameters.
    ag::Var encode_text(const std::vector<int>& ids, Rng& rng, bool train) const;

    // Log-durations [n_tokens] from a detached prior; never trains the
    // encoder.
    ag::Var predict_log_durations(const ag::Var& mu_detached, Rng& rng,
                                  bool train) const;

    // Batched score-network forward on the training graph.
    // x2 [B, 2, n_mels, frame_budget]; one diffusion time per item.
    ag::Var score_batch(const ag::Var& x2, const std::vector<double>& t) const;

    // Single-sample evaluation for the sampler: no graph is built.
    // x_t, mu [n_mels x frame_budget].
    Tensor score(const Tensor& x_t, const Tensor& mu, double t) const;

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    const ModelConfig& config() const { return cfg_; }

private:
    ModelConfig cfg_;
    ParamStore params_;
    std::unique_ptr<TextEncoder> encoder_;
    std::unique_ptr<DurationPredictor> duration_;
    std::unique_ptr<UDitDecoder> decoder_;
};

}  // namespace udit::nn
