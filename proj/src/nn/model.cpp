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

#include "udit/nn/model.hpp"

#include <string>

#include "udit/core/check.hpp"

namespace udit::nn {

void validate(const ModelConfig& cfg) {
    validate(cfg.encoder);
    validate(cfg.duration);
    validate(cfg.decoder);
    check_arg(cfg.encoder.n_mels == cfg.decoder.n_mels,
              "ModelConfig: encoder and decoder disagree on n_mels");
    check_arg(cfg.duration.in_dim == cfg.encoder.n_mels,
              "ModelConfig: duration predictor must consume encoder mel rows");
}

UDitModel::UDitModel(const ModelConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
    validate(cfg);
    Rng rng(init_seed);
    encoder_ = std::make_unique<TextEncoder>(cfg.encoder, params_, rng);
    duration_ = std::make_unique<DurationPredictor>(cfg.duration, params_, rng);
    decoder_ = std::make_unique<UDitDecoder>(cfg.decoder, params_, rng);
}

ag::Var UDitModel::encode_text(const std::vector<int>& ids, Rng& rng,
                               bool train) const {
    return encoder_->forward(ids, rng, train);
}

ag::Var UDitModel::predict_log_durations(const ag::Var& mu_detached, Rng& rng,
                                         bool train) const {
    return duration_->forward(mu_detached, rng, train);
}

ag::Var UDitModel::score_batch(const ag::Var& x2,
                               const std::vector<double>& t) const {
    return decoder_->forward(x2, t);
}

Tensor UDitModel::score(const Tensor& x_t, const Tensor& mu, double t) const {
    const int n_mels = cfg_.decoder.n_mels;
    const int budget = cfg_.decoder.frame_budget;
    check_arg(x_t.ndim() == 2 && x_t.dim(0) == n_mels,
              "score: input must have " + std::to_string(n_mels) + " mel rows");
    check_arg(x_t.dim(1) == budget,
              "score: frame count " + std::to_string(x_t.dim(1)) +
                  " not equal to budget " + std::to_string(budget));
    check_arg(mu.same_shape(x_t), "score: prior shape mismatch");

    ag::NoGradGuard no_grad;
    ag::Var x2 = ag::stack_batch(
        {ag::stack2_channels(ag::constant(x_t), ag::constant(mu))});
    ag::Var out = decoder_->forward(x2, {t});
    return out->value.reshaped({n_mels, budget});
}

}  // namespace udit::nn
