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

#include "udit/nn/layers.hpp"

namespace udit::nn {

struct TextEncoderConfig {
    int vocab_size = 0;  // required; set from the lexicon
    int n_mels = 80;
    int hidden = 128;
    int n_blocks = 6;
    int n_heads = 4;
    int ff_mult = 4;
    int prenet_kernel = 5;
    double dropout = 0.1;
};
void validate(const TextEncoderConfig& cfg);

// Pre-norm transformer block on a single [n, d] sequence.
struct TransformerBlock {
    LayerNormAffine ln1, ln2;
    MultiHeadAttention attn;
    Linear ff1, ff2;
    double dropout = 0.0;
    ag::Var forward(const ag::Var& x, Rng& rng, bool train) const;
};
TransformerBlock make_transformer_block(ParamStore& ps, const std::string& name,
                                        int dim, int n_heads, int ff_mult,
                                        double dropout, Rng& rng);

// Token embedding + positional encoding, a 3-conv pre-net closed by a fully
// connected layer, a stack of pre-norm transformer blocks, and a projection
// to per-token mel-mean rows.
class TextEncoder {
public:
    TextEncoder(const TextEncoderConfig& cfg, ParamStore& ps, Rng& rng);

    // ids: vocab indices; returns [n_tokens x n_mels].
    ag::Var forward(const std::vector<int>& ids, Rng& rng, bool train) const;

    const TextEncoderConfig& config() const { return cfg_; }

private:
    TextEncoderConfig cfg_;
    ag::Var embed_;  // [vocab, hidden]
    struct PrenetLayer {
        Conv1dLayer conv;
        LayerNormAffine ln;
    };
    std::vector<PrenetLayer> prenet_;
    Linear prenet_fc_;
    std::vector<TransformerBlock> blocks_;
    Linear proj_;
};

struct DurationPredictorConfig {
    int in_dim = 80;  // consumes (detached) encoder mel rows
    int hidden = 128;
    int kernel = 3;
    double dropout = 0.1;
};
void validate(const DurationPredictorConfig& cfg);

// Two conv layers with layer norm and dropout, then a linear head; one
// log-duration per token. Callers pass a detached input so this head never
// trains the encoder.
class DurationPredictor {
public:
    DurationPredictor(const DurationPredictorConfig& cfg, ParamStore& ps,
                      Rng& rng);

    // mu_detached [n_tokens x in_dim] -> [n_tokens].
    ag::Var forward(const ag::Var& mu_detached, Rng& rng, bool train) const;

    const DurationPredictorConfig& config() const { return cfg_; }

private:
    DurationPredictorConfig cfg_;
    Conv1dLayer c1_, c2_;
    LayerNormAffine ln1_, ln2_;
    Linear out_;
};

}  // namespace udit::nn
