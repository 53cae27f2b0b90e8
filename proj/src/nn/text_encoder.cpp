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

#include "udit/nn/text_encoder.hpp"

#include "udit/core/check.hpp"

namespace udit::nn {

void validate(const TextEncoderConfig& cfg) {
    check_arg(cfg.vocab_size >= 1, "TextEncoderConfig: vocab_size must be >= 1");
    check_arg(cfg.n_mels >= 1, "TextEncoderConfig: n_mels must be >= 1");
    check_arg(cfg.hidden >= 2 && cfg.hidden % 2 == 0,
              "TextEncoderConfig: hidden must be even (positional encoding)");
    check_arg(cfg.n_heads >= 1 && cfg.hidden % cfg.n_heads == 0,
              "TextEncoderConfig: hidden not divisible by n_heads");
    check_arg(cfg.n_blocks >= 1, "TextEncoderConfig: n_blocks must be >= 1");
    check_arg(cfg.ff_mult >= 1, "TextEncoderConfig: ff_mult must be >= 1");
    check_arg(cfg.prenet_kernel >= 1 && cfg.prenet_kernel % 2 == 1,
              "TextEncoderConfig: prenet_kernel must be odd");
    check_arg(cfg.dropout >= 0.0 && cfg.dropout < 1.0,
              "TextEncoderConfig: dropout must lie in [0, 1)");
}

ag::Var TransformerBlock::forward(const ag::Var& x, Rng& rng, bool train) const {
    const int n = x->value.dim(0);
    const int d = x->value.dim(1);
    ag::Var h = ln1.forward(x);
    ag::Var a = attn.forward(ag::reshape(h, {1, n, d}));
    a = ag::dropout(ag::reshape(a, {n, d}), dropout, rng, train);
    ag::Var y = ag::add(x, a);

    ag::Var f = ag::relu(ff1.forward(ln2.forward(y)));
    f = ag::dropout(ff2.forward(f), dropout, rng, train);
    return ag::add(y, f);
}

TransformerBlock make_transformer_block(ParamStore& ps, const std::string& name,
                                        int dim, int n_heads, int ff_mult,
                                        double dropout, Rng& rng) {
    TransformerBlock b;
    b.ln1 = make_layer_norm(ps, name + ".ln1", dim);
    b.ln2 = make_layer_norm(ps, name + ".ln2", dim);
    b.attn = make_mha(ps, name + ".attn", dim, n_heads, rng);
    b.ff1 = make_linear(ps, name + ".ff1", dim, ff_mult * dim, rng);
    b.ff2 = make_linear(ps, name + ".ff2", ff_mult * dim, dim, rng);
    b.dropout = dropout;
    return b;
}

TextEncoder::TextEncoder(const TextEncoderConfig& cfg, ParamStore& ps, Rng& rng)
    : cfg_(cfg) {
    validate(cfg);
    Tensor table({cfg.vocab_size, cfg.hidden});
    for (int64_t i = 0; i < table.numel(); ++i) table[i] = rng.normal();
    embed_ = ps.add("encoder.embed", std::move(table));

    for (int i = 0; i < 3; ++i) {
        const std::string base = "encoder.prenet." + std::to_string(i);
        PrenetLayer layer;
        layer.conv = make_conv1d(ps, base + ".conv", cfg.hidden, cfg.hidden,
                                 cfg.prenet_kernel, rng);
        layer.ln = make_layer_norm(ps, base + ".ln", cfg.hidden);
        prenet_.push_back(layer);
    }
    prenet_fc_ = make_linear(ps, "encoder.prenet.fc", cfg.hidden, cfg.hidden, rng);

    for (int i = 0; i < cfg.n_blocks; ++i)
        blocks_.push_back(make_transformer_block(
            ps, "encoder.block." + std::to_string(i), cfg.hidden, cfg.n_heads,
            cfg.ff_mult, cfg.dropout, rng));

    proj_ = make_linear(ps, "encoder.proj", cfg.hidden, cfg.n_mels, rng);
}

ag::Var TextEncoder::forward(const std::vector<int>& ids, Rng& rng,
                             bool train) const {
    check_arg(!ids.empty(), "TextEncoder: empty token sequence");
    const int n = static_cast<int>(ids.size());
    ag::Var x = ag::embedding(embed_, ids);
    x = ag::add(x, ag::constant(position_encoding_rows(n, cfg_.hidden)));

    for (const auto& layer : prenet_) {
        ag::Var h = layer.ln.forward(ag::relu(layer.conv.forward(x)));
        x = ag::dropout(h, cfg_.dropout, rng, train);
    }
    x = prenet_fc_.forward(x);

    for (const auto& block : blocks_) x = block.forward(x, rng, train);
    return proj_.forward(x);
}

void validate(const DurationPredictorConfig& cfg) {
    check_arg(cfg.in_dim >= 1, "DurationPredictorConfig: in_dim must be >= 1");
    check_arg(cfg.hidden >= 1, "DurationPredictorConfig: hidden must be >= 1");
    check_arg(cfg.kernel >= 1 && cfg.kernel % 2 == 1,
              "DurationPredictorConfig: kernel must be odd");
    check_arg(cfg.dropout >= 0.0 && cfg.dropout < 1.0,
              "DurationPredictorConfig: dropout must lie in [0, 1)");
}

DurationPredictor::DurationPredictor(const DurationPredictorConfig& cfg,
                                     ParamStore& ps, Rng& rng)
    : cfg_(cfg) {
    validate(cfg);
    c1_ = make_conv1d(ps, "duration.c1", cfg.in_dim, cfg.hidden, cfg.kernel, rng);
    ln1_ = make_layer_norm(ps, "duration.ln1", cfg.hidden);
    c2_ = make_conv1d(ps, "duration.c2", cfg.hidden, cfg.hidden, cfg.kernel, rng);
    ln2_ = make_layer_norm(ps, "duration.ln2", cfg.hidden);
    out_ = make_linear(ps, "duration.out", cfg.hidden, 1, rng);
}

ag::Var DurationPredictor::forward(const ag::Var& mu_detached, Rng& rng,
                                   bool train) const {
    check_arg(mu_detached->value.ndim() == 2 &&
                  mu_detached->value.dim(1) == cfg_.in_dim,
              "DurationPredictor: input must be [n_tokens x in_dim]");
    const int n = mu_detached->value.dim(0);
    ag::Var x = ag::dropout(ln1_.forward(ag::relu(c1_.forward(mu_detached))),
                            cfg_.dropout, rng, train);
    x = ag::dropout(ln2_.forward(ag::relu(c2_.forward(x))), cfg_.dropout, rng,
                    train);
    return ag::reshape(out_.forward(x), {n});
}

}  // namespace udit::nn
