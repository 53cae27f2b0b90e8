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

#include "udit/nn/decoder.hpp"

#include <string>

#include "udit/core/check.hpp"

namespace udit::nn {

void validate(const DecoderConfig& cfg) {
    check_arg(cfg.n_down_levels == 2,
              "DecoderConfig: only a two-level U-Net is supported");
    check_arg(cfg.mlp_depth == 4,
              "DecoderConfig: the conditioning MLP trunk is four layers");
    check_arg(cfg.n_mels >= 4 && cfg.n_mels % 4 == 0,
              "DecoderConfig: n_mels must be divisible by 4 (two 2x pools)");
    check_arg(cfg.frame_budget >= 4 && cfg.frame_budget % 4 == 0,
              "DecoderConfig: frame_budget must be divisible by 4");
    check_arg(cfg.ch1 >= 1 && cfg.ch2 >= 1, "DecoderConfig: channels must be >= 1");
    check_arg(cfg.ch1 % cfg.n_groups == 0 && cfg.ch2 % cfg.n_groups == 0,
              "DecoderConfig: channels not divisible by n_groups");
    check_arg(cfg.ch1 % cfg.n_heads == 0 && cfg.ch2 % cfg.n_heads == 0,
              "DecoderConfig: channels not divisible by n_heads");
    check_arg(cfg.n_dit_blocks >= 1, "DecoderConfig: n_dit_blocks must be >= 1");
    check_arg(cfg.patch_f >= 1 && (cfg.n_mels / 4) % cfg.patch_f == 0,
              "DecoderConfig: latent height not divisible by patch_f");
    check_arg(cfg.patch_t >= 1 && (cfg.frame_budget / 4) % cfg.patch_t == 0,
              "DecoderConfig: latent width not divisible by patch_t");
    check_arg(cfg.hidden_dim >= 4 && cfg.hidden_dim % 4 == 0,
              "DecoderConfig: hidden_dim must be divisible by 4");
    check_arg(cfg.hidden_dim % cfg.n_heads == 0,
              "DecoderConfig: hidden_dim not divisible by n_heads");
    check_arg(cfg.time_embed_dim >= 2 && cfg.time_embed_dim % 2 == 0,
              "DecoderConfig: time_embed_dim must be even");
}

ag::Var ResBlock2d::forward(const ag::Var& x) const {
    ag::Var h = conv1.forward(ag::silu(gn1.forward(x)));
    h = conv2.forward(ag::silu(gn2.forward(h)));
    ag::Var shortcut = skip_w ? ag::channel_linear(x, skip_w, skip_b) : x;
    return ag::add(h, shortcut);
}

ResBlock2d make_res_block(ParamStore& ps, const std::string& name, int ci, int co,
                          int groups, Rng& rng) {
    ResBlock2d r;
    r.gn1 = make_group_norm(ps, name + ".gn1", ci, groups);
    r.conv1 = make_conv2d(ps, name + ".conv1", ci, co, 3, 3, rng);
    r.gn2 = make_group_norm(ps, name + ".gn2", co, groups);
    r.conv2 = make_conv2d(ps, name + ".conv2", co, co, 3, 3, rng);
    if (ci != co) {
        r.skip_w = ps.add(name + ".skip.w", uniform_init({ci, co}, ci, rng));
        r.skip_b = ps.add(name + ".skip.b", uniform_init({co}, ci, rng));
    }
    return r;
}

ag::Var AttnBlock2d::forward(const ag::Var& x) const {
    check_arg(x->value.ndim() == 4, "attention block: input must be [B,C,F,T]");
    const int b = x->value.dim(0);
    const int c = x->value.dim(1);
    const int f = x->value.dim(2);
    const int t = x->value.dim(3);
    ag::Var tokens =
        ag::transpose_last2(ag::reshape(gn.forward(x), {b, c, f * t}));
    ag::Var a = mha.forward(tokens);  // [B, F*T, C]
    return ag::add(x, ag::reshape(ag::transpose_last2(a), {b, c, f, t}));
}

AttnBlock2d make_attn_block(ParamStore& ps, const std::string& name, int c,
                            int groups, int n_heads, Rng& rng) {
    AttnBlock2d a;
    a.gn = make_group_norm(ps, name + ".gn", c, groups);
    a.mha = make_mha(ps, name + ".mha", c, n_heads, rng, /*zero_out_proj=*/true);
    return a;
}

ag::Var DiTBlock::forward(const ag::Var& tokens, const ag::Var& cond) const {
    check_arg(tokens->value.ndim() == 3 && tokens->value.dim(2) == dim,
              "DiT block: tokens must be [B, N, dim]");
    check_arg(cond->value.ndim() == 2 &&
                  cond->value.dim(0) == tokens->value.dim(0),
              "DiT block: cond must be [B, cond_dim]");
    ag::Var six = head.forward(ag::silu(cond));  // [B, 6*dim]
    auto part = [&](int i) { return ag::slice_cols(six, i * dim, (i + 1) * dim); };
    ag::Var g1 = part(0), b1 = part(1), a1 = part(2);
    ag::Var g2 = part(3), b2 = part(4), a2 = part(5);

    ag::Var h = ag::add_bvec(ag::mul_bvec(ag::layer_norm(tokens), g1), b1);
    ag::Var x = ag::add(tokens, ag::mul_bvec(attn.forward(h), a1));

    ag::Var h2 = ag::add_bvec(ag::mul_bvec(ag::layer_norm(x), g2), b2);
    ag::Var f = ff2.forward(ag::gelu(ff1.forward(h2)));
    return ag::add(x, ag::mul_bvec(f, a2));
}

DiTBlock make_dit_block(ParamStore& ps, const std::string& name, int dim,
                        int cond_dim, int n_heads, int ff_mult, Rng& rng) {
    DiTBlock d;
    d.dim = dim;

    // Head columns are laid out (g1, b1, a1, g2, b2, a2); the two alpha
    // column blocks start at exactly zero so the block begins as an identity.
    Tensor hw = uniform_init({cond_dim, 6 * dim}, cond_dim, rng);
    Tensor hb = uniform_init({6 * dim}, cond_dim, rng);
    for (int r = 0; r < cond_dim; ++r)
        for (int j = 0; j < dim; ++j) {
            hw.at(r, 2 * dim + j) = 0.0;
            hw.at(r, 5 * dim + j) = 0.0;
        }
    for (int j = 0; j < dim; ++j) {
        hb[2 * dim + j] = 0.0;
        hb[5 * dim + j] = 0.0;
    }
    d.head.w = ps.add(name + ".head.w", std::move(hw));
    d.head.b = ps.add(name + ".head.b", std::move(hb));

    d.attn = make_mha(ps, name + ".attn", dim, n_heads, rng);
    d.ff1 = make_linear(ps, name + ".ff1", dim, ff_mult * dim, rng);
    d.ff2 = make_linear(ps, name + ".ff2", ff_mult * dim, dim, rng);
    return d;
}

ag::Var CondMlp::forward(const ag::Var& te) const {
    ag::Var x = te;
    for (size_t i = 0; i < layers.size(); ++i) {
        x = layers[i].forward(x);
        if (i + 1 < layers.size()) x = ag::silu(x);
    }
    return x;
}

CondMlp make_cond_mlp(ParamStore& ps, const std::string& name, int in_dim,
                      int hidden, int depth, Rng& rng) {
    check_arg(depth >= 1, "make_cond_mlp: depth must be >= 1");
    CondMlp m;
    int d_in = in_dim;
    for (int i = 0; i < depth; ++i) {
        m.layers.push_back(
            make_linear(ps, name + "." + std::to_string(i), d_in, hidden, rng));
        d_in = hidden;
    }
    return m;
}

UDitDecoder::UDitDecoder(const DecoderConfig& cfg, ParamStore& ps, Rng& rng)
    : cfg_(cfg) {
    validate(cfg);
    const int g = cfg.n_groups;
    const int f_lat = cfg.n_mels / 4;
    const int t_lat = cfg.frame_budget / 4;
    const int patch_dim = cfg.ch2 * cfg.patch_f * cfg.patch_t;

    stem_ = make_conv2d(ps, "decoder.stem", 2, cfg.ch1, 3, 3, rng);

    res_d1_ = make_res_block(ps, "decoder.down.0.res", cfg.ch1, cfg.ch1, g, rng);
    attn_d1_ = make_attn_block(ps, "decoder.down.0.attn", cfg.ch1, g,
                               cfg.n_heads, rng);
    res_d2_ = make_res_block(ps, "decoder.down.1.res", cfg.ch1, cfg.ch2, g, rng);
    attn_d2_ = make_attn_block(ps, "decoder.down.1.attn", cfg.ch2, g,
                               cfg.n_heads, rng);

    patch_in_ = make_linear(ps, "decoder.patch_in", patch_dim, cfg.hidden_dim, rng);
    cond_mlp_ = make_cond_mlp(ps, "decoder.cond", cfg.time_embed_dim,
                              cfg.hidden_dim, cfg.mlp_depth, rng);
    for (int i = 0; i < cfg.n_dit_blocks; ++i)
        dit_.push_back(make_dit_block(ps, "decoder.dit." + std::to_string(i),
                                      cfg.hidden_dim, cfg.hidden_dim, cfg.n_heads,
                                      4, rng));
    patch_out_ =
        make_linear(ps, "decoder.patch_out", cfg.hidden_dim, patch_dim, rng);

    attn_u2_ = make_attn_block(ps, "decoder.up.1.attn", cfg.ch2, g, cfg.n_heads,
                               rng);
    res_u2_ = make_res_block(ps, "decoder.up.1.res", 2 * cfg.ch2, cfg.ch1, g, rng);
    attn_u1_ = make_attn_block(ps, "decoder.up.0.attn", cfg.ch1, g, cfg.n_heads,
                               rng);
    res_u1_ = make_res_block(ps, "decoder.up.0.res", 2 * cfg.ch1, cfg.ch1, g, rng);

    out_gn_ = make_group_norm(ps, "decoder.out.gn", cfg.ch1, g);
    out_conv_ = make_zero_conv2d(ps, "decoder.out.conv", cfg.ch1, 1, 3, 3);

    patch_pe_ = patch_grid_encoding(f_lat / cfg.patch_f, t_lat / cfg.patch_t,
                                    cfg.hidden_dim);
}

ag::Var UDitDecoder::forward(const ag::Var& x2,
                             const std::vector<double>& t) const {
    check_arg(x2->value.ndim() == 4 && x2->value.dim(1) == 2 &&
                  x2->value.dim(2) == cfg_.n_mels &&
                  x2->value.dim(3) == cfg_.frame_budget,
              "decoder: input must be [B, 2, " + std::to_string(cfg_.n_mels) +
                  ", " + std::to_string(cfg_.frame_budget) + "], got " +
                  x2->value.shape_str());
    const int b = x2->value.dim(0);
    check_arg(static_cast<int>(t.size()) == b,
              "decoder: need one diffusion time per batch item");
    const int f_lat = cfg_.n_mels / 4;
    const int t_lat = cfg_.frame_budget / 4;
    const int n_tok = (f_lat / cfg_.patch_f) * (t_lat / cfg_.patch_t);

    // Down path: res block, 2x pool, spatial attention — twice.
    ag::Var x = stem_.forward(x2);
    ag::Var skip1 = res_d1_.forward(x);
    x = attn_d1_.forward(ag::avg_pool2(skip1));
    ag::Var skip2 = res_d2_.forward(x);
    x = attn_d2_.forward(ag::avg_pool2(skip2));

    // Latent DiT stack on patch tokens.
    ag::Var tokens = patch_in_.forward(ag::patchify(x, cfg_.patch_f, cfg_.patch_t));
    Tensor pe({b, n_tok, cfg_.hidden_dim});
    for (int i = 0; i < b; ++i)
        for (int64_t j = 0; j < patch_pe_.numel(); ++j)
            pe[static_cast<int64_t>(i) * patch_pe_.numel() + j] = patch_pe_[j];
    tokens = ag::add(tokens, ag::constant(std::move(pe)));

    Tensor te({b, cfg_.time_embed_dim});
    for (int i = 0; i < b; ++i) {
        Tensor row = sinusoidal_time_embedding(t[static_cast<size_t>(i)],
                                               cfg_.time_embed_dim);
        for (int j = 0; j < cfg_.time_embed_dim; ++j) te.at(i, j) = row[j];
    }
    ag::Var cond = cond_mlp_.forward(ag::constant(std::move(te)));
    for (const auto& block : dit_) tokens = block.forward(tokens, cond);

    x = ag::unpatchify(patch_out_.forward(tokens), cfg_.ch2, f_lat, t_lat,
                       cfg_.patch_f, cfg_.patch_t);

    // Up path mirrors the down path with skip concatenations.
    x = ag::upsample_nearest2(attn_u2_.forward(x));
    x = res_u2_.forward(ag::concat_channels(x, skip2));
    x = ag::upsample_nearest2(attn_u1_.forward(x));
    x = res_u1_.forward(ag::concat_channels(x, skip1));

    ag::Var y = out_conv_.forward(ag::silu(out_gn_.forward(x)));
    check_state(y->value.all_finite(), "decoder: non-finite activations");
    return ag::reshape(y, {b, cfg_.n_mels, cfg_.frame_budget});
}

}  // namespace udit::nn
