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

struct DecoderConfig {
    int n_mels = 80;
    int frame_budget = 256;
    int n_down_levels = 2;  // fixed two-level U-Net
    int ch1 = 64;           // level-1 channels
    int ch2 = 128;          // level-2 (latent) channels
    int n_dit_blocks = 2;
    int patch_f = 4;  // latent patch height (frequency)
    int patch_t = 8;  // latent patch width (time)
    int hidden_dim = 256;  // DiT token width
    int n_heads = 4;
    int n_groups = 8;
    int time_embed_dim = 256;
    int mlp_depth = 4;  // conditioning MLP trunk depth (fixed)
};
void validate(const DecoderConfig& cfg);

// Two group-norm + SiLU + 3x3 conv stages with an additive shortcut
// (1x1-projected when the channel count changes). Time enters the decoder
// only through the DiT conditioning, so these blocks are unconditioned.
struct ResBlock2d {
    GroupNormLayer gn1, gn2;
    Conv2dLayer conv1, conv2;
    ag::Var skip_w;  // [ci, co]; null when ci == co
    ag::Var skip_b;
    ag::Var forward(const ag::Var& x) const;
};
ResBlock2d make_res_block(ParamStore& ps, const std::string& name, int ci, int co,
                          int groups, Rng& rng);

// Spatial self-attention over the flattened [F*T] positions of a feature
// map, with a zero-initialized output projection so the block starts as an
// identity (residual add).
struct AttnBlock2d {
    GroupNormLayer gn;
    MultiHeadAttention mha;
    ag::Var forward(const ag::Var& x) const;  // [B,C,F,T]
};
AttnBlock2d make_attn_block(ParamStore& ps, const std::string& name, int c,
                            int groups, int n_heads, Rng& rng);

// Transformer block with adaptive layer norm: a per-block head regresses
// (gamma1, beta1, alpha1, gamma2, beta2, alpha2) from the shared conditioning
// vector; x_hat = gamma * LN(x) + beta (LN carries no learned affine) and
// each residual branch is gated by its alpha, whose head slices start at
// exactly zero so a fresh block is an identity map.
struct DiTBlock {
    Linear head;  // [cond -> 6 * dim]
    MultiHeadAttention attn;
    Linear ff1, ff2;
    int dim = 0;
    // tokens [B, N, dim]; cond [B, cond_dim]
    ag::Var forward(const ag::Var& tokens, const ag::Var& cond) const;
};
DiTBlock make_dit_block(ParamStore& ps, const std::string& name, int dim,
                        int cond_dim, int n_heads, int ff_mult, Rng& rng);

// Four linear layers with SiLU between; maps the sinusoidal time embedding
// to the conditioning vector shared by all DiT blocks.
struct CondMlp {
    std::vector<Linear> layers;
    ag::Var forward(const ag::Var& te) const;  // [B, time_dim] -> [B, hidden]
};
CondMlp make_cond_mlp(ParamStore& ps, const std::string& name, int in_dim,
                      int hidden, int depth, Rng& rng);

// The score network body: stacks the noisy input and the frame prior as two
// channels, runs a two-level down path (res block -> 2x pool -> attention),
// patchifies the latent into DiT tokens with a fixed 2-D sinusoidal grid
// encoding, applies the DiT stack conditioned on the diffusion time, and
// mirrors the path back up with skip concatenations. The final projection
// is zero-initialized, so a fresh decoder outputs exactly zero.
class UDitDecoder {
public:
    UDitDecoder(const DecoderConfig& cfg, ParamStore& ps, Rng& rng);

    // x2 [B, 2, n_mels, frame_budget]; t holds one diffusion time per item.
    ag::Var forward(const ag::Var& x2, const std::vector<double>& t) const;

    const DecoderConfig& config() const { return cfg_; }

private:
    DecoderConfig cfg_;
    Conv2dLayer stem_;
    ResBlock2d res_d1_, res_d2_, res_u2_, res_u1_;
    AttnBlock2d attn_d1_, attn_d2_, attn_u2_, attn_u1_;
    Linear patch_in_, patch_out_;
    CondMlp cond_mlp_;
    std::vector<DiTBlock> dit_;
    GroupNormLayer out_gn_;
    Conv2dLayer out_conv_;
    Tensor patch_pe_;  // [n_patches, hidden_dim], fixed (not learned)
};

}  // namespace udit::nn
