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
#include <map>
#include <string>
#include <vector>

#include "udit/core/autograd.hpp"
#include "udit/core/rng.hpp"
#include "udit/core/tensor.hpp"

namespace udit::nn {

// Central registry of learnable parameters. Names are stable, hierarchical
// ("encoder.prenet.0.conv.w"), and enumerated in insertion order, which fixes
// both the optimizer slot order and the checkpoint block order.
class ParamStore {
public:
    ag::Var add(const std::string& name, Tensor init);
    const ag::Var& get(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) > 0; }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<ag::Var>& all() const { return vars_; }
    int64_t total_size() const;
    void zero_grads() const;

private:
    std::vector<std::string> names_;
    std::vector<ag::Var> vars_;
    std::map<std::string, size_t> index_;
};

// U(-1/sqrt(fan_in), +1/sqrt(fan_in)), the standard dense/conv default.
Tensor uniform_init(Shape shape, int fan_in, Rng& rng);

// Frequency-laddered sin/cos vector for a scalar position s:
//   e[2i] = sin(s * w_i), e[2i+1] = cos(s * w_i), w_i = 10000^(-2i/dim).
std::vector<double> sinusoidal_ladder(double s, int dim);

// Embedding of a diffusion step t in [0, 1], scaled to s = 1000 t so the
// ladder operates in its designed frequency regime.
Tensor sinusoidal_time_embedding(double t, int dim);

// [n x dim] table of ladder embeddings of the row index (token positions).
Tensor position_encoding_rows(int n, int dim);

// [nf*nt x dim] table for a 2-D patch grid, row-major over (freq, time):
// first half of each row encodes the frequency index, second half the time
// index.
Tensor patch_grid_encoding(int nf, int nt, int dim);

// ---- layers -----------------------------------------------------------

struct Linear {
    ag::Var w;  // [in, out]
    ag::Var b;  // [out], may be null
    ag::Var forward(const ag::Var& x) const { return ag::linear(x, w, b); }
};
Linear make_linear(ParamStore& ps, const std::string& name, int in, int out,
                   Rng& rng, bool bias = true);
// All-zero weights and bias; used for gates that must start as identity.
Linear make_zero_linear(ParamStore& ps, const std::string& name, int in, int out);

struct Conv1dLayer {
    ag::Var w;  // [co, ci, k]
    ag::Var b;  // [co]
    ag::Var forward(const ag::Var& x) const { return ag::conv1d(x, w, b); }
};
Conv1dLayer make_conv1d(ParamStore& ps, const std::string& name, int ci, int co,
                        int k, Rng& rng);

struct Conv2dLayer {
    ag::Var w;  // [co, ci, kh, kw]
    ag::Var b;  // [co]
    ag::Var forward(const ag::Var& x) const { return ag::conv2d(x, w, b); }
};
Conv2dLayer make_conv2d(ParamStore& ps, const std::string& name, int ci, int co,
                        int kh, int kw, Rng& rng);
Conv2dLayer make_zero_conv2d(ParamStore& ps, const std::string& name, int ci,
                             int co, int kh, int kw);

// Layer norm over the last dim with a learned elementwise affine.
struct LayerNormAffine {
    ag::Var g;  // [d]
    ag::Var b;  // [d]
    // x [n, d] (reshape higher ranks to rows first).
    ag::Var forward(const ag::Var& x) const;
};
LayerNormAffine make_layer_norm(ParamStore& ps, const std::string& name, int d);

struct GroupNormLayer {
    ag::Var gamma;  // [c]
    ag::Var beta;   // [c]
    int groups = 1;
    ag::Var forward(const ag::Var& x) const {  // x [B,C,F,T]
        return ag::group_norm(x, groups, gamma, beta);
    }
};
GroupNormLayer make_group_norm(ParamStore& ps, const std::string& name, int c,
                               int groups);

// Standard scaled-dot-product multi-head self-attention on [B, N, D].
struct MultiHeadAttention {
    Linear wq, wk, wv, wo;
    int dim = 0;
    int n_heads = 1;
    ag::Var forward(const ag::Var& x) const;
};
MultiHeadAttention make_mha(ParamStore& ps, const std::string& name, int dim,
                            int n_heads, Rng& rng, bool zero_out_proj = false);

}  // namespace udit::nn
