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

#include "udit/nn/layers.hpp"

#include <cmath>

#include "udit/core/check.hpp"

namespace udit::nn {

ag::Var ParamStore::add(const std::string& name, Tensor init) {
    check_arg(!name.empty(), "ParamStore: empty parameter name");
    check_arg(index_.count(name) == 0, "ParamStore: duplicate parameter " + name);
    ag::Var v = ag::param(std::move(init));
    index_[name] = vars_.size();
    names_.push_back(name);
    vars_.push_back(v);
    return v;
}

const ag::Var& ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    check_arg(it != index_.end(), "ParamStore: unknown parameter " + name);
    return vars_[it->second];
}

int64_t ParamStore::total_size() const {
    int64_t n = 0;
    for (const auto& v : vars_) n += v->value.numel();
    return n;
}

void ParamStore::zero_grads() const {
    for (const auto& v : vars_)
        if (!v->grad.empty())
            for (int64_t i = 0; i < v->grad.numel(); ++i) v->grad[i] = 0.0;
}

Tensor uniform_init(Shape shape, int fan_in, Rng& rng) {
    check_arg(fan_in >= 1, "uniform_init: fan_in must be >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

std::vector<double> sinusoidal_ladder(double s, int dim) {
    check_arg(dim >= 2 && dim % 2 == 0, "sinusoidal_ladder: dim must be even");
    std::vector<double> e(static_cast<size_t>(dim));
    for (int i = 0; i < dim / 2; ++i) {
        const double w = std::pow(10000.0, -2.0 * i / dim);
        e[static_cast<size_t>(2 * i)] = std::sin(s * w);
        e[static_cast<size_t>(2 * i + 1)] = std::cos(s * w);
    }
    return e;
}

Tensor sinusoidal_time_embedding(double t, int dim) {
    check_arg(t >= 0.0 && t <= 1.0,
              "sinusoidal_time_embedding: t outside [0, 1]: " + std::to_string(t));
    return Tensor::from({dim}, sinusoidal_ladder(1000.0 * t, dim));
}

Tensor position_encoding_rows(int n, int dim) {
    check_arg(n >= 1, "position_encoding_rows: n must be >= 1");
    Tensor out({n, dim});
    for (int i = 0; i < n; ++i) {
        const auto e = sinusoidal_ladder(static_cast<double>(i), dim);
        for (int j = 0; j < dim; ++j) out.at(i, j) = e[static_cast<size_t>(j)];
    }
    return out;
}

Tensor patch_grid_encoding(int nf, int nt, int dim) {
    check_arg(nf >= 1 && nt >= 1, "patch_grid_encoding: empty grid");
    check_arg(dim % 4 == 0, "patch_grid_encoding: dim must be divisible by 4");
    const int half = dim / 2;
    Tensor out({nf * nt, dim});
    for (int r = 0; r < nf; ++r) {
        const auto ef = sinusoidal_ladder(static_cast<double>(r), half);
        for (int c = 0; c < nt; ++c) {
            const auto et = sinusoidal_ladder(static_cast<double>(c), half);
            const int row = r * nt + c;
            for (int j = 0; j < half; ++j) {
                out.at(row, j) = ef[static_cast<size_t>(j)];
                out.at(row, half + j) = et[static_cast<size_t>(j)];
            }
        }
    }
    return out;
}

Linear make_linear(ParamStore& ps, const std::string& name, int in, int out,
                   Rng& rng, bool bias) {
    Linear l;
    l.w = ps.add(name + ".w", uniform_init({in, out}, in, rng));
    if (bias) l.b = ps.add(name + ".b", uniform_init({out}, in, rng));
    return l;
}

Linear make_zero_linear(ParamStore& ps, const std::string& name, int in, int out) {
    Linear l;
    l.w = ps.add(name + ".w", Tensor::zeros({in, out}));
    l.b = ps.add(name + ".b", Tensor::zeros({out}));
    return l;
}

Conv1dLayer make_conv1d(ParamStore& ps, const std::string& name, int ci, int co,
                        int k, Rng& rng) {
    Conv1dLayer l;
    const int fan_in = ci * k;
    l.w = ps.add(name + ".w", uniform_init({co, ci, k}, fan_in, rng));
    l.b = ps.add(name + ".b", uniform_init({co}, fan_in, rng));
    return l;
}

Conv2dLayer make_conv2d(ParamStore& ps, const std::string& name, int ci, int co,
                        int kh, int kw, Rng& rng) {
    Conv2dLayer l;
    const int fan_in = ci * kh * kw;
    l.w = ps.add(name + ".w", uniform_init({co, ci, kh, kw}, fan_in, rng));
    l.b = ps.add(name + ".b", uniform_init({co}, fan_in, rng));
    return l;
}

Conv2dLayer make_zero_conv2d(ParamStore& ps, const std::string& name, int ci,
                             int co, int kh, int kw) {
    Conv2dLayer l;
    l.w = ps.add(name + ".w", Tensor::zeros({co, ci, kh, kw}));
    l.b = ps.add(name + ".b", Tensor::zeros({co}));
    return l;
}

ag::Var LayerNormAffine::forward(const ag::Var& x) const {
    return ag::add_rowvec(ag::mul_rowvec(ag::layer_norm(x), g), b);
}

LayerNormAffine make_layer_norm(ParamStore& ps, const std::string& name, int d) {
    LayerNormAffine l;
    l.g = ps.add(name + ".g", Tensor::full({d}, 1.0));
    l.b = ps.add(name + ".b", Tensor::zeros({d}));
    return l;
}

GroupNormLayer make_group_norm(ParamStore& ps, const std::string& name, int c,
                               int groups) {
    check_arg(groups >= 1 && c % groups == 0,
              "make_group_norm: channels not divisible by groups");
    GroupNormLayer l;
    l.gamma = ps.add(name + ".g", Tensor::full({c}, 1.0));
    l.beta = ps.add(name + ".b", Tensor::zeros({c}));
    l.groups = groups;
    return l;
}

ag::Var MultiHeadAttention::forward(const ag::Var& x) const {
    check_arg(x->value.ndim() == 3, "attention: input must be [B, N, D]");
    const int b = x->value.dim(0);
    const int n = x->value.dim(1);
    const int d = x->value.dim(2);
    check_arg(d == dim, "attention: token dim mismatch");
    const int dh = dim / n_heads;

    auto split_heads = [&](const ag::Var& v) {
        // [B,N,D] -> [B,N,H,dh] -> [B,H,N,dh] -> [B*H,N,dh]
        return ag::reshape(ag::permute_0213(ag::reshape(v, {b, n, n_heads, dh})),
                           {b * n_heads, n, dh});
    };
    ag::Var q = split_heads(wq.forward(x));
    ag::Var k = split_heads(wk.forward(x));
    ag::Var v = split_heads(wv.forward(x));

    ag::Var att = ag::scale(ag::bmm(q, ag::transpose_last2(k)),
                            1.0 / std::sqrt(static_cast<double>(dh)));
    att = ag::softmax_last(att);
    ag::Var ctx = ag::bmm(att, v);  // [B*H, N, dh]
    ctx = ag::reshape(ag::permute_0213(ag::reshape(ctx, {b, n_heads, n, dh})),
                      {b, n, dim});
    return wo.forward(ctx);
}

MultiHeadAttention make_mha(ParamStore& ps, const std::string& name, int dim,
                            int n_heads, Rng& rng, bool zero_out_proj) {
    check_arg(n_heads >= 1 && dim % n_heads == 0,
              "make_mha: dim not divisible by n_heads");
    MultiHeadAttention m;
    m.dim = dim;
    m.n_heads = n_heads;
    m.wq = make_linear(ps, name + ".q", dim, dim, rng);
    m.wk = make_linear(ps, name + ".k", dim, dim, rng);
    m.wv = make_linear(ps, name + ".v", dim, dim, rng);
    m.wo = zero_out_proj ? make_zero_linear(ps, name + ".o", dim, dim)
                         : make_linear(ps, name + ".o", dim, dim, rng);
    return m;
}

}  // namespace udit::nn
