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

#include <functional>
#include <memory>
#include <vector>

#include "udit/core/tensor.hpp"

namespace udit::ag {

// Reverse-mode tape autograd over Tensor. Graphs are built define-by-run by
// the op functions below and freed when the last Var goes out of scope.
// Single-threaded by design: reproducibility beats throughput at this scale.

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad;  // allocated lazily, same shape as value
    bool requires_grad = false;
    std::vector<Var> parents;
    // Accumulates d(output)/d(parent) * out_grad into each parent's grad.
    // Receives the node's own value so closures never need to capture it
    // (capturing the output Var would create an ownership cycle).
    std::function<void(const Tensor& out_grad, const Tensor& out_value)> backward;

    void accumulate(const Tensor& g);
};

// Leaf constructors.
Var constant(Tensor value);
Var param(Tensor value);

// Grad mode. When disabled, ops produce value-only nodes (no parents, no
// closures); used for inference and samplers.
bool grad_enabled();
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// Runs reverse accumulation from a scalar root (numel == 1).
void backward(const Var& root);

// ---- elementwise ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var square(const Var& a);
Var relu(const Var& a);
Var silu(const Var& a);
Var gelu(const Var& a);
Var dropout(const Var& a, double p, Rng& rng, bool train);

// ---- shape ----
Var reshape(const Var& a, Shape shape);
Var transpose_last2(const Var& a);            // [..., m, n] -> [..., n, m]
Var permute_0213(const Var& a);               // [A,B,C,D] -> [A,C,B,D]
Var slice_cols(const Var& a, int from, int to);  // [N, K] -> [N, to-from]
Var concat_channels(const Var& a, const Var& b); // [B,C1,F,T]+[B,C2,F,T]
Var stack2_channels(const Var& a, const Var& b); // [F,T]+[F,T] -> [2,F,T]
Var stack_batch(const std::vector<Var>& items);  // n x [..] -> [n, ..]

// ---- linear algebra ----
Var matmul(const Var& a, const Var& b);       // [m,k]x[k,n]
Var bmm(const Var& a, const Var& b);          // [B,m,k]x[B,k,n]
// x [..., in] flattened to rows; W [in, out]; b [out] (may be null).
Var linear(const Var& x, const Var& w, const Var& b);
// Per-channel linear over [B,C,F,T]: W [C_in, C_out], a 1x1 convolution.
Var channel_linear(const Var& x, const Var& w, const Var& b);

// ---- normalization / softmax ----
Var layer_norm(const Var& x, double eps = 1e-5);  // over last dim, no affine
Var group_norm(const Var& x, int groups, const Var& gamma, const Var& beta,
               double eps = 1e-5);                // x [B,C,F,T]
Var softmax_last(const Var& x);

// ---- convolution / resampling ----
// x [B,Ci,F,T], w [Co,Ci,kh,kw], stride 1, same (zero) padding; kh, kw odd.
Var conv2d(const Var& x, const Var& w, const Var& b);
// x [N,Ci] over the row (token) axis, w [Co,Ci,k], same padding; k odd.
Var conv1d(const Var& x, const Var& w, const Var& b);
Var avg_pool2(const Var& x);           // [B,C,F,T] -> [B,C,F/2,T/2]
Var upsample_nearest2(const Var& x);   // [B,C,F,T] -> [B,C,2F,2T]

// ---- broadcasting ----
Var add_rowvec(const Var& x, const Var& v);   // [N,D] + [D]
Var mul_rowvec(const Var& x, const Var& v);   // [N,D] * [D]
Var add_bvec(const Var& x, const Var& v);     // [B,N,D] + [B,D] per batch
Var mul_bvec(const Var& x, const Var& v);     // [B,N,D] * [B,D] per batch

// ---- gather / scatter ----
Var embedding(const Var& table, const std::vector<int>& ids);  // -> [n,D]
// Row i of x repeated counts[i] times, order preserved.
Var repeat_rows(const Var& x, const std::vector<int>& counts);
// Right-pad rows of [N,D] with a constant row up to n_total rows.
Var pad_rows(const Var& x, int n_total, double value);
Var detach(const Var& x);

// ---- reductions ----
Var sum(const Var& x);
Var mean(const Var& x);
Var mean_squared_error(const Var& a, const Var& b);

// Patchify: [B,C,F,T] -> [B, (F/pf)*(T/pt), C*pf*pt], row-major over the
// (frequency, time) patch grid; exact inverse of unpatchify.
Var patchify(const Var& x, int pf, int pt);
Var unpatchify(const Var& tokens, int channels, int f, int t, int pf, int pt);

}  // namespace udit::ag
