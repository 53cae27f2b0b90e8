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

#include "udit/core/autograd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "udit/core/check.hpp"

namespace udit::ag {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<RowMat>;
using CMapM = Eigen::Map<const RowMat>;

thread_local bool g_grad_enabled = true;

bool any_requires(const std::vector<Var>& parents) {
    for (const auto& p : parents)
        if (p->requires_grad) return true;
    return false;
}

Var make(Tensor value, std::vector<Var> parents,
         std::function<void(const Tensor&, const Tensor&)> bw) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    if (g_grad_enabled && any_requires(parents)) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backward = std::move(bw);
    }
    return n;
}

// Elementwise unary op helper: fwd(x) -> y, dfdx(x, y) -> derivative.
template <typename F, typename D>
Var unary(const Var& a, F fwd, D dfdx) {
    Tensor out(a->value.shape());
    const int64_t n = out.numel();
    for (int64_t i = 0; i < n; ++i) out[i] = fwd(a->value[i]);
    return make(std::move(out), {a}, [a, dfdx](const Tensor& g, const Tensor& y) {
        Tensor da(a->value.shape());
        for (int64_t i = 0; i < da.numel(); ++i)
            da[i] = g[i] * dfdx(a->value[i], y[i]);
        a->accumulate(da);
    });
}

}  // namespace

void Node::accumulate(const Tensor& g) {
    if (!requires_grad) return;
    check_arg(g.shape() == value.shape(), "autograd: gradient shape mismatch");
    if (grad.empty()) grad = Tensor(value.shape());
    for (int64_t i = 0; i < grad.numel(); ++i) grad[i] += g[i];
}

Var constant(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    return n;
}

Var param(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = true;
    return n;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void backward(const Var& root) {
    check_arg(root->value.numel() == 1, "backward: root must be scalar");
    check_arg(root->requires_grad, "backward: root does not require grad");

    // Iterative post-order DFS for a topological ordering.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, size_t>> stack{{root.get(), 0}};
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            Node* p = node->parents[idx++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->grad = Tensor::full(root->value.shape(), 1.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward && !n->grad.empty()) n->backward(n->grad, n->value);
    }
}

// ---- elementwise ----

Var add(const Var& a, const Var& b) {
    check_arg(a->value.same_shape(b->value), "add: shape mismatch");
    Tensor out = a->value + b->value;
    return make(std::move(out), {a, b}, [a, b](const Tensor& g, const Tensor&) {
        a->accumulate(g);
        b->accumulate(g);
    });
}

Var sub(const Var& a, const Var& b) {
    check_arg(a->value.same_shape(b->value), "sub: shape mismatch");
    Tensor out = a->value - b->value;
    return make(std::move(out), {a, b}, [a, b](const Tensor& g, const Tensor&) {
        a->accumulate(g);
        if (b->requires_grad) {
            Tensor db = g * (-1.0);
            b->accumulate(db);
        }
    });
}

Var mul(const Var& a, const Var& b) {
    check_arg(a->value.same_shape(b->value), "mul: shape mismatch");
    Tensor out = a->value * b->value;
    return make(std::move(out), {a, b}, [a, b](const Tensor& g, const Tensor&) {
        if (a->requires_grad) a->accumulate(g * b->value);
        if (b->requires_grad) b->accumulate(g * a->value);
    });
}

Var scale(const Var& a, double s) {
    return make(a->value * s, {a}, [a, s](const Tensor& g, const Tensor&) {
        a->accumulate(g * s);
    });
}

Var add_scalar(const Var& a, double s) {
    return make(a->value + s, {a}, [a](const Tensor& g, const Tensor&) {
        a->accumulate(g);
    });
}

Var square(const Var& a) {
    return unary(a, [](double x) { return x * x; },
                 [](double x, double) { return 2.0 * x; });
}

Var relu(const Var& a) {
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var silu(const Var& a) {
    return unary(a,
                 [](double x) { return x / (1.0 + std::exp(-x)); },
                 [](double x, double) {
                     double s = 1.0 / (1.0 + std::exp(-x));
                     return s * (1.0 + x * (1.0 - s));
                 });
}

Var gelu(const Var& a) {
    constexpr double kInvSqrt2 = 0.7071067811865475244;
    constexpr double kInvSqrt2Pi = 0.3989422804014326779;
    return unary(a,
                 [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
                 [](double x, double) {
                     double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
                     double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
                     return cdf + x * pdf;
                 });
}

Var dropout(const Var& a, double p, Rng& rng, bool train) {
    if (!train || p <= 0.0) return a;
    check_arg(p < 1.0, "dropout: p must be < 1");
    Tensor mask(a->value.shape());
    const double keep = 1.0 - p;
    for (int64_t i = 0; i < mask.numel(); ++i)
        mask[i] = (rng.uniform() >= p) ? 1.0 / keep : 0.0;
    Tensor out = a->value * mask;
    return make(std::move(out), {a}, [a, mask](const Tensor& g, const Tensor&) {
        a->accumulate(g * mask);
    });
}

// ---- shape ----

Var reshape(const Var& a, Shape shape) {
    Tensor out = a->value.reshaped(shape);
    return make(std::move(out), {a}, [a](const Tensor& g, const Tensor&) {
        a->accumulate(g.reshaped(a->value.shape()));
    });
}

namespace {

// [..., m, n] -> [..., n, m] on a plain tensor.
Tensor transpose_last2_value(const Tensor& x) {
    const auto& s = x.shape();
    check_arg(s.size() >= 2, "transpose_last2 requires >= 2 dims");
    const int m = s[s.size() - 2], n = s[s.size() - 1];
    const int64_t batch = x.numel() / (static_cast<int64_t>(m) * n);
    Shape os = s;
    os[os.size() - 2] = n;
    os[os.size() - 1] = m;
    Tensor out(os);
    for (int64_t b = 0; b < batch; ++b) {
        const double* src = x.data() + b * m * n;
        double* dst = out.data() + b * m * n;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                dst[static_cast<int64_t>(j) * m + i] = src[static_cast<int64_t>(i) * n + j];
    }
    return out;
}

}  // namespace

Var transpose_last2(const Var& a) {
    Tensor out = transpose_last2_value(a->value);
    return make(std::move(out), {a}, [a](const Tensor& g, const Tensor&) {
        a->accumulate(transpose_last2_value(g));
    });
}

namespace {

Tensor permute_0213_value(const Tensor& x) {
    const auto& s = x.shape();
    check_arg(s.size() == 4, "permute_0213 requires 4 dims");
    const int A = s[0], B = s[1], C = s[2], D = s[3];
    Tensor out(Shape{A, C, B, D});
    for (int a_ = 0; a_ < A; ++a_)
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c) {
                const double* src = x.data() + (((static_cast<int64_t>(a_) * B + b) * C + c) * D);
                double* dst = out.data() + (((static_cast<int64_t>(a_) * C + c) * B + b) * D);
                std::copy(src, src + D, dst);
            }
    return out;
}

}  // namespace

Var permute_0213(const Var& a) {
    Tensor out = permute_0213_value(a->value);
    return make(std::move(out), {a}, [a](const Tensor& g, const Tensor&) {
        a->accumulate(permute_0213_value(g));  // the permutation is an involution
    });
}

Var slice_cols(const Var& a, int from, int to) {
    const auto& s = a->value.shape();
    check_arg(s.size() == 2 && 0 <= from && from < to && to <= s[1],
              "slice_cols: bad range");
    const int n = s[0], k = s[1], w = to - from;
    Tensor out(Shape{n, w});
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < w; ++c) out.at(r, c) = a->value.at(r, from + c);
    return make(std::move(out), {a}, [a, from, w, n, k](const Tensor& g, const Tensor&) {
        Tensor da(Shape{n, k});
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < w; ++c) da.at(r, from + c) = g.at(r, c);
        a->accumulate(da);
    });
}

Var concat_channels(const Var& a, const Var& b) {
    const auto& sa = a->value.shape();
    const auto& sb = b->value.shape();
    check_arg(sa.size() == 4 && sb.size() == 4 && sa[0] == sb[0] && sa[2] == sb[2] &&
                  sa[3] == sb[3],
              "concat_channels: incompatible shapes");
    const int B = sa[0], C1 = sa[1], C2 = sb[1], F = sa[2], T = sa[3];
    const int64_t plane = static_cast<int64_t>(F) * T;
    Tensor out(Shape{B, C1 + C2, F, T});
    for (int bb = 0; bb < B; ++bb) {
        std::copy(a->value.data() + bb * C1 * plane, a->value.data() + (bb + 1) * C1 * plane,
                  out.data() + static_cast<int64_t>(bb) * (C1 + C2) * plane);
        std::copy(b->value.data() + bb * C2 * plane, b->value.data() + (bb + 1) * C2 * plane,
                  out.data() + static_cast<int64_t>(bb) * (C1 + C2) * plane + C1 * plane);
    }
    return make(std::move(out), {a, b},
                [a, b, B, C1, C2, plane](const Tensor& g, const Tensor&) {
                    if (a->requires_grad) {
                        Tensor da(a->value.shape());
                        for (int bb = 0; bb < B; ++bb)
                            std::copy(g.data() + static_cast<int64_t>(bb) * (C1 + C2) * plane,
                                      g.data() + static_cast<int64_t>(bb) * (C1 + C2) * plane +
                                          C1 * plane,
                                      da.data() + static_cast<int64_t>(bb) * C1 * plane);
                        a->accumulate(da);
                    }
                    if (b->requires_grad) {
                        Tensor db(b->value.shape());
                        for (int bb = 0; bb < B; ++bb)
                            std::copy(g.data() + static_cast<int64_t>(bb) * (C1 + C2) * plane +
                                          C1 * plane,
                                      g.data() + static_cast<int64_t>(bb + 1) * (C1 + C2) * plane,
                                      db.data() + static_cast<int64_t>(bb) * C2 * plane);
                        b->accumulate(db);
                    }
                });
}

Var stack2_channels(const Var& a, const Var& b) {
    check_arg(a->value.same_shape(b->value) && a->value.ndim() == 2,
              "stack2_channels: expects two equal [F,T] tensors");
    const int F = a->value.rows(), T = a->value.cols();
    const int64_t plane = static_cast<int64_t>(F) * T;
    Tensor out(Shape{2, F, T});
    std::copy(a->value.data(), a->value.data() + plane, out.data());
    std::copy(b->value.data(), b->value.data() + plane, out.data() + plane);
    return make(std::move(out), {a, b}, [a, b, plane, F, T](const Tensor& g, const Tensor&) {
        if (a->requires_grad) {
            Tensor da(Shape{F, T});
            std::copy(g.data(), g.data() + plane, da.data());
            a->accumulate(da);
        }
        if (b->requires_grad) {
            Tensor db(Shape{F, T});
            std::copy(g.data() + plane, g.data() + 2 * plane, db.data());
            b->accumulate(db);
        }
    });
}

Var stack_batch(const std::vector<Var>& items) {
    check_arg(!items.empty(), "stack_batch: empty list");
    const Shape& s0 = items[0]->value.shape();
    for (const auto& v : items)
        check_arg(v->value.shape() == s0, "stack_batch: mismatched item shapes");
    const int64_t isz = items[0]->value.numel();
    Shape os;
    os.push_back(static_cast<int>(items.size()));
    os.insert(os.end(), s0.begin(), s0.end());
    Tensor out(os);
    for (size_t i = 0; i < items.size(); ++i)
        std::copy(items[i]->value.data(), items[i]->value.data() + isz,
                  out.data() + static_cast<int64_t>(i) * isz);
    std::vector<Var> parents = items;
    return make(std::move(out), parents, [parents, isz, s0](const Tensor& g, const Tensor&) {
        for (size_t i = 0; i < parents.size(); ++i) {
            if (!parents[i]->requires_grad) continue;
            Tensor gi(s0);
            std::copy(g.data() + static_cast<int64_t>(i) * isz,
                      g.data() + static_cast<int64_t>(i + 1) * isz, gi.data());
            parents[i]->accumulate(gi);
        }
    });
}

// ---- linear algebra ----

Var matmul(const Var& a, const Var& b) {
    const auto& sa = a->value.shape();
    const auto& sb = b->value.shape();
    check_arg(sa.size() == 2 && sb.size() == 2 && sa[1] == sb[0], "matmul: shape mismatch");
    const int m = sa[0], k = sa[1], n = sb[1];
    Tensor out(Shape{m, n});
    CMapM A(a->value.data(), m, k), B(b->value.data(), k, n);
    MapM(out.data(), m, n).noalias() = A * B;
    return make(std::move(out), {a, b}, [a, b, m, k, n](const Tensor& g, const Tensor&) {
        CMapM G(g.data(), m, n);
        if (a->requires_grad) {
            Tensor da(Shape{m, k});
            CMapM B(b->value.data(), k, n);
            MapM(da.data(), m, k).noalias() = G * B.transpose();
            a->accumulate(da);
        }
        if (b->requires_grad) {
            Tensor db(Shape{k, n});
            CMapM A(a->value.data(), m, k);
            MapM(db.data(), k, n).noalias() = A.transpose() * G;
            b->accumulate(db);
        }
    });
}

Var bmm(const Var& a, const Var& b) {
    const auto& sa = a->value.shape();
    const auto& sb = b->value.shape();
    check_arg(sa.size() == 3 && sb.size() == 3 && sa[0] == sb[0] && sa[2] == sb[1],
              "bmm: shape mismatch");
    const int nb = sa[0], m = sa[1], k = sa[2], n = sb[2];
    Tensor out(Shape{nb, m, n});
    for (int i = 0; i < nb; ++i) {
        CMapM A(a->value.data() + static_cast<int64_t>(i) * m * k, m, k);
        CMapM B(b->value.data() + static_cast<int64_t>(i) * k * n, k, n);
        MapM(out.data() + static_cast<int64_t>(i) * m * n, m, n).noalias() = A * B;
    }
    return make(std::move(out), {a, b}, [a, b, nb, m, k, n](const Tensor& g, const Tensor&) {
        if (a->requires_grad) {
            Tensor da(a->value.shape());
            for (int i = 0; i < nb; ++i) {
                CMapM G(g.data() + static_cast<int64_t>(i) * m * n, m, n);
                CMapM B(b->value.data() + static_cast<int64_t>(i) * k * n, k, n);
                MapM(da.data() + static_cast<int64_t>(i) * m * k, m, k).noalias() =
                    G * B.transpose();
            }
            a->accumulate(da);
        }
        if (b->requires_grad) {
            Tensor db(b->value.shape());
            for (int i = 0; i < nb; ++i) {
                CMapM G(g.data() + static_cast<int64_t>(i) * m * n, m, n);
                CMapM A(a->value.data() + static_cast<int64_t>(i) * m * k, m, k);
                MapM(db.data() + static_cast<int64_t>(i) * k * n, k, n).noalias() =
                    A.transpose() * G;
            }
            b->accumulate(db);
        }
    });
}

Var linear(const Var& x, const Var& w, const Var& b) {
    const auto& sw = w->value.shape();
    check_arg(sw.size() == 2, "linear: weight must be [in,out]");
    const int in = sw[0], out_dim = sw[1];
    const auto& sx = x->value.shape();
    check_arg(!sx.empty() && sx.back() == in, "linear: input last dim != in");
    const int64_t rows64 = x->value.numel() / in;
    const int rows = static_cast<int>(rows64);
    if (b) check_arg(b->value.shape() == Shape{out_dim}, "linear: bias shape");

    Shape os = sx;
    os.back() = out_dim;
    Tensor out(os);
    CMapM X(x->value.data(), rows, in), W(w->value.data(), in, out_dim);
    MapM Y(out.data(), rows, out_dim);
    Y.noalias() = X * W;
    if (b) Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b->value.data(), out_dim);

    std::vector<Var> parents = b ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
    return make(std::move(out), parents,
                [x, w, b, rows, in, out_dim](const Tensor& g, const Tensor&) {
                    CMapM G(g.data(), rows, out_dim);
                    if (x->requires_grad) {
                        Tensor dx(x->value.shape());
                        CMapM W(w->value.data(), in, out_dim);
                        MapM(dx.data(), rows, in).noalias() = G * W.transpose();
                        x->accumulate(dx);
                    }
                    if (w->requires_grad) {
                        Tensor dw(w->value.shape());
                        CMapM X(x->value.data(), rows, in);
                        MapM(dw.data(), in, out_dim).noalias() = X.transpose() * G;
                        w->accumulate(dw);
                    }
                    if (b && b->requires_grad) {
                        Tensor db(b->value.shape());
                        Eigen::Map<Eigen::RowVectorXd>(db.data(), out_dim) = G.colwise().sum();
                        b->accumulate(db);
                    }
                });
}

Var channel_linear(const Var& x, const Var& w, const Var& b) {
    const auto& sx = x->value.shape();
    const auto& sw = w->value.shape();
    check_arg(sx.size() == 4 && sw.size() == 2 && sx[1] == sw[0],
              "channel_linear: expects x [B,C,F,T], w [C,Co]");
    const int B = sx[0], Ci = sx[1], F = sx[2], T = sx[3], Co = sw[1];
    const int64_t P = static_cast<int64_t>(F) * T;
    if (b) check_arg(b->value.shape() == Shape{Co}, "channel_linear: bias shape");
    Tensor out(Shape{B, Co, F, T});
    CMapM W(w->value.data(), Ci, Co);
    for (int i = 0; i < B; ++i) {
        CMapM X(x->value.data() + i * Ci * P, Ci, P);
        MapM Y(out.data() + i * Co * P, Co, P);
        Y.noalias() = W.transpose() * X;
        if (b)
            Y.colwise() += Eigen::Map<const Eigen::VectorXd>(b->value.data(), Co);
    }
    std::vector<Var> parents = b ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
    return make(std::move(out), parents,
                [x, w, b, B, Ci, Co, P](const Tensor& g, const Tensor&) {
                    if (x->requires_grad) {
                        Tensor dx(x->value.shape());
                        CMapM W(w->value.data(), Ci, Co);
                        for (int i = 0; i < B; ++i) {
                            CMapM G(g.data() + i * Co * P, Co, P);
                            MapM(dx.data() + i * Ci * P, Ci, P).noalias() = W * G;
                        }
                        x->accumulate(dx);
                    }
                    if (w->requires_grad) {
                        Tensor dw(w->value.shape());
                        MapM DW(dw.data(), Ci, Co);
                        for (int i = 0; i < B; ++i) {
                            CMapM X(x->value.data() + i * Ci * P, Ci, P);
                            CMapM G(g.data() + i * Co * P, Co, P);
                            DW.noalias() += X * G.transpose();
                        }
                        w->accumulate(dw);
                    }
                    if (b && b->requires_grad) {
                        Tensor db(b->value.shape());
                        for (int i = 0; i < B; ++i) {
                            CMapM G(g.data() + i * Co * P, Co, P);
                            Eigen::Map<Eigen::VectorXd>(db.data(), Co) += G.rowwise().sum();
                        }
                        b->accumulate(db);
                    }
                });
}

// ---- normalization / softmax ----

Var layer_norm(const Var& x, double eps) {
    const auto& s = x->value.shape();
    check_arg(!s.empty(), "layer_norm: empty shape");
    const int d = s.back();
    const int64_t rows = x->value.numel() / d;
    Tensor out(s);
    Tensor inv_sigma(Shape{static_cast<int>(rows)});
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = x->value.data() + r * d;
        double* yr = out.data() + r * d;
        double mu = 0.0;
        for (int i = 0; i < d; ++i) mu += xr[i];
        mu /= d;
        double var = 0.0;
        for (int i = 0; i < d; ++i) var += (xr[i] - mu) * (xr[i] - mu);
        var /= d;
        const double is = 1.0 / std::sqrt(var + eps);
        inv_sigma[r] = is;
        for (int i = 0; i < d; ++i) yr[i] = (xr[i] - mu) * is;
    }
    return make(std::move(out), {x},
                [x, d, rows, inv_sigma](const Tensor& g, const Tensor& y) {
                    Tensor dx(x->value.shape());
                    for (int64_t r = 0; r < rows; ++r) {
                        const double* gr = g.data() + r * d;
                        const double* yr = y.data() + r * d;
                        double* dr = dx.data() + r * d;
                        double mg = 0.0, mgy = 0.0;
                        for (int i = 0; i < d; ++i) {
                            mg += gr[i];
                            mgy += gr[i] * yr[i];
                        }
                        mg /= d;
                        mgy /= d;
                        const double is = inv_sigma[r];
                        for (int i = 0; i < d; ++i)
                            dr[i] = is * (gr[i] - mg - yr[i] * mgy);
                    }
                    x->accumulate(dx);
                });
}

Var group_norm(const Var& x, int groups, const Var& gamma, const Var& beta, double eps) {
    const auto& s = x->value.shape();
    check_arg(s.size() == 4, "group_norm: expects [B,C,F,T]");
    const int B = s[0], C = s[1], F = s[2], T = s[3];
    check_arg(C % groups == 0, "group_norm: C not divisible by groups");
    check_arg(gamma->value.shape() == Shape{C} && beta->value.shape() == Shape{C},
              "group_norm: affine shape");
    const int cg = C / groups;
    const int64_t plane = static_cast<int64_t>(F) * T;
    const int64_t gsz = cg * plane;

    Tensor xhat(s);
    Tensor inv_sigma(Shape{B, groups});
    Tensor out(s);
    for (int bb = 0; bb < B; ++bb) {
        for (int gr = 0; gr < groups; ++gr) {
            const double* xs = x->value.data() + (static_cast<int64_t>(bb) * C + gr * cg) * plane;
            double mu = 0.0;
            for (int64_t i = 0; i < gsz; ++i) mu += xs[i];
            mu /= static_cast<double>(gsz);
            double var = 0.0;
            for (int64_t i = 0; i < gsz; ++i) var += (xs[i] - mu) * (xs[i] - mu);
            var /= static_cast<double>(gsz);
            const double is = 1.0 / std::sqrt(var + eps);
            inv_sigma.at(bb, gr) = is;
            double* xh = xhat.data() + (static_cast<int64_t>(bb) * C + gr * cg) * plane;
            for (int64_t i = 0; i < gsz; ++i) xh[i] = (xs[i] - mu) * is;
        }
        for (int c = 0; c < C; ++c) {
            const double gm = gamma->value[c], bt = beta->value[c];
            const double* xh = xhat.data() + (static_cast<int64_t>(bb) * C + c) * plane;
            double* ys = out.data() + (static_cast<int64_t>(bb) * C + c) * plane;
            for (int64_t i = 0; i < plane; ++i) ys[i] = gm * xh[i] + bt;
        }
    }
    return make(
        std::move(out), {x, gamma, beta},
        [x, gamma, beta, B, C, groups, cg, plane, gsz, xhat, inv_sigma](const Tensor& g,
                                                                        const Tensor&) {
            if (gamma->requires_grad || beta->requires_grad) {
                Tensor dgm(Shape{C}), dbt(Shape{C});
                for (int bb = 0; bb < B; ++bb)
                    for (int c = 0; c < C; ++c) {
                        const double* gs = g.data() + (static_cast<int64_t>(bb) * C + c) * plane;
                        const double* xh =
                            xhat.data() + (static_cast<int64_t>(bb) * C + c) * plane;
                        double sg = 0.0, sgx = 0.0;
                        for (int64_t i = 0; i < plane; ++i) {
                            sg += gs[i];
                            sgx += gs[i] * xh[i];
                        }
                        dbt[c] += sg;
                        dgm[c] += sgx;
                    }
                if (gamma->requires_grad) gamma->accumulate(dgm);
                if (beta->requires_grad) beta->accumulate(dbt);
            }
            if (x->requires_grad) {
                Tensor dx(x->value.shape());
                for (int bb = 0; bb < B; ++bb)
                    for (int gr = 0; gr < groups; ++gr) {
                        const int64_t base = (static_cast<int64_t>(bb) * C + gr * cg) * plane;
                        // dxhat restricted to this group
                        double mdg = 0.0, mdgx = 0.0;
                        for (int cc = 0; cc < cg; ++cc) {
                            const double gm = gamma->value[gr * cg + cc];
                            const double* gs = g.data() + base + cc * plane;
                            const double* xh = xhat.data() + base + cc * plane;
                            for (int64_t i = 0; i < plane; ++i) {
                                mdg += gs[i] * gm;
                                mdgx += gs[i] * gm * xh[i];
                            }
                        }
                        mdg /= static_cast<double>(gsz);
                        mdgx /= static_cast<double>(gsz);
                        const double is = inv_sigma.at(bb, gr);
                        for (int cc = 0; cc < cg; ++cc) {
                            const double gm = gamma->value[gr * cg + cc];
                            const double* gs = g.data() + base + cc * plane;
                            const double* xh = xhat.data() + base + cc * plane;
                            double* ds = dx.data() + base + cc * plane;
                            for (int64_t i = 0; i < plane; ++i)
                                ds[i] = is * (gs[i] * gm - mdg - xh[i] * mdgx);
                        }
                    }
                x->accumulate(dx);
            }
        });
}

Var softmax_last(const Var& x) {
    const auto& s = x->value.shape();
    const int d = s.back();
    const int64_t rows = x->value.numel() / d;
    Tensor out(s);
    for (int64_t r = 0; r < rows; ++r) {
        const double* xr = x->value.data() + r * d;
        double* yr = out.data() + r * d;
        double mx = xr[0];
        for (int i = 1; i < d; ++i) mx = std::max(mx, xr[i]);
        double sum = 0.0;
        for (int i = 0; i < d; ++i) {
            yr[i] = std::exp(xr[i] - mx);
            sum += yr[i];
        }
        for (int i = 0; i < d; ++i) yr[i] /= sum;
    }
    return make(std::move(out), {x}, [x, d, rows](const Tensor& g, const Tensor& y) {
        Tensor dx(x->value.shape());
        for (int64_t r = 0; r < rows; ++r) {
            const double* gr = g.data() + r * d;
            const double* yr = y.data() + r * d;
            double* dr = dx.data() + r * d;
            double dot = 0.0;
            for (int i = 0; i < d; ++i) dot += gr[i] * yr[i];
            for (int i = 0; i < d; ++i) dr[i] = yr[i] * (gr[i] - dot);
        }
        x->accumulate(dx);
    });
}

// ---- convolution ----

namespace {

// im2col for stride-1 same-padded 2-D conv: x [Ci,F,T] -> cols [Ci*kh*kw, F*T].
void im2col2d(const double* x, int Ci, int F, int T, int kh, int kw, double* cols) {
    const int ph = kh / 2, pw = kw / 2;
    const int64_t P = static_cast<int64_t>(F) * T;
    int64_t row = 0;
    for (int ci = 0; ci < Ci; ++ci)
        for (int dy = 0; dy < kh; ++dy)
            for (int dx = 0; dx < kw; ++dx, ++row) {
                double* dst = cols + row * P;
                const int fy = dy - ph, fx = dx - pw;
                for (int f = 0; f < F; ++f) {
                    const int sf = f + fy;
                    double* drow = dst + static_cast<int64_t>(f) * T;
                    if (sf < 0 || sf >= F) {
                        std::fill(drow, drow + T, 0.0);
                        continue;
                    }
                    const double* srow = x + (static_cast<int64_t>(ci) * F + sf) * T;
                    for (int t = 0; t < T; ++t) {
                        const int st = t + fx;
                        drow[t] = (st < 0 || st >= T) ? 0.0 : srow[st];
                    }
                }
            }
}

// Transpose of im2col: scatter-add cols [Ci*kh*kw, F*T] back into dx [Ci,F,T].
void col2im2d(const double* cols, int Ci, int F, int T, int kh, int kw, double* dx) {
    const int ph = kh / 2, pw = kw / 2;
    const int64_t P = static_cast<int64_t>(F) * T;
    int64_t row = 0;
    for (int ci = 0; ci < Ci; ++ci)
        for (int dy = 0; dy < kh; ++dy)
            for (int dx_k = 0; dx_k < kw; ++dx_k, ++row) {
                const double* src = cols + row * P;
                const int fy = dy - ph, fx = dx_k - pw;
                for (int f = 0; f < F; ++f) {
                    const int sf = f + fy;
                    if (sf < 0 || sf >= F) continue;
                    double* drow = dx + (static_cast<int64_t>(ci) * F + sf) * T;
                    const double* srow = src + static_cast<int64_t>(f) * T;
                    for (int t = 0; t < T; ++t) {
                        const int st = t + fx;
                        if (st >= 0 && st < T) drow[st] += srow[t];
                    }
                }
            }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b) {
    const auto& sx = x->value.shape();
    const auto& sw = w->value.shape();
    check_arg(sx.size() == 4 && sw.size() == 4 && sx[1] == sw[1],
              "conv2d: expects x [B,Ci,F,T], w [Co,Ci,kh,kw]");
    const int B = sx[0], Ci = sx[1], F = sx[2], T = sx[3];
    const int Co = sw[0], kh = sw[2], kw = sw[3];
    check_arg(kh % 2 == 1 && kw % 2 == 1, "conv2d: kernel dims must be odd");
    if (b) check_arg(b->value.shape() == Shape{Co}, "conv2d: bias shape");
    const int64_t P = static_cast<int64_t>(F) * T;
    const int K = Ci * kh * kw;

    Tensor out(Shape{B, Co, F, T});
    {
        std::vector<double> cols(static_cast<size_t>(K) * P);
        CMapM W(w->value.data(), Co, K);
        for (int i = 0; i < B; ++i) {
            im2col2d(x->value.data() + i * Ci * P, Ci, F, T, kh, kw, cols.data());
            CMapM Cm(cols.data(), K, P);
            MapM Y(out.data() + i * Co * P, Co, P);
            Y.noalias() = W * Cm;
            if (b) Y.colwise() += Eigen::Map<const Eigen::VectorXd>(b->value.data(), Co);
        }
    }
    std::vector<Var> parents = b ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
    return make(std::move(out), parents,
                [x, w, b, B, Ci, Co, F, T, kh, kw, K, P](const Tensor& g, const Tensor&) {
                    std::vector<double> cols(static_cast<size_t>(K) * P);
                    Tensor dw(w->value.shape());
                    Tensor dx;
                    if (x->requires_grad) dx = Tensor(x->value.shape());
                    Tensor db;
                    if (b && b->requires_grad) db = Tensor(b->value.shape());
                    MapM DW(dw.data(), Co, K);
                    CMapM W(w->value.data(), Co, K);
                    for (int i = 0; i < B; ++i) {
                        CMapM G(g.data() + i * Co * P, Co, P);
                        if (w->requires_grad) {
                            im2col2d(x->value.data() + i * Ci * P, Ci, F, T, kh, kw, cols.data());
                            CMapM Cm(cols.data(), K, P);
                            DW.noalias() += G * Cm.transpose();
                        }
                        if (x->requires_grad) {
                            MapM DC(cols.data(), K, P);
                            DC.noalias() = W.transpose() * G;
                            col2im2d(cols.data(), Ci, F, T, kh, kw, dx.data() + i * Ci * P);
                        }
                        if (b && b->requires_grad)
                            Eigen::Map<Eigen::VectorXd>(db.data(), Co) += G.rowwise().sum();
                    }
                    if (w->requires_grad) w->accumulate(dw);
                    if (x->requires_grad) x->accumulate(dx);
                    if (b && b->requires_grad) b->accumulate(db);
                });
}

Var conv1d(const Var& x, const Var& w, const Var& b) {
    const auto& sx = x->value.shape();
    const auto& sw = w->value.shape();
    check_arg(sx.size() == 2 && sw.size() == 3 && sx[1] == sw[1],
              "conv1d: expects x [N,Ci], w [Co,Ci,k]");
    const int N = sx[0], Ci = sx[1], Co = sw[0], k = sw[2];
    check_arg(k % 2 == 1, "conv1d: kernel must be odd");
    if (b) check_arg(b->value.shape() == Shape{Co}, "conv1d: bias shape");
    const int pad = k / 2, K = Ci * k;

    // cols [N, Ci*k]: row n holds x[n-pad .. n+pad] per channel.
    auto build_cols = [N, Ci, k, pad](const double* xv, double* cols) {
        for (int n = 0; n < N; ++n) {
            double* row = cols + static_cast<int64_t>(n) * Ci * k;
            for (int ci = 0; ci < Ci; ++ci)
                for (int j = 0; j < k; ++j) {
                    const int sn = n + j - pad;
                    row[ci * k + j] = (sn < 0 || sn >= N) ? 0.0 : xv[static_cast<int64_t>(sn) * Ci + ci];
                }
        }
    };

    Tensor out(Shape{N, Co});
    {
        std::vector<double> cols(static_cast<size_t>(N) * K);
        build_cols(x->value.data(), cols.data());
        CMapM Cm(cols.data(), N, K), W(w->value.data(), Co, K);
        MapM Y(out.data(), N, Co);
        Y.noalias() = Cm * W.transpose();
        if (b) Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b->value.data(), Co);
    }
    std::vector<Var> parents = b ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
    return make(std::move(out), parents,
                [x, w, b, N, Ci, Co, k, pad, K, build_cols](const Tensor& g, const Tensor&) {
                    CMapM G(g.data(), N, Co);
                    if (w->requires_grad) {
                        std::vector<double> cols(static_cast<size_t>(N) * K);
                        build_cols(x->value.data(), cols.data());
                        Tensor dw(w->value.shape());
                        CMapM Cm(cols.data(), N, K);
                        MapM(dw.data(), Co, K).noalias() = G.transpose() * Cm;
                        w->accumulate(dw);
                    }
                    if (x->requires_grad) {
                        std::vector<double> dcols(static_cast<size_t>(N) * K);
                        CMapM W(w->value.data(), Co, K);
                        MapM(dcols.data(), N, K).noalias() = G * W;
                        Tensor dx(x->value.shape());
                        for (int n = 0; n < N; ++n) {
                            const double* row = dcols.data() + static_cast<int64_t>(n) * K;
                            for (int ci = 0; ci < Ci; ++ci)
                                for (int j = 0; j < k; ++j) {
                                    const int sn = n + j - pad;
                                    if (sn >= 0 && sn < N)
                                        dx[static_cast<int64_t>(sn) * Ci + ci] += row[ci * k + j];
                                }
                        }
                        x->accumulate(dx);
                    }
                    if (b && b->requires_grad) {
                        Tensor db(b->value.shape());
                        Eigen::Map<Eigen::RowVectorXd>(db.data(), Co) = G.colwise().sum();
                        b->accumulate(db);
                    }
                });
}

Var avg_pool2(const Var& x) {
    const auto& s = x->value.shape();
    check_arg(s.size() == 4 && s[2] % 2 == 0 && s[3] % 2 == 0,
              "avg_pool2: expects even [B,C,F,T]");
    const int B = s[0], C = s[1], F = s[2], T = s[3];
    const int Fo = F / 2, To = T / 2;
    Tensor out(Shape{B, C, Fo, To});
    for (int bc = 0; bc < B * C; ++bc) {
        const double* xs = x->value.data() + static_cast<int64_t>(bc) * F * T;
        double* ys = out.data() + static_cast<int64_t>(bc) * Fo * To;
        for (int f = 0; f < Fo; ++f)
            for (int t = 0; t < To; ++t)
                ys[static_cast<int64_t>(f) * To + t] =
                    0.25 * (xs[static_cast<int64_t>(2 * f) * T + 2 * t] +
                            xs[static_cast<int64_t>(2 * f) * T + 2 * t + 1] +
                            xs[static_cast<int64_t>(2 * f + 1) * T + 2 * t] +
                            xs[static_cast<int64_t>(2 * f + 1) * T + 2 * t + 1]);
    }
    return make(std::move(out), {x}, [x, B, C, F, T, Fo, To](const Tensor& g, const Tensor&) {
        Tensor dx(x->value.shape());
        for (int bc = 0; bc < B * C; ++bc) {
            const double* gs = g.data() + static_cast<int64_t>(bc) * Fo * To;
            double* ds = dx.data() + static_cast<int64_t>(bc) * F * T;
            for (int f = 0; f < Fo; ++f)
                for (int t = 0; t < To; ++t) {
                    const double v = 0.25 * gs[static_cast<int64_t>(f) * To + t];
                    ds[static_cast<int64_t>(2 * f) * T + 2 * t] += v;
                    ds[static_cast<int64_t>(2 * f) * T + 2 * t + 1] += v;
                    ds[static_cast<int64_t>(2 * f + 1) * T + 2 * t] += v;
                    ds[static_cast<int64_t>(2 * f + 1) * T + 2 * t + 1] += v;
                }
        }
        x->accumulate(dx);
    });
}

Var upsample_nearest2(const Var& x) {
    const auto& s = x->value.shape();
    check_arg(s.size() == 4, "upsample_nearest2: expects [B,C,F,T]");
    const int B = s[0], C = s[1], F = s[2], T = s[3];
    Tensor out(Shape{B, C, 2 * F, 2 * T});
    for (int bc = 0; bc < B * C; ++bc) {
        const double* xs = x->value.data() + static_cast<int64_t>(bc) * F * T;
        double* ys = out.data() + static_cast<int64_t>(bc) * 4 * F * T;
        for (int f = 0; f < F; ++f)
            for (int t = 0; t < T; ++t) {
                const double v = xs[static_cast<int64_t>(f) * T + t];
                ys[static_cast<int64_t>(2 * f) * 2 * T + 2 * t] = v;
                ys[static_cast<int64_t>(2 * f) * 2 * T + 2 * t + 1] = v;
                ys[static_cast<int64_t>(2 * f + 1) * 2 * T + 2 * t] = v;
                ys[static_cast<int64_t>(2 * f + 1) * 2 * T + 2 * t + 1] = v;
            }
    }
    return make(std::move(out), {x}, [x, B, C, F, T](const Tensor& g, const Tensor&) {
        Tensor dx(x->value.shape());
        for (int bc = 0; bc < B * C; ++bc) {
            const double* gs = g.data() + static_cast<int64_t>(bc) * 4 * F * T;
            double* ds = dx.data() + static_cast<int64_t>(bc) * F * T;
            for (int f = 0; f < F; ++f)
                for (int t = 0; t < T; ++t)
                    ds[static_cast<int64_t>(f) * T + t] =
                        gs[static_cast<int64_t>(2 * f) * 2 * T + 2 * t] +
                        gs[static_cast<int64_t>(2 * f) * 2 * T + 2 * t + 1] +
                        gs[static_cast<int64_t>(2 * f + 1) * 2 * T + 2 * t] +
                        gs[static_cast<int64_t>(2 * f + 1) * 2 * T + 2 * t + 1];
        }
        x->accumulate(dx);
    });
}

// ---- broadcasting ----

namespace {

void check_rowvec(const Var& x, const Var& v, const char* op) {
    check_arg(x->value.ndim() == 2 && v->value.ndim() == 1 &&
                  x->value.cols() == v->value.dim(0),
              std::string(op) + ": expects [N,D] with [D]");
}

void check_bvec(const Var& x, const Var& v, const char* op) {
    check_arg(x->value.ndim() == 3 && v->value.ndim() == 2 &&
                  x->value.dim(0) == v->value.dim(0) && x->value.dim(2) == v->value.dim(1),
              std::string(op) + ": expects [B,N,D] with [B,D]");
}

}  // namespace

Var add_rowvec(const Var& x, const Var& v) {
    check_rowvec(x, v, "add_rowvec");
    const int n = x->value.rows(), d = x->value.cols();
    Tensor out = x->value;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) out.at(r, c) += v->value[c];
    return make(std::move(out), {x, v}, [x, v, n, d](const Tensor& g, const Tensor&) {
        if (x->requires_grad) x->accumulate(g);
        if (v->requires_grad) {
            Tensor dv(v->value.shape());
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < d; ++c) dv[c] += g.at(r, c);
            v->accumulate(dv);
        }
    });
}

Var mul_rowvec(const Var& x, const Var& v) {
    check_rowvec(x, v, "mul_rowvec");
    const int n = x->value.rows(), d = x->value.cols();
    Tensor out = x->value;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) out.at(r, c) *= v->value[c];
    return make(std::move(out), {x, v}, [x, v, n, d](const Tensor& g, const Tensor&) {
        if (x->requires_grad) {
            Tensor dx(x->value.shape());
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < d; ++c) dx.at(r, c) = g.at(r, c) * v->value[c];
            x->accumulate(dx);
        }
        if (v->requires_grad) {
            Tensor dv(v->value.shape());
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < d; ++c) dv[c] += g.at(r, c) * x->value.at(r, c);
            v->accumulate(dv);
        }
    });
}

Var add_bvec(const Var& x, const Var& v) {
    check_bvec(x, v, "add_bvec");
    const int B = x->value.dim(0), N = x->value.dim(1), D = x->value.dim(2);
    Tensor out = x->value;
    for (int b = 0; b < B; ++b)
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < D; ++c)
                out[(static_cast<int64_t>(b) * N + n) * D + c] += v->value.at(b, c);
    return make(std::move(out), {x, v}, [x, v, B, N, D](const Tensor& g, const Tensor&) {
        if (x->requires_grad) x->accumulate(g);
        if (v->requires_grad) {
            Tensor dv(v->value.shape());
            for (int b = 0; b < B; ++b)
                for (int n = 0; n < N; ++n)
                    for (int c = 0; c < D; ++c)
                        dv.at(b, c) += g[(static_cast<int64_t>(b) * N + n) * D + c];
            v->accumulate(dv);
        }
    });
}

Var mul_bvec(const Var& x, const Var& v) {
    check_bvec(x, v, "mul_bvec");
    const int B = x->value.dim(0), N = x->value.dim(1), D = x->value.dim(2);
    Tensor out = x->value;
    for (int b = 0; b < B; ++b)
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < D; ++c)
                out[(static_cast<int64_t>(b) * N + n) * D + c] *= v->value.at(b, c);
    return make(std::move(out), {x, v}, [x, v, B, N, D](const Tensor& g, const Tensor&) {
        if (x->requires_grad) {
            Tensor dx(x->value.shape());
            for (int b = 0; b < B; ++b)
                for (int n = 0; n < N; ++n)
                    for (int c = 0; c < D; ++c) {
                        const int64_t i = (static_cast<int64_t>(b) * N + n) * D + c;
                        dx[i] = g[i] * v->value.at(b, c);
                    }
            x->accumulate(dx);
        }
        if (v->requires_grad) {
            Tensor dv(v->value.shape());
            for (int b = 0; b < B; ++b)
                for (int n = 0; n < N; ++n)
                    for (int c = 0; c < D; ++c) {
                        const int64_t i = (static_cast<int64_t>(b) * N + n) * D + c;
                        dv.at(b, c) += g[i] * x->value[i];
                    }
            v->accumulate(dv);
        }
    });
}

// ---- gather / scatter ----

Var embedding(const Var& table, const std::vector<int>& ids) {
    const auto& s = table->value.shape();
    check_arg(s.size() == 2, "embedding: table must be [V,D]");
    const int V = s[0], D = s[1];
    for (int id : ids)
        check_arg(id >= 0 && id < V, "embedding: token id " + std::to_string(id) +
                                         " out of vocabulary (size " + std::to_string(V) + ")");
    const int n = static_cast<int>(ids.size());
    Tensor out(Shape{n, D});
    for (int i = 0; i < n; ++i)
        std::copy(table->value.data() + static_cast<int64_t>(ids[i]) * D,
                  table->value.data() + static_cast<int64_t>(ids[i] + 1) * D,
                  out.data() + static_cast<int64_t>(i) * D);
    return make(std::move(out), {table}, [table, ids, D](const Tensor& g, const Tensor&) {
        Tensor dt(table->value.shape());
        for (size_t i = 0; i < ids.size(); ++i) {
            double* row = dt.data() + static_cast<int64_t>(ids[i]) * D;
            const double* gr = g.data() + static_cast<int64_t>(i) * D;
            for (int c = 0; c < D; ++c) row[c] += gr[c];
        }
        table->accumulate(dt);
    });
}

Var repeat_rows(const Var& x, const std::vector<int>& counts) {
    const auto& s = x->value.shape();
    check_arg(s.size() == 2 && static_cast<int>(counts.size()) == s[0],
              "repeat_rows: counts size must equal rows");
    int total = 0;
    for (int c : counts) {
        check_arg(c >= 1, "repeat_rows: every count must be >= 1");
        total += c;
    }
    const int D = s[1];
    Tensor out(Shape{total, D});
    int r = 0;
    for (size_t i = 0; i < counts.size(); ++i)
        for (int k = 0; k < counts[i]; ++k, ++r)
            std::copy(x->value.data() + static_cast<int64_t>(i) * D,
                      x->value.data() + static_cast<int64_t>(i + 1) * D,
                      out.data() + static_cast<int64_t>(r) * D);
    return make(std::move(out), {x}, [x, counts, D](const Tensor& g, const Tensor&) {
        Tensor dx(x->value.shape());
        int r = 0;
        for (size_t i = 0; i < counts.size(); ++i)
            for (int k = 0; k < counts[i]; ++k, ++r) {
                double* row = dx.data() + static_cast<int64_t>(i) * D;
                const double* gr = g.data() + static_cast<int64_t>(r) * D;
                for (int c = 0; c < D; ++c) row[c] += gr[c];
            }
        x->accumulate(dx);
    });
}

Var pad_rows(const Var& x, int n_total, double value) {
    const auto& s = x->value.shape();
    check_arg(s.size() == 2 && n_total >= s[0], "pad_rows: n_total < rows");
    const int n = s[0], D = s[1];
    if (n_total == n) return x;
    Tensor out = Tensor::full(Shape{n_total, D}, value);
    std::copy(x->value.data(), x->value.data() + static_cast<int64_t>(n) * D, out.data());
    return make(std::move(out), {x}, [x, n, D](const Tensor& g, const Tensor&) {
        Tensor dx(x->value.shape());
        std::copy(g.data(), g.data() + static_cast<int64_t>(n) * D, dx.data());
        x->accumulate(dx);
    });
}

Var detach(const Var& x) { return constant(x->value); }

// ---- reductions ----

Var sum(const Var& x) {
    Tensor out = Tensor::from({1}, {x->value.sum()});
    return make(std::move(out), {x}, [x](const Tensor& g, const Tensor&) {
        x->accumulate(Tensor::full(x->value.shape(), g[0]));
    });
}

Var mean(const Var& x) {
    const double n = static_cast<double>(x->value.numel());
    Tensor out = Tensor::from({1}, {x->value.sum() / n});
    return make(std::move(out), {x}, [x, n](const Tensor& g, const Tensor&) {
        x->accumulate(Tensor::full(x->value.shape(), g[0] / n));
    });
}

Var mean_squared_error(const Var& a, const Var& b) {
    check_arg(a->value.same_shape(b->value), "mean_squared_error: shape mismatch " +
                                                 a->value.shape_str() + " vs " +
                                                 b->value.shape_str());
    const int64_t n = a->value.numel();
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = a->value[i] - b->value[i];
        acc += d * d;
    }
    Tensor out = Tensor::from({1}, {acc / static_cast<double>(n)});
    return make(std::move(out), {a, b}, [a, b, n](const Tensor& g, const Tensor&) {
        const double c = 2.0 * g[0] / static_cast<double>(n);
        if (a->requires_grad) {
            Tensor da(a->value.shape());
            for (int64_t i = 0; i < n; ++i) da[i] = c * (a->value[i] - b->value[i]);
            a->accumulate(da);
        }
        if (b->requires_grad) {
            Tensor db(b->value.shape());
            for (int64_t i = 0; i < n; ++i) db[i] = c * (b->value[i] - a->value[i]);
            b->accumulate(db);
        }
    });
}

// ---- patchify ----

namespace {

void patchify_forward(const Tensor& x, int pf, int pt, Tensor& out) {
    const int B = x.dim(0), C = x.dim(1), F = x.dim(2), T = x.dim(3);
    const int R = F / pf, Cc = T / pt;
    const int pd = C * pf * pt;
    for (int b = 0; b < B; ++b)
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < Cc; ++c) {
                const int tok = r * Cc + c;
                double* dst = out.data() +
                              (static_cast<int64_t>(b) * R * Cc + tok) * pd;
                for (int ch = 0; ch < C; ++ch)
                    for (int di = 0; di < pf; ++di)
                        for (int dj = 0; dj < pt; ++dj)
                            dst[(ch * pf + di) * pt + dj] =
                                x[((static_cast<int64_t>(b) * C + ch) * F + r * pf + di) * T +
                                  c * pt + dj];
            }
}

void patchify_backward(const Tensor& g, int B, int C, int F, int T, int pf, int pt,
                       Tensor& dx) {
    const int R = F / pf, Cc = T / pt;
    const int pd = C * pf * pt;
    for (int b = 0; b < B; ++b)
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < Cc; ++c) {
                const int tok = r * Cc + c;
                const double* src =
                    g.data() + (static_cast<int64_t>(b) * R * Cc + tok) * pd;
                for (int ch = 0; ch < C; ++ch)
                    for (int di = 0; di < pf; ++di)
                        for (int dj = 0; dj < pt; ++dj)
                            dx[((static_cast<int64_t>(b) * C + ch) * F + r * pf + di) * T +
                               c * pt + dj] = src[(ch * pf + di) * pt + dj];
            }
}

}  // namespace

Var patchify(const Var& x, int pf, int pt) {
    const auto& s = x->value.shape();
    check_arg(s.size() == 4, "patchify: expects [B,C,F,T]");
    check_arg(pf > 0 && pt > 0 && s[2] % pf == 0 && s[3] % pt == 0,
              "patchify: spatial dims " + std::to_string(s[2]) + "x" + std::to_string(s[3]) +
                  " not divisible by patch " + std::to_string(pf) + "x" + std::to_string(pt));
    const int B = s[0], C = s[1], F = s[2], T = s[3];
    const int R = F / pf, Cc = T / pt;
    Tensor out(Shape{B, R * Cc, C * pf * pt});
    patchify_forward(x->value, pf, pt, out);
    return make(std::move(out), {x}, [x, B, C, F, T, pf, pt](const Tensor& g, const Tensor&) {
        Tensor dx(x->value.shape());
        patchify_backward(g, B, C, F, T, pf, pt, dx);
        x->accumulate(dx);
    });
}

Var unpatchify(const Var& tokens, int channels, int f, int t, int pf, int pt) {
    const auto& s = tokens->value.shape();
    check_arg(s.size() == 3, "unpatchify: expects [B,N,pd]");
    const int B = s[0];
    check_arg(f % pf == 0 && t % pt == 0 && s[1] == (f / pf) * (t / pt) &&
                  s[2] == channels * pf * pt,
              "unpatchify: token grid does not match target dims");
    Tensor out(Shape{B, channels, f, t});
    patchify_backward(tokens->value, B, channels, f, t, pf, pt, out);
    return make(std::move(out), {tokens},
                [tokens, pf, pt, B, channels, f, t](const Tensor& g, const Tensor&) {
                    Tensor dt(tokens->value.shape());
                    patchify_forward(g, pf, pt, dt);
                    tokens->accumulate(dt);
                });
}

}  // namespace udit::ag
