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

#include <doctest.h>

#include <cmath>
#include <functional>
#include <stdexcept>

#include "udit/core/autograd.hpp"
#include "udit/core/rng.hpp"
#include "udit/core/tensor.hpp"

using udit::Rng;
using udit::Shape;
using udit::Tensor;
namespace ag = udit::ag;

namespace {

// Central-difference gradient check for a scalar-valued graph builder.
// Perturbs every element of every param, so keep the test tensors small.
void check_grads(const std::vector<ag::Var>& params,
                 const std::function<ag::Var()>& build, double h = 1e-5,
                 double tol = 1e-6) {
    for (const auto& p : params) p->grad = Tensor();
    ag::Var loss = build();
    REQUIRE(loss->value.numel() == 1);
    ag::backward(loss);

    auto eval = [&build]() {
        ag::NoGradGuard ng;
        return build()->value[0];
    };
    for (size_t pi = 0; pi < params.size(); ++pi) {
        const auto& p = params[pi];
        REQUIRE(!p->grad.empty());
        for (int64_t i = 0; i < p->value.numel(); ++i) {
            const double orig = p->value[i];
            p->value[i] = orig + h;
            const double lp = eval();
            p->value[i] = orig - h;
            const double lm = eval();
            p->value[i] = orig;
            const double num = (lp - lm) / (2.0 * h);
            const double ana = p->grad[i];
            const double denom = std::max({1.0, std::fabs(num), std::fabs(ana)});
            INFO("param ", pi, " elem ", i, " numeric ", num, " analytic ", ana);
            CHECK(std::fabs(num - ana) / denom < tol);
        }
    }
}

// Standard-normal draws pushed away from zero so kinked activations (relu)
// stay on one side of the kink under the finite-difference step.
Tensor randn_away_from_zero(Shape shape, Rng& rng, double margin = 0.2) {
    Tensor t = Tensor::randn(std::move(shape), rng);
    for (int64_t i = 0; i < t.numel(); ++i)
        if (std::fabs(t[i]) < margin) t[i] = t[i] < 0.0 ? -margin : margin;
    return t;
}

// Fixed random projection turning any tensor into a scalar with non-degenerate
// gradients (sum alone would zero out softmax/norm directions).
ag::Var project(const ag::Var& y, uint64_t seed) {
    Rng rng(seed);
    ag::Var w = ag::constant(Tensor::randn(y->value.shape(), rng));
    return ag::sum(ag::mul(y, w));
}

}  // namespace

TEST_CASE("rng: determinism and serialization") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

    Rng c(7);
    for (int i = 0; i < 5; ++i) c.normal();
    const std::string state = c.serialize();
    std::vector<double> expect;
    for (int i = 0; i < 8; ++i) expect.push_back(c.normal());

    Rng d(0);
    d.deserialize(state);
    for (int i = 0; i < 8; ++i) CHECK(d.normal() == expect[static_cast<size_t>(i)]);

    CHECK_THROWS_AS(d.deserialize("not a valid state"), std::runtime_error);
}

TEST_CASE("rng: distribution sanity") {
    Rng rng(1);
    double sum = 0.0, sumsq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.03);
    CHECK(std::fabs(var - 1.0) < 0.05);

    Rng r2(2);
    for (int i = 0; i < 1000; ++i) {
        const double u = r2.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r2.integer(5) < 5);
    }
}

TEST_CASE("rng: derived seeds differ per stream") {
    CHECK(udit::derive_seed(123, 0) != udit::derive_seed(123, 1));
    CHECK(udit::derive_seed(123, 0) != udit::derive_seed(124, 0));
    CHECK(udit::derive_seed(123, 5) == udit::derive_seed(123, 5));
}

TEST_CASE("tensor: construction and access") {
    Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(t.at(1, 2) == 6.0);
    CHECK(t.sum() == 21.0);
    CHECK(t.mean() == doctest::Approx(3.5));
    CHECK(t.min() == 1.0);
    CHECK(t.max() == 6.0);
    CHECK(t.all_finite());

    Tensor tt = t.transposed_2d();
    CHECK(tt.shape() == Shape{3, 2});
    CHECK(tt.at(2, 1) == 6.0);
    CHECK(tt.at(0, 1) == 4.0);

    Tensor r = t.reshaped({3, 2});
    CHECK(r.at(2, 1) == 6.0);

    CHECK_THROWS_AS(t.reshaped({4, 2}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor(Shape{2, -1}), std::invalid_argument);

    Tensor f = Tensor::full({2, 2}, 3.0);
    CHECK(f.sum() == 12.0);
    Tensor nanned = Tensor::from({2}, {1.0, std::nan("")});
    CHECK(!nanned.all_finite());
}

TEST_CASE("tensor: elementwise operators") {
    Tensor a = Tensor::vec({1, 2, 3});
    Tensor b = Tensor::vec({4, 5, 6});
    CHECK((a + b).sum() == 21.0);
    CHECK((b - a).sum() == 9.0);
    CHECK((a * b).sum() == 4.0 + 10.0 + 18.0);
    CHECK((a * 2.0).sum() == 12.0);
    CHECK((a + 1.0).sum() == 9.0);
    CHECK_THROWS_AS(a + Tensor::vec({1, 2}), std::invalid_argument);
}

TEST_CASE("autograd: forward values of activations") {
    ag::Var x = ag::constant(Tensor::vec({-1.0, 0.0, 1.0}));
    Tensor rl = ag::relu(x)->value;
    CHECK(rl[0] == 0.0);
    CHECK(rl[1] == 0.0);
    CHECK(rl[2] == 1.0);

    Tensor si = ag::silu(x)->value;
    CHECK(si[1] == 0.0);
    CHECK(si[2] == doctest::Approx(0.7310585786300049).epsilon(1e-12));

    Tensor ge = ag::gelu(x)->value;
    CHECK(ge[1] == 0.0);
    CHECK(ge[2] == doctest::Approx(0.8413447460685429).epsilon(1e-12));
    // gelu(-1) = -Phi(-1) = -(1 - Phi(1))
    CHECK(ge[0] == doctest::Approx(-0.15865525393145707).epsilon(1e-12));
}

TEST_CASE("autograd: matmul and softmax values") {
    ag::Var a = ag::constant(Tensor::from({2, 2}, {1, 2, 3, 4}));
    ag::Var b = ag::constant(Tensor::from({2, 2}, {5, 6, 7, 8}));
    Tensor c = ag::matmul(a, b)->value;
    CHECK(c.at(0, 0) == 19.0);
    CHECK(c.at(0, 1) == 22.0);
    CHECK(c.at(1, 0) == 43.0);
    CHECK(c.at(1, 1) == 50.0);

    ag::Var s = ag::softmax_last(ag::constant(Tensor::from({1, 3}, {1, 2, 3})));
    CHECK(s->value[0] == doctest::Approx(0.09003057317038046).epsilon(1e-10));
    CHECK(s->value[1] == doctest::Approx(0.24472847105479767).epsilon(1e-10));
    CHECK(s->value[2] == doctest::Approx(0.6652409557748219).epsilon(1e-10));
    CHECK(s->value[0] + s->value[1] + s->value[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("autograd: layer_norm normalizes rows") {
    ag::Var x = ag::constant(Tensor::from({1, 4}, {1, 2, 3, 4}));
    Tensor y = ag::layer_norm(x)->value;
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < 4; ++i) mean += y[i] / 4.0;
    for (int i = 0; i < 4; ++i) var += y[i] * y[i] / 4.0;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(y[0] == doctest::Approx(-1.3416).epsilon(1e-3));
}

TEST_CASE("autograd: conv identity kernels") {
    Rng rng(11);
    Tensor xv = Tensor::randn({1, 1, 4, 6}, rng);
    ag::Var x = ag::constant(xv);
    Tensor wv = Tensor::zeros({1, 1, 3, 3});
    wv[4] = 1.0;  // center tap
    Tensor y = ag::conv2d(x, ag::constant(wv), nullptr)->value;
    for (int64_t i = 0; i < xv.numel(); ++i) CHECK(y[i] == xv[i]);

    // All-ones 3x3 kernel over an all-ones 2x2 input: every output sees the
    // whole (zero-padded) input, so every entry is 4.
    Tensor ones = Tensor::full({1, 1, 2, 2}, 1.0);
    Tensor w1 = Tensor::full({1, 1, 3, 3}, 1.0);
    Tensor y1 = ag::conv2d(ag::constant(ones), ag::constant(w1), nullptr)->value;
    for (int64_t i = 0; i < 4; ++i) CHECK(y1[i] == 4.0);

    Tensor x1v = Tensor::randn({5, 2}, rng);
    Tensor w1d = Tensor::zeros({2, 2, 3});
    w1d[(0 * 2 + 0) * 3 + 1] = 1.0;
    w1d[(1 * 2 + 1) * 3 + 1] = 1.0;
    Tensor y1d = ag::conv1d(ag::constant(x1v), ag::constant(w1d), nullptr)->value;
    for (int64_t i = 0; i < x1v.numel(); ++i) CHECK(y1d[i] == x1v[i]);
}

TEST_CASE("autograd: pooling and upsampling are adjoint-consistent") {
    Rng rng(13);
    Tensor xv = Tensor::randn({2, 3, 4, 6}, rng);
    ag::Var x = ag::constant(xv);
    Tensor down = ag::avg_pool2(x)->value;
    CHECK(down.shape() == Shape{2, 3, 2, 3});
    Tensor up = ag::upsample_nearest2(ag::constant(down))->value;
    CHECK(up.shape() == Shape{2, 3, 4, 6});
    // avg_pool(upsample(z)) == z exactly
    Tensor back = ag::avg_pool2(ag::constant(up))->value;
    for (int64_t i = 0; i < down.numel(); ++i) CHECK(back[i] == down[i]);

    Tensor c = Tensor::full({1, 1, 2, 2}, 5.0);
    CHECK(ag::avg_pool2(ag::constant(c))->value[0] == 5.0);
}

TEST_CASE("autograd: patchify layout and round trip") {
    Tensor x(Shape{1, 1, 2, 4});
    for (int64_t i = 0; i < 8; ++i) x[i] = static_cast<double>(i);
    Tensor tok = ag::patchify(ag::constant(x), 2, 2)->value;
    CHECK(tok.shape() == Shape{1, 2, 4});
    // Patch (frequency rows 0-1, time cols 0-1) then (rows 0-1, cols 2-3).
    CHECK(tok[0] == 0.0);
    CHECK(tok[1] == 1.0);
    CHECK(tok[2] == 4.0);
    CHECK(tok[3] == 5.0);
    CHECK(tok[4] == 2.0);
    CHECK(tok[5] == 3.0);
    CHECK(tok[6] == 6.0);
    CHECK(tok[7] == 7.0);

    Rng rng(17);
    Tensor big = Tensor::randn({2, 3, 8, 12}, rng);
    Tensor rt = ag::unpatchify(ag::patchify(ag::constant(big), 4, 2), 3, 8, 12, 4, 2)->value;
    for (int64_t i = 0; i < big.numel(); ++i) CHECK(rt[i] == big[i]);

    CHECK_THROWS_AS(ag::patchify(ag::constant(big), 3, 2), std::invalid_argument);
}

TEST_CASE("autograd: gather ops") {
    Tensor table = Tensor::from({3, 2}, {10, 11, 20, 21, 30, 31});
    Tensor e = ag::embedding(ag::constant(table), {2, 0, 2})->value;
    CHECK(e.shape() == Shape{3, 2});
    CHECK(e.at(0, 0) == 30.0);
    CHECK(e.at(1, 1) == 11.0);
    CHECK(e.at(2, 0) == 30.0);
    CHECK_THROWS_AS(ag::embedding(ag::constant(table), {3}), std::invalid_argument);

    Tensor x = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor r = ag::repeat_rows(ag::constant(x), {2, 3})->value;
    CHECK(r.shape() == Shape{5, 2});
    CHECK(r.at(0, 0) == 1.0);
    CHECK(r.at(1, 0) == 1.0);
    CHECK(r.at(2, 0) == 3.0);
    CHECK(r.at(4, 1) == 4.0);
    CHECK_THROWS_AS(ag::repeat_rows(ag::constant(x), {0, 2}), std::invalid_argument);

    Tensor p = ag::pad_rows(ag::constant(x), 4, -7.0)->value;
    CHECK(p.shape() == Shape{4, 2});
    CHECK(p.at(1, 1) == 4.0);
    CHECK(p.at(2, 0) == -7.0);
    CHECK(p.at(3, 1) == -7.0);
}

TEST_CASE("autograd: shape op values") {
    Tensor x(Shape{2, 2, 3, 2});
    for (int64_t i = 0; i < x.numel(); ++i) x[i] = static_cast<double>(i);
    Tensor pm = ag::permute_0213(ag::constant(x))->value;
    CHECK(pm.shape() == Shape{2, 3, 2, 2});
    // pm[a][c][b][d] == x[a][b][c][d]
    CHECK(pm[(((0 * 3 + 1) * 2 + 1) * 2 + 0)] == x[(((0 * 2 + 1) * 3 + 1) * 2 + 0)]);

    Tensor t2 = ag::transpose_last2(ag::constant(Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6})))->value;
    CHECK(t2.shape() == Shape{3, 2});
    CHECK(t2.at(2, 0) == 3.0);
    CHECK(t2.at(1, 1) == 5.0);

    Tensor sc = ag::slice_cols(ag::constant(Tensor::from({2, 4}, {0, 1, 2, 3, 4, 5, 6, 7})), 1, 3)->value;
    CHECK(sc.shape() == Shape{2, 2});
    CHECK(sc.at(0, 0) == 1.0);
    CHECK(sc.at(1, 1) == 6.0);
}

TEST_CASE("autograd: graph mechanics") {
    SUBCASE("diamond accumulates both paths") {
        ag::Var x = ag::param(Tensor::vec({3.0}));
        ag::Var y = ag::add(ag::square(x), ag::square(x));  // 2x^2
        ag::backward(ag::sum(y));
        CHECK(x->grad[0] == doctest::Approx(12.0));
    }
    SUBCASE("detach blocks gradient") {
        ag::Var x = ag::param(Tensor::vec({3.0}));
        ag::Var y = ag::mul(x, ag::detach(x));  // treated as x * const(3)
        ag::backward(ag::sum(y));
        CHECK(x->grad[0] == doctest::Approx(3.0));
    }
    SUBCASE("NoGradGuard suppresses graph construction") {
        ag::Var x = ag::param(Tensor::vec({2.0}));
        ag::NoGradGuard ng;
        ag::Var y = ag::square(x);
        CHECK(!y->requires_grad);
        CHECK(y->parents.empty());
    }
    SUBCASE("backward rejects non-scalar roots") {
        ag::Var x = ag::param(Tensor::vec({1.0, 2.0}));
        ag::Var y = ag::square(x);
        CHECK_THROWS_AS(ag::backward(y), std::invalid_argument);
    }
    SUBCASE("constant-only graphs carry no backward") {
        ag::Var y = ag::square(ag::constant(Tensor::vec({2.0})));
        CHECK(!y->requires_grad);
    }
}

TEST_CASE("autograd: dropout semantics") {
    Rng rng(5);
    ag::Var x = ag::param(Tensor::full({50}, 1.0));
    ag::Var y = ag::dropout(x, 0.4, rng, true);
    int kept = 0;
    for (int64_t i = 0; i < 50; ++i) {
        if (y->value[i] != 0.0) {
            CHECK(y->value[i] == doctest::Approx(1.0 / 0.6));
            ++kept;
        }
    }
    CHECK(kept > 10);
    CHECK(kept < 50);
    ag::backward(ag::sum(y));
    for (int64_t i = 0; i < 50; ++i)
        CHECK(x->grad[i] == doctest::Approx(y->value[i]));  // mask/keep pattern

    Rng r2(5);
    ag::Var z = ag::dropout(x, 0.4, r2, false);
    CHECK(z.get() == x.get());  // eval mode is the identity
}

TEST_CASE("autograd: finite-difference checks, elementwise") {
    Rng rng(100);
    SUBCASE("add/sub/mul chain") {
        ag::Var a = ag::param(Tensor::randn({3, 4}, rng));
        ag::Var b = ag::param(Tensor::randn({3, 4}, rng));
        check_grads({a, b}, [&] {
            return project(ag::mul(ag::add(a, b), ag::sub(a, b)), 1);
        });
    }
    SUBCASE("scale/add_scalar/square") {
        ag::Var a = ag::param(Tensor::randn({2, 5}, rng));
        check_grads({a}, [&] {
            return project(ag::square(ag::add_scalar(ag::scale(a, 1.7), -0.3)), 2);
        });
    }
    SUBCASE("relu") {
        ag::Var a = ag::param(randn_away_from_zero({4, 4}, rng));
        check_grads({a}, [&] { return project(ag::relu(a), 3); });
    }
    SUBCASE("silu") {
        ag::Var a = ag::param(Tensor::randn({4, 4}, rng));
        check_grads({a}, [&] { return project(ag::silu(a), 4); });
    }
    SUBCASE("gelu") {
        ag::Var a = ag::param(Tensor::randn({4, 4}, rng));
        check_grads({a}, [&] { return project(ag::gelu(a), 5); });
    }
}

TEST_CASE("autograd: finite-difference checks, shape ops") {
    Rng rng(200);
    SUBCASE("reshape/transpose/permute") {
        ag::Var a = ag::param(Tensor::randn({2, 3, 2, 2}, rng));
        check_grads({a}, [&] {
            return project(ag::transpose_last2(ag::permute_0213(a)), 6);
        });
        check_grads({a}, [&] { return project(ag::reshape(a, {6, 4}), 7); });
    }
    SUBCASE("slice_cols") {
        ag::Var a = ag::param(Tensor::randn({3, 5}, rng));
        check_grads({a}, [&] { return project(ag::slice_cols(a, 1, 4), 8); });
    }
    SUBCASE("concat_channels") {
        ag::Var a = ag::param(Tensor::randn({2, 2, 2, 3}, rng));
        ag::Var b = ag::param(Tensor::randn({2, 1, 2, 3}, rng));
        check_grads({a, b}, [&] { return project(ag::concat_channels(a, b), 9); });
    }
    SUBCASE("stack2_channels and stack_batch") {
        ag::Var a = ag::param(Tensor::randn({3, 4}, rng));
        ag::Var b = ag::param(Tensor::randn({3, 4}, rng));
        check_grads({a, b}, [&] { return project(ag::stack2_channels(a, b), 10); });
        check_grads({a, b}, [&] { return project(ag::stack_batch({a, b, a}), 11); });
    }
}

TEST_CASE("autograd: finite-difference checks, linear algebra") {
    Rng rng(300);
    SUBCASE("matmul") {
        ag::Var a = ag::param(Tensor::randn({3, 4}, rng));
        ag::Var b = ag::param(Tensor::randn({4, 2}, rng));
        check_grads({a, b}, [&] { return project(ag::matmul(a, b), 12); });
    }
    SUBCASE("bmm") {
        ag::Var a = ag::param(Tensor::randn({2, 3, 4}, rng));
        ag::Var b = ag::param(Tensor::randn({2, 4, 2}, rng));
        check_grads({a, b}, [&] { return project(ag::bmm(a, b), 13); });
    }
    SUBCASE("linear with bias, 3-D input") {
        ag::Var x = ag::param(Tensor::randn({2, 3, 4}, rng));
        ag::Var w = ag::param(Tensor::randn({4, 5}, rng));
        ag::Var b = ag::param(Tensor::randn({5}, rng));
        check_grads({x, w, b}, [&] { return project(ag::linear(x, w, b), 14); });
    }
    SUBCASE("linear without bias") {
        ag::Var x = ag::param(Tensor::randn({3, 4}, rng));
        ag::Var w = ag::param(Tensor::randn({4, 2}, rng));
        check_grads({x, w}, [&] { return project(ag::linear(x, w, nullptr), 15); });
    }
    SUBCASE("channel_linear") {
        ag::Var x = ag::param(Tensor::randn({2, 3, 2, 4}, rng));
        ag::Var w = ag::param(Tensor::randn({3, 5}, rng));
        ag::Var b = ag::param(Tensor::randn({5}, rng));
        check_grads({x, w, b}, [&] { return project(ag::channel_linear(x, w, b), 16); });
    }
}

TEST_CASE("autograd: finite-difference checks, normalization") {
    Rng rng(400);
    SUBCASE("layer_norm") {
        ag::Var x = ag::param(Tensor::randn({3, 6}, rng));
        check_grads({x}, [&] { return project(ag::layer_norm(x), 17); }, 1e-5, 1e-5);
    }
    SUBCASE("group_norm") {
        ag::Var x = ag::param(Tensor::randn({2, 4, 2, 3}, rng));
        ag::Var gm = ag::param(Tensor::randn({4}, rng));
        ag::Var bt = ag::param(Tensor::randn({4}, rng));
        check_grads({x, gm, bt},
                    [&] { return project(ag::group_norm(x, 2, gm, bt), 18); }, 1e-5,
                    1e-5);
    }
    SUBCASE("softmax_last") {
        ag::Var x = ag::param(Tensor::randn({2, 2, 5}, rng));
        check_grads({x}, [&] { return project(ag::softmax_last(x), 19); });
    }
}

TEST_CASE("autograd: finite-difference checks, conv and resampling") {
    Rng rng(500);
    SUBCASE("conv2d 3x3 with bias") {
        ag::Var x = ag::param(Tensor::randn({2, 2, 4, 4}, rng));
        ag::Var w = ag::param(Tensor::randn({3, 2, 3, 3}, rng));
        ag::Var b = ag::param(Tensor::randn({3}, rng));
        check_grads({x, w, b}, [&] { return project(ag::conv2d(x, w, b), 20); });
    }
    SUBCASE("conv2d 1x1") {
        ag::Var x = ag::param(Tensor::randn({1, 3, 2, 5}, rng));
        ag::Var w = ag::param(Tensor::randn({2, 3, 1, 1}, rng));
        check_grads({x, w}, [&] { return project(ag::conv2d(x, w, nullptr), 21); });
    }
    SUBCASE("conv1d k=5") {
        ag::Var x = ag::param(Tensor::randn({6, 3}, rng));
        ag::Var w = ag::param(Tensor::randn({2, 3, 5}, rng));
        ag::Var b = ag::param(Tensor::randn({2}, rng));
        check_grads({x, w, b}, [&] { return project(ag::conv1d(x, w, b), 22); });
    }
    SUBCASE("avg_pool2 and upsample_nearest2") {
        ag::Var x = ag::param(Tensor::randn({2, 2, 4, 6}, rng));
        check_grads({x}, [&] { return project(ag::avg_pool2(x), 23); });
        check_grads({x}, [&] { return project(ag::upsample_nearest2(x), 24); });
    }
}

TEST_CASE("autograd: finite-difference checks, broadcast and gather") {
    Rng rng(600);
    SUBCASE("rowvec broadcast") {
        ag::Var x = ag::param(Tensor::randn({3, 4}, rng));
        ag::Var v = ag::param(Tensor::randn({4}, rng));
        check_grads({x, v}, [&] { return project(ag::add_rowvec(x, v), 25); });
        check_grads({x, v}, [&] { return project(ag::mul_rowvec(x, v), 26); });
    }
    SUBCASE("batch-vec broadcast") {
        ag::Var x = ag::param(Tensor::randn({2, 3, 4}, rng));
        ag::Var v = ag::param(Tensor::randn({2, 4}, rng));
        check_grads({x, v}, [&] { return project(ag::add_bvec(x, v), 27); });
        check_grads({x, v}, [&] { return project(ag::mul_bvec(x, v), 28); });
    }
    SUBCASE("embedding with repeated ids") {
        ag::Var table = ag::param(Tensor::randn({4, 3}, rng));
        check_grads({table}, [&] {
            return project(ag::embedding(table, {1, 3, 1, 0}), 29);
        });
    }
    SUBCASE("repeat_rows and pad_rows") {
        ag::Var x = ag::param(Tensor::randn({3, 2}, rng));
        check_grads({x}, [&] { return project(ag::repeat_rows(x, {2, 1, 3}), 30); });
        check_grads({x}, [&] { return project(ag::pad_rows(x, 5, 0.5), 31); });
    }
}

TEST_CASE("autograd: finite-difference checks, reductions and patches") {
    Rng rng(700);
    SUBCASE("sum and mean") {
        ag::Var x = ag::param(Tensor::randn({3, 4}, rng));
        check_grads({x}, [&] { return ag::sum(ag::square(x)); });
        check_grads({x}, [&] { return ag::mean(ag::silu(x)); });
    }
    SUBCASE("mean_squared_error both sides") {
        ag::Var a = ag::param(Tensor::randn({4, 3}, rng));
        ag::Var b = ag::param(Tensor::randn({4, 3}, rng));
        check_grads({a, b}, [&] { return ag::mean_squared_error(a, b); });
        CHECK(ag::mean_squared_error(ag::constant(Tensor::vec({1, 2})),
                                     ag::constant(Tensor::vec({0, 0})))
                  ->value[0] == doctest::Approx(2.5));
    }
    SUBCASE("patchify and unpatchify") {
        ag::Var x = ag::param(Tensor::randn({2, 2, 4, 6}, rng));
        check_grads({x}, [&] { return project(ag::patchify(x, 2, 3), 32); });
        ag::Var tok = ag::param(Tensor::randn({2, 4, 12}, rng));
        check_grads({tok}, [&] {
            return project(ag::unpatchify(tok, 2, 4, 6, 2, 3), 33);
        });
    }
    SUBCASE("composite: a small residual block") {
        ag::Var x = ag::param(Tensor::randn({1, 2, 4, 4}, rng));
        ag::Var w1 = ag::param(Tensor::randn({2, 2, 3, 3}, rng));
        ag::Var b1 = ag::param(Tensor::randn({2}, rng));
        check_grads({x, w1, b1}, [&] {
            ag::Var h = ag::silu(ag::conv2d(x, w1, b1));
            return project(ag::add(x, h), 34);
        });
    }
}
