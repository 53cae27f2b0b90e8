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

#include "udit/train/optimizer.hpp"

#include <cmath>
#include <utility>

#include "udit/core/check.hpp"

namespace udit::train {

double clip_grad_norm(const nn::ParamStore& params, double max_norm) {
    check_arg(max_norm > 0.0, "clip_grad_norm: max_norm must be positive");
    double sq = 0.0;
    for (const ag::Var& p : params.all()) {
        const Tensor& g = p->grad;
        for (int64_t i = 0; i < g.numel(); ++i) sq += g[i] * g[i];
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double scale = max_norm / (norm + 1e-12);
        for (const ag::Var& p : params.all()) {
            Tensor& g = p->grad;
            for (int64_t i = 0; i < g.numel(); ++i) g[i] *= scale;
        }
    }
    return norm;
}

bool grads_finite(const nn::ParamStore& params) {
    for (const ag::Var& p : params.all())
        if (!p->grad.empty() && !p->grad.all_finite()) return false;
    return true;
}

Adam::Adam(const nn::ParamStore& params, AdamConfig cfg)
    : params_(&params), cfg_(cfg) {
    check_arg(cfg_.lr > 0.0, "adam: learning rate must be positive");
    check_arg(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0 && cfg_.beta2 >= 0.0 &&
                  cfg_.beta2 < 1.0,
              "adam: betas must lie in [0, 1)");
    check_arg(cfg_.eps > 0.0, "adam: eps must be positive");
    m_.reserve(params.all().size());
    v_.reserve(params.all().size());
    for (const ag::Var& p : params.all()) {
        m_.push_back(Tensor::zeros(p->value.shape()));
        v_.push_back(Tensor::zeros(p->value.shape()));
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    const std::vector<ag::Var>& ps = params_->all();
    for (size_t i = 0; i < ps.size(); ++i) {
        Tensor& w = ps[i]->value;
        const Tensor& g = ps[i]->grad;
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        const bool has_grad = !g.empty();
        for (int64_t j = 0; j < w.numel(); ++j) {
            const double gj = has_grad ? g[j] : 0.0;
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            w[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
        check_state(w.all_finite(),
                    "adam: parameter '" + params_->names()[i] +
                        "' became non-finite at step " + std::to_string(t_));
    }
}

void Adam::restore(std::vector<Tensor> m, std::vector<Tensor> v, int64_t steps) {
    check_arg(m.size() == params_->all().size() &&
                  v.size() == params_->all().size(),
              "adam restore: moment count mismatch");
    for (size_t i = 0; i < m.size(); ++i)
        check_arg(m[i].same_shape(params_->all()[i]->value) &&
                      v[i].same_shape(params_->all()[i]->value),
                  "adam restore: moment shape mismatch at slot " +
                      std::to_string(i));
    check_arg(steps >= 0, "adam restore: negative step count");
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = steps;
}

}  // namespace udit::train
