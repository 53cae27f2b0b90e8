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
#include <vector>

#include "udit/nn/layers.hpp"

namespace udit::train {

// Global-norm gradient clipping over every parameter in the store. Returns
// the pre-clip norm; grads are scaled in place when it exceeds max_norm.
double clip_grad_norm(const nn::ParamStore& params, double max_norm);

bool grads_finite(const nn::ParamStore& params);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. Moment slots follow the parameter store's
// insertion order; both moments and the step count persist in checkpoints so
// resumed runs continue loss-for-loss.
class Adam {
public:
    Adam(const nn::ParamStore& params, AdamConfig cfg);

    // Applies one update from the currently accumulated gradients (missing
    // grads count as zero). Verifies parameters stay finite.
    void step();

    int64_t steps() const { return t_; }
    const std::vector<Tensor>& first_moments() const { return m_; }
    const std::vector<Tensor>& second_moments() const { return v_; }
    void restore(std::vector<Tensor> m, std::vector<Tensor> v, int64_t steps);

private:
    const nn::ParamStore* params_;
    AdamConfig cfg_;
    std::vector<Tensor> m_, v_;
    int64_t t_ = 0;
};

}  // namespace udit::train
