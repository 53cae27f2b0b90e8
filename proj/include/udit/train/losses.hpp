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

#include "udit/core/autograd.hpp"
#include "udit/diffusion/schedule.hpp"
#include "udit/nn/model.hpp"

namespace udit::train {

// Mean squared error between the duration-expanded prior and the target mel
// (same shape, mean over all entries).
ag::Var encoder_loss(const ag::Var& mu_frames, const ag::Var& y);

// Mean squared error between predicted and target log-durations.
ag::Var duration_loss(const ag::Var& pred_log_d, const ag::Var& target_log_d);

// One draw of the denoising objective: a time, its kernel variance, the
// noise, and the resulting noisy input x_t = (1-k) mu + k x0 + sqrt(lambda) xi.
struct DiffusionDraw {
    double t = 0.0;
    double lambda = 0.0;
    Tensor xi;
    Tensor x_t;
};
DiffusionDraw draw_diffusion_point(const Tensor& x0, const Tensor& mu_values,
                                   const diffusion::NoiseSchedule& sched,
                                   double t_floor, Rng& rng);

struct DiffusionLossSample {
    ag::Var loss;  // scalar node
    double t = 0.0;
    double lambda = 0.0;
};

// Weighted score-matching loss on a given draw:
//   lambda * mean((score + xi / sqrt(lambda))^2).
// The score comes from an arbitrary builder so oracle stubs (perfect score,
// zero network) can exercise the formula without a model.
using ScoreBuilder = std::function<ag::Var(const DiffusionDraw& draw)>;
DiffusionLossSample diffusion_loss_with(const ScoreBuilder& score,
                                        const DiffusionDraw& draw);

// Full model path: draws (t, xi), runs the decoder on (x_t, mu) with the
// gradient flowing into mu through both channels, and applies the weighted
// formula. Throws if the loss turns non-finite (message carries t and
// lambda).
DiffusionLossSample diffusion_loss(const nn::UDitModel& model, const Tensor& x0,
                                   const ag::Var& mu,
                                   const diffusion::NoiseSchedule& sched,
                                   double t_floor, Rng& rng);

}  // namespace udit::train
