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
#include <utility>

#include "udit/core/rng.hpp"
#include "udit/core/tensor.hpp"
#include "udit/diffusion/schedule.hpp"

namespace udit::diffusion {

// Kernel mean rho(t) = (1 - exp(-B/2)) * mu + exp(-B/2) * x0.
Tensor forward_mean(const Tensor& x0, const Tensor& mu, const NoiseSchedule& sched,
                    double t);

// Draws x_t = rho + sqrt(lambda_t) * xi with xi elementwise standard normal;
// returns (x_t, xi) so the training loss can reuse the noise. t = 0 is
// rejected (the loss target xi / sqrt(lambda) is singular there).
std::pair<Tensor, Tensor> sample_xt(const Tensor& x0, const Tensor& mu,
                                    const NoiseSchedule& sched, double t, Rng& rng);

// Same construction with caller-supplied noise (tests, losses).
Tensor sample_xt_with_noise(const Tensor& x0, const Tensor& mu,
                            const NoiseSchedule& sched, double t, const Tensor& xi);

// Exact marginal score when the data is X_0 ~ N(m0, v0 * I): then
// X_t ~ N((1-k) mu + k m0, (k^2 v0 + lambda_t) I) with k = exp(-B/2).
Tensor analytic_gaussian_score(const Tensor& x, double t, double m0, double v0,
                               const Tensor& mu, const NoiseSchedule& sched);

using ScoreFn = std::function<Tensor(const Tensor& x, const Tensor& mu, double t)>;

// Probability-flow ODE, explicit Euler with h = 1/n_steps from t = 1 down:
//   X_{t-h} = X_t - h * 0.5 * beta_t * (mu - X_t - score(X_t, mu, t)).
// The score carries the same 0.5 * beta_t weight as the drift (flow form
// f - 0.5 g^2 s); with the exact Gaussian score this conserves the
// normalized coordinate (x - mean_t) / sqrt(var_t), so the sampler recovers
// the data distribution's moments — the property the oracle test enforces.
// Starts from N(mu, I/tau); returns X at t = 0. Aborts with the step index
// if the score turns non-finite.
Tensor reverse_ode_sample(const ScoreFn& score_fn, const Tensor& mu, int n_steps,
                          double tau, const NoiseSchedule& sched, Rng& rng);

// Euler-Maruyama simulation of the forward SDE
//   dX = 0.5 * (mu - X) * beta_t dt + sqrt(beta_t) dW
// from t = 0 to 1; the independent oracle for the closed-form kernel.
// zero_noise suppresses the dW term for deterministic trend checks.
Tensor euler_maruyama_forward(const Tensor& x0, const Tensor& mu,
                              const NoiseSchedule& sched, int n_steps, Rng& rng,
                              bool zero_noise = false);

}  // namespace udit::diffusion
