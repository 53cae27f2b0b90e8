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

namespace udit::diffusion {

// Clamp applied to t wherever the kernel variance appears in a denominator
// (it vanishes at t = 0).
inline constexpr double kTimeEpsilon = 1e-5;

// Linear noise schedule beta(t) = beta0 + (beta1 - beta0) * t on t in [0, 1].
struct NoiseSchedule {
    double beta0 = 0.05;
    double beta1 = 20.0;
};

double beta_at(const NoiseSchedule& sched, double t);

// B(t) = integral of beta from 0 to t, in closed form.
double beta_integral(const NoiseSchedule& sched, double t);

// Kernel variance lambda(t) = 1 - exp(-B(t)); strictly increasing, in [0, 1).
double lambda_t(const NoiseSchedule& sched, double t);

// Mean-decay factor exp(-B(t)/2) of the forward kernel.
double mean_decay(const NoiseSchedule& sched, double t);

}  // namespace udit::diffusion
