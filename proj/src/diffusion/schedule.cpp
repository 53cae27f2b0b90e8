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

#include "udit/diffusion/schedule.hpp"

#include <cmath>
#include <string>

#include "udit/core/check.hpp"

namespace udit::diffusion {

namespace {

void check_t(double t) {
    check_arg(t >= 0.0 && t <= 1.0,
              "schedule: t must lie in [0, 1], got " + std::to_string(t));
}

}  // namespace

double beta_at(const NoiseSchedule& sched, double t) {
    check_t(t);
    return sched.beta0 + (sched.beta1 - sched.beta0) * t;
}

double beta_integral(const NoiseSchedule& sched, double t) {
    check_t(t);
    return sched.beta0 * t + 0.5 * (sched.beta1 - sched.beta0) * t * t;
}

double lambda_t(const NoiseSchedule& sched, double t) {
    return 1.0 - std::exp(-beta_integral(sched, t));
}

double mean_decay(const NoiseSchedule& sched, double t) {
    return std::exp(-0.5 * beta_integral(sched, t));
}

}  // namespace udit::diffusion
