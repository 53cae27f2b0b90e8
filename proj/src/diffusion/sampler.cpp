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

#include "udit/diffusion/sampler.hpp"

#include <cmath>
#include <string>

#include "udit/core/check.hpp"

namespace udit::diffusion {

Tensor forward_mean(const Tensor& x0, const Tensor& mu, const NoiseSchedule& sched,
                    double t) {
    check_arg(x0.same_shape(mu), "forward_mean: shape mismatch " + x0.shape_str() +
                                     " vs " + mu.shape_str());
    const double k = mean_decay(sched, t);
    Tensor out(x0.shape());
    for (int64_t i = 0; i < out.numel(); ++i)
        out[i] = (1.0 - k) * mu[i] + k * x0[i];
    return out;
}

std::pair<Tensor, Tensor> sample_xt(const Tensor& x0, const Tensor& mu,
                                    const NoiseSchedule& sched, double t, Rng& rng) {
    check_arg(t > 0.0 && t <= 1.0,
              "sample_xt: t must lie in (0, 1]; t = 0 makes the loss target singular");
    Tensor xi(x0.shape());
    for (int64_t i = 0; i < xi.numel(); ++i) xi[i] = rng.normal();
    return {sample_xt_with_noise(x0, mu, sched, t, xi), std::move(xi)};
}

Tensor sample_xt_with_noise(const Tensor& x0, const Tensor& mu,
                            const NoiseSchedule& sched, double t, const Tensor& xi) {
    check_arg(t > 0.0 && t <= 1.0, "sample_xt: t must lie in (0, 1]");
    check_arg(xi.same_shape(x0), "sample_xt: noise shape mismatch");
    Tensor xt = forward_mean(x0, mu, sched, t);
    const double sd = std::sqrt(lambda_t(sched, t));
    for (int64_t i = 0; i < xt.numel(); ++i) xt[i] += sd * xi[i];
    return xt;
}

Tensor analytic_gaussian_score(const Tensor& x, double t, double m0, double v0,
                               const Tensor& mu, const NoiseSchedule& sched) {
    check_arg(x.same_shape(mu), "analytic_gaussian_score: shape mismatch");
    check_arg(v0 >= 0.0, "analytic_gaussian_score: v0 must be non-negative");
    const double k = mean_decay(sched, t);
    const double var_t = k * k * v0 + lambda_t(sched, t);
    check_arg(var_t > 0.0, "analytic_gaussian_score: zero marginal variance");
    Tensor out(x.shape());
    for (int64_t i = 0; i < out.numel(); ++i) {
        const double mean_t = (1.0 - k) * mu[i] + k * m0;
        out[i] = -(x[i] - mean_t) / var_t;
    }
    return out;
}

Tensor reverse_ode_sample(const ScoreFn& score_fn, const Tensor& mu, int n_steps,
                          double tau, const NoiseSchedule& sched, Rng& rng) {
    check_arg(n_steps >= 1, "reverse_ode_sample: n_steps must be >= 1");
    check_arg(tau > 0.0, "reverse_ode_sample: tau must be positive");

    const double start_sd = std::sqrt(1.0 / tau);
    Tensor x(mu.shape());
    for (int64_t i = 0; i < x.numel(); ++i) x[i] = mu[i] + start_sd * rng.normal();

    const double h = 1.0 / n_steps;
    for (int step = 0; step < n_steps; ++step) {
        const double t = 1.0 - step * h;
        const Tensor score = score_fn(x, mu, t);
        check_state(score.same_shape(x) && score.all_finite(),
                    "reverse_ode_sample: non-finite score at step " +
                        std::to_string(step) + " (t = " + std::to_string(t) + ")");
        const double bt = beta_at(sched, t);
        for (int64_t i = 0; i < x.numel(); ++i)
            x[i] -= h * 0.5 * bt * (mu[i] - x[i] - score[i]);
    }
    check_state(x.all_finite(), "reverse_ode_sample: non-finite state at t = 0");
    return x;
}

Tensor euler_maruyama_forward(const Tensor& x0, const Tensor& mu,
                              const NoiseSchedule& sched, int n_steps, Rng& rng,
                              bool zero_noise) {
    check_arg(x0.same_shape(mu), "euler_maruyama_forward: shape mismatch");
    check_arg(n_steps >= 100, "euler_maruyama_forward: n_steps must be >= 100");
    const double h = 1.0 / n_steps;
    const double sqrt_h = std::sqrt(h);
    Tensor x = x0;
    for (int step = 0; step < n_steps; ++step) {
        const double t = step * h;
        const double bt = beta_at(sched, t);
        const double diffusion = zero_noise ? 0.0 : std::sqrt(bt) * sqrt_h;
        for (int64_t i = 0; i < x.numel(); ++i) {
            const double noise = zero_noise ? 0.0 : rng.normal();
            x[i] += 0.5 * (mu[i] - x[i]) * bt * h + diffusion * noise;
        }
    }
    return x;
}

}  // namespace udit::diffusion
