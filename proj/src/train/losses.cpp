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

#include "udit/train/losses.hpp"

#include <cmath>
#include <string>

#include "udit/core/check.hpp"
#include "udit/diffusion/sampler.hpp"

namespace udit::train {

ag::Var encoder_loss(const ag::Var& mu_frames, const ag::Var& y) {
    check_arg(mu_frames->value.same_shape(y->value),
              "encoder_loss: shape mismatch " + mu_frames->value.shape_str() +
                  " vs " + y->value.shape_str());
    return ag::mean_squared_error(mu_frames, y);
}

ag::Var duration_loss(const ag::Var& pred_log_d, const ag::Var& target_log_d) {
    check_arg(pred_log_d->value.same_shape(target_log_d->value),
              "duration_loss: length mismatch");
    return ag::mean_squared_error(pred_log_d, target_log_d);
}

DiffusionDraw draw_diffusion_point(const Tensor& x0, const Tensor& mu_values,
                                   const diffusion::NoiseSchedule& sched,
                                   double t_floor, Rng& rng) {
    check_arg(x0.same_shape(mu_values), "diffusion draw: shape mismatch");
    check_arg(t_floor > 0.0 && t_floor < 1.0,
              "diffusion draw: t_floor must lie in (0, 1)");
    DiffusionDraw d;
    d.t = rng.uniform(t_floor, 1.0);
    d.lambda = diffusion::lambda_t(sched, d.t);
    d.xi = Tensor(x0.shape());
    for (int64_t i = 0; i < d.xi.numel(); ++i) d.xi[i] = rng.normal();
    d.x_t = diffusion::sample_xt_with_noise(x0, mu_values, sched, d.t, d.xi);
    return d;
}

DiffusionLossSample diffusion_loss_with(const ScoreBuilder& score,
                                        const DiffusionDraw& draw) {
    const double inv_sd = 1.0 / std::sqrt(draw.lambda);
    Tensor target(draw.xi.shape());
    for (int64_t i = 0; i < target.numel(); ++i) target[i] = draw.xi[i] * inv_sd;

    ag::Var s = score(draw);
    check_arg(s->value.same_shape(draw.xi), "diffusion loss: score shape mismatch");
    ag::Var residual = ag::add(s, ag::constant(std::move(target)));
    ag::Var loss = ag::scale(ag::mean(ag::square(residual)), draw.lambda);
    check_state(std::isfinite(loss->value[0]),
                "diffusion loss non-finite at t = " + std::to_string(draw.t) +
                    ", lambda = " + std::to_string(draw.lambda));
    return {loss, draw.t, draw.lambda};
}

DiffusionLossSample diffusion_loss(const nn::UDitModel& model, const Tensor& x0,
                                   const ag::Var& mu,
                                   const diffusion::NoiseSchedule& sched,
                                   double t_floor, Rng& rng) {
    check_arg(mu->value.same_shape(x0), "diffusion loss: prior shape mismatch");
    DiffusionDraw draw = draw_diffusion_point(x0, mu->value, sched, t_floor, rng);

    // x_t rebuilt as a graph node so the gradient reaches the encoder through
    // the kernel mean as well as through the conditioning channel:
    //   x_t = (1 - k) mu + const(k x0 + sqrt(lambda) xi).
    const double k = diffusion::mean_decay(sched, draw.t);
    Tensor fixed(x0.shape());
    const double sd = std::sqrt(draw.lambda);
    for (int64_t i = 0; i < fixed.numel(); ++i)
        fixed[i] = k * x0[i] + sd * draw.xi[i];
    ag::Var x_t = ag::add(ag::scale(mu, 1.0 - k), ag::constant(std::move(fixed)));

    auto score = [&](const DiffusionDraw& d) {
        ag::Var x2 = ag::stack_batch({ag::stack2_channels(x_t, mu)});
        ag::Var out = model.score_batch(x2, {d.t});
        const Shape s = {out->value.dim(1), out->value.dim(2)};
        return ag::reshape(out, s);
    };
    return diffusion_loss_with(score, draw);
}

}  // namespace udit::train
