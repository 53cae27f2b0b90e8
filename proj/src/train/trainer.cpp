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

#include "udit/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "udit/align/mas.hpp"
#include "udit/core/check.hpp"

namespace udit::train {
namespace {

// Columns [from, from+len) of a [rows x cols] matrix.
Tensor crop_cols(const Tensor& m, int from, int len) {
    Tensor out({m.rows(), len});
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < len; ++c) out.at(r, c) = m.at(r, from + c);
    return out;
}

// Right-pads columns up to n_cols with a constant fill.
Tensor pad_cols(const Tensor& m, int n_cols, double fill) {
    if (m.cols() == n_cols) return m;
    Tensor out({m.rows(), n_cols});
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) out.at(r, c) = m.at(r, c);
        for (int c = m.cols(); c < n_cols; ++c) out.at(r, c) = fill;
    }
    return out;
}

}  // namespace

void validate(const TrainingConfig& cfg) {
    check_arg(cfg.learning_rate > 0.0, "training: learning rate must be positive");
    check_arg(cfg.batch_size >= 1, "training: batch size must be >= 1");
    check_arg(cfg.frame_crop >= 4 && cfg.frame_crop % 4 == 0,
              "training: frame_crop must be a positive multiple of 4");
    check_arg(cfg.grad_clip_max_norm > 0.0,
              "training: gradient clip threshold must be positive");
    check_arg(cfg.t_floor > 0.0 && cfg.t_floor < 1.0,
              "training: t_floor must lie in (0, 1)");
    check_arg(cfg.w_enc >= 0.0 && cfg.w_dp >= 0.0 && cfg.w_diff >= 0.0,
              "training: loss weights must be non-negative");
}

double smoothed_diff_loss(const std::vector<TrainRecord>& history, int window) {
    check_arg(window >= 1, "smoothed_diff_loss: window must be >= 1");
    check_arg(!history.empty(), "smoothed_diff_loss: empty history");
    const size_t n = history.size();
    const size_t w = std::min<size_t>(static_cast<size_t>(window), n);
    double acc = 0.0;
    for (size_t i = n - w; i < n; ++i) acc += history[i].loss_diff;
    return acc / static_cast<double>(w);
}

Trainer::Trainer(nn::UDitModel& model, const TrainingConfig& cfg,
                 const diffusion::NoiseSchedule& sched)
    : model_(&model),
      cfg_(cfg),
      sched_(sched),
      rng_(cfg.seed),
      adam_(model.params(), AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8}) {
    validate(cfg_);
    check_arg(cfg_.frame_crop == model.config().decoder.frame_budget,
              "training: frame_crop " + std::to_string(cfg_.frame_crop) +
                  " must equal the decoder frame budget " +
                  std::to_string(model.config().decoder.frame_budget));
}

std::vector<size_t> Trainer::sample_batch_indices(size_t n) {
    check_arg(n > 0, "trainer: empty dataset");
    std::vector<size_t> idx(static_cast<size_t>(cfg_.batch_size));
    for (size_t& i : idx) i = static_cast<size_t>(rng_.integer(n));
    return idx;
}

TrainRecord Trainer::step(const std::vector<TrainSample>& batch) {
    check_arg(!batch.empty(), "trainer: empty batch");
    const auto t_start = std::chrono::steady_clock::now();
    const int n_mels = model_->config().decoder.n_mels;
    const int crop = cfg_.frame_crop;

    ag::Var l_enc_sum, l_dur_sum, l_diff_sum;
    for (const TrainSample& s : batch) {
        check_arg(!s.token_ids.empty(), "trainer: sample with no tokens");
        check_arg(s.mel.ndim() == 2 && s.mel.rows() == n_mels && s.mel.cols() >= 1,
                  "trainer: mel must be [n_mels x n_frames], got " +
                      s.mel.shape_str());

        // Random fixed-length window; shorter utterances keep every real
        // frame and are padded at the silence level for the diffusion stage.
        Tensor mel_real = s.mel;
        if (s.mel.cols() > crop) {
            const int start =
                static_cast<int>(rng_.integer(static_cast<uint64_t>(s.mel.cols() - crop) + 1));
            mel_real = crop_cols(s.mel, start, crop);
        }
        const int n_real = mel_real.cols();
        const int n_tokens = static_cast<int>(s.token_ids.size());
        check_arg(n_tokens <= n_real,
                  "trainer: " + std::to_string(n_tokens) + " tokens cannot align to " +
                      std::to_string(n_real) + " frames");

        ag::Var mu_tok = model_->encode_text(s.token_ids, rng_, /*train=*/true);

        // Hard alignment on the current prior (values only; the search is
        // not differentiated through).
        align::AlignmentPath path =
            align::mas_align(align::gaussian_log_lik(mu_tok->value, mel_real));
        align::DurationVector dur = align::durations_from_path(path, n_tokens);

        ag::Var mu_frames = ag::repeat_rows(mu_tok, dur.counts);  // [n_real x n_mels]
        ag::Var l_enc =
            encoder_loss(mu_frames, ag::constant(mel_real.transposed_2d()));

        ag::Var log_d = model_->predict_log_durations(ag::detach(mu_tok), rng_,
                                                      /*train=*/true);
        ag::Var l_dur = duration_loss(
            log_d, ag::constant(Tensor::from({n_tokens}, dur.log_counts)));

        // Mel-layout prior [n_mels x crop] for the score network.
        ag::Var mu_mel = ag::transpose_last2(
            ag::pad_rows(mu_frames, crop, cfg_.pad_value));
        Tensor x0 = pad_cols(mel_real, crop, cfg_.pad_value);
        DiffusionLossSample dl =
            diffusion_loss(*model_, x0, mu_mel, sched_, cfg_.t_floor, rng_);

        l_enc_sum = l_enc_sum ? ag::add(l_enc_sum, l_enc) : l_enc;
        l_dur_sum = l_dur_sum ? ag::add(l_dur_sum, l_dur) : l_dur;
        l_diff_sum = l_diff_sum ? ag::add(l_diff_sum, dl.loss) : dl.loss;
    }

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    ag::Var l_enc = ag::scale(l_enc_sum, inv_b);
    ag::Var l_dur = ag::scale(l_dur_sum, inv_b);
    ag::Var l_diff = ag::scale(l_diff_sum, inv_b);
    ag::Var total = ag::add(ag::add(ag::scale(l_enc, cfg_.w_enc),
                                    ag::scale(l_dur, cfg_.w_dp)),
                            ag::scale(l_diff, cfg_.w_diff));

    TrainRecord rec;
    rec.loss_enc = l_enc->value[0];
    rec.loss_dur = l_dur->value[0];
    rec.loss_diff = l_diff->value[0];
    rec.total = total->value[0];
    check_state(std::abs(rec.total -
                         (cfg_.w_enc * rec.loss_enc + cfg_.w_dp * rec.loss_dur +
                          cfg_.w_diff * rec.loss_diff)) <=
                    1e-9 * (1.0 + std::abs(rec.total)),
                "trainer: total loss does not decompose into its parts");

    model_->params().zero_grads();
    ag::backward(total);

    if (!grads_finite(model_->params())) {
        rec.skipped = true;
        rec.grad_norm = std::numeric_limits<double>::quiet_NaN();
    } else {
        rec.grad_norm = clip_grad_norm(model_->params(), cfg_.grad_clip_max_norm);
        adam_.step();
    }

    rec.step = ++step_count_;
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
    return rec;
}

void Trainer::set_completed_steps(int64_t n) {
    check_arg(n >= 0, "trainer: negative step count");
    step_count_ = n;
}

}  // namespace udit::train
