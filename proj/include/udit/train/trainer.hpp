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

#include <cmath>
#include <cstdint>
#include <vector>

#include "udit/diffusion/schedule.hpp"
#include "udit/nn/model.hpp"
#include "udit/train/losses.hpp"
#include "udit/train/optimizer.hpp"

namespace udit::train {

struct TrainingConfig {
    double learning_rate = 1e-4;
    int batch_size = 32;
    // Mels are randomly cropped (or right-padded) to this many frames; must
    // equal the decoder's frame budget.
    int frame_crop = 256;
    double grad_clip_max_norm = 1.0;
    // Lower bound of the diffusion-time draw; t = 0 is singular.
    double t_floor = 1e-5;
    // Loss weights: total = w_enc * L_enc + w_dp * L_dur + w_diff * L_diff.
    double w_enc = 1.0;
    double w_dp = 1.0;
    double w_diff = 1.0;
    uint64_t seed = 0;
    // Fill level for padded frames: the silence value of the log-mel front
    // end (natural log of its linear-amplitude clamp).
    double pad_value = std::log(1e-5);
};
void validate(const TrainingConfig& cfg);

// One utterance: token ids plus its log-mel target [n_mels x n_frames].
struct TrainSample {
    std::vector<int> token_ids;
    Tensor mel;
};

struct TrainRecord {
    int64_t step = 0;
    double loss_enc = 0.0;
    double loss_dur = 0.0;
    double loss_diff = 0.0;
    double total = 0.0;
    double grad_norm = 0.0;  // pre-clip global norm
    bool skipped = false;    // non-finite gradients; no parameter update
    double wall_ms = 0.0;
};

// Mean of the diffusion loss over the trailing `window` records (fewer if the
// history is shorter). The smoothed value is what progress checks compare.
double smoothed_diff_loss(const std::vector<TrainRecord>& history, int window = 10);

// Joint training loop body. Owns the optimizer and the single Rng that
// drives every stochastic choice (batch picks, crops, dropout, diffusion
// draws), so a (seed, data) pair fixes the whole trajectory.
class Trainer {
public:
    Trainer(nn::UDitModel& model, const TrainingConfig& cfg,
            const diffusion::NoiseSchedule& sched);

    // Runs the three-loss objective on a batch and applies one Adam update.
    // If any gradient is non-finite the update is skipped and the record says
    // so; losses in the record are per-batch means.
    TrainRecord step(const std::vector<TrainSample>& batch);

    // Draws batch_size indices uniformly (with replacement) from [0, n).
    std::vector<size_t> sample_batch_indices(size_t n);

    int64_t completed_steps() const { return step_count_; }
    Rng& rng() { return rng_; }
    Adam& optimizer() { return adam_; }
    const TrainingConfig& config() const { return cfg_; }

    // Checkpoint resume: restores the step counter (optimizer moments and
    // rng state are restored through their own accessors).
    void set_completed_steps(int64_t n);

private:
    nn::UDitModel* model_;
    TrainingConfig cfg_;
    diffusion::NoiseSchedule sched_;
    Rng rng_;
    Adam adam_;
    int64_t step_count_ = 0;
};

}  // namespace udit::train
