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
#include <memory>
#include <string>
#include <vector>

#include "udit/audio/mel.hpp"
#include "udit/core/tensor.hpp"
#include "udit/nn/model.hpp"
#include "udit/train/optimizer.hpp"
#include "udit/train/trainer.hpp"

namespace udit::io {

// Single-file checkpoint container. Layout:
//   bytes 0..3  magic "UDCK"
//   bytes 4..7  uint32 LE  format version
//   bytes 8..15 uint64 LE  manifest byte length
//   manifest    UTF-8 JSON: configs, vocab, RNG state, step count, and a
//               block directory (name, shape, element offset, element count)
//   payload     all blocks concatenated, float64 little-endian
// Blocks are the model parameters in parameter-store order, optionally the
// Adam first/second moments, and the dataset mel mean. load(save(x)) is
// bit-identical in every parameter and resumes training loss-for-loss.

inline constexpr uint32_t kCheckpointFormatVersion = 1;

// Everything persisted beside the model weights.
struct CheckpointExtras {
    audio::MelConfig mel;
    train::TrainingConfig training;
    std::vector<std::string> vocab;          // phoneme id -> symbol
    std::string lexicon_kind = "synthetic";  // "synthetic" | "file"
    Tensor mel_mean;                         // [n_mels], inference pad row
    std::string rng_state;                   // trainer RNG serialization
    int64_t step = 0;                        // completed training steps
};

// optimizer may be null for inference-only checkpoints.
void save_checkpoint(const std::string& path, const nn::UDitModel& model,
                     const CheckpointExtras& extras,
                     const train::Adam* optimizer);

struct LoadedCheckpoint {
    nn::ModelConfig model_cfg;
    CheckpointExtras extras;
    std::unique_ptr<nn::UDitModel> model;  // constructed, weights restored
    bool has_optimizer = false;
    std::vector<Tensor> adam_m, adam_v;  // parameter-store order
    int64_t adam_steps = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

// Applies optimizer moments, RNG state, and the step counter to a trainer
// freshly built around the loaded model, so training continues exactly
// where the saved run stopped.
void restore_trainer(train::Trainer& trainer, const LoadedCheckpoint& ck);

}  // namespace udit::io
