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

#include "udit/io/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "udit/core/check.hpp"
#include "little_endian.hpp"

namespace udit::io {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'U', 'D', 'C', 'K'};

json mel_to_json(const audio::MelConfig& c) {
    return json{{"n_mels", c.n_mels},         {"win_length", c.win_length},
                {"hop_length", c.hop_length}, {"fft_size", c.fft_size},
                {"fmin", c.fmin},             {"fmax", c.fmax},
                {"log_floor", c.log_floor}};
}

audio::MelConfig mel_from_json(const json& j) {
    audio::MelConfig c;
    c.n_mels = j.at("n_mels");
    c.win_length = j.at("win_length");
    c.hop_length = j.at("hop_length");
    c.fft_size = j.at("fft_size");
    c.fmin = j.at("fmin");
    c.fmax = j.at("fmax");
    c.log_floor = j.at("log_floor");
    return c;
}

json training_to_json(const train::TrainingConfig& c) {
    return json{{"learning_rate", c.learning_rate},
                {"batch_size", c.batch_size},
                {"frame_crop", c.frame_crop},
                {"grad_clip_max_norm", c.grad_clip_max_norm},
                {"t_floor", c.t_floor},
                {"w_enc", c.w_enc},
                {"w_dp", c.w_dp},
                {"w_diff", c.w_diff},
                {"seed", c.seed},
                {"pad_value", c.pad_value}};
}

train::TrainingConfig training_from_json(const json& j) {
    train::TrainingConfig c;
    c.learning_rate = j.at("learning_rate");
    c.batch_size = j.at("batch_size");
    c.frame_crop = j.at("frame_crop");
    c.grad_clip_max_norm = j.at("grad_clip_max_norm");
    c.t_floor = j.at("t_floor");
    c.w_enc = j.at("w_enc");
    c.w_dp = j.at("w_dp");
    c.w_diff = j.at("w_diff");
    c.seed = j.at("seed");
    c.pad_value = j.at("pad_value");
    return c;
}

json model_to_json(const nn::ModelConfig& c) {
    return json{
        {"encoder",
         {{"vocab_size", c.encoder.vocab_size},
          {"n_mels", c.encoder.n_mels},
          {"hidden", c.encoder.hidden},
          {"n_blocks", c.encoder.n_blocks},
          {"n_heads", c.encoder.n_heads},
          {"ff_mult", c.encoder.ff_mult},
          {"prenet_kernel", c.encoder.prenet_kernel},
          {"dropout", c.encoder.dropout}}},
        {"duration",
         {{"in_dim", c.duration.in_dim},
          {"hidden", c.duration.hidden},
          {"kernel", c.duration.kernel},
          {"dropout", c.duration.dropout}}},
        {"decoder",
         {{"n_mels", c.decoder.n_mels},
          {"frame_budget", c.decoder.frame_budget},
          {"n_down_levels", c.decoder.n_down_levels},
          {"ch1", c.decoder.ch1},
          {"ch2", c.decoder.ch2},
          {"n_dit_blocks", c.decoder.n_dit_blocks},
          {"patch_f", c.decoder.patch_f},
          {"patch_t", c.decoder.patch_t},
          {"hidden_dim", c.decoder.hidden_dim},
          {"n_heads", c.decoder.n_heads},
          {"n_groups", c.decoder.n_groups},
          {"time_embed_dim", c.decoder.time_embed_dim},
          {"mlp_depth", c.decoder.mlp_depth}}}};
}

nn::ModelConfig model_from_json(const json& j) {
    nn::ModelConfig c;
    const json& e = j.at("encoder");
    c.encoder.vocab_size = e.at("vocab_size");
    c.encoder.n_mels = e.at("n_mels");
    c.encoder.hidden = e.at("hidden");
    c.encoder.n_blocks = e.at("n_blocks");
    c.encoder.n_heads = e.at("n_heads");
    c.encoder.ff_mult = e.at("ff_mult");
    c.encoder.prenet_kernel = e.at("prenet_kernel");
    c.encoder.dropout = e.at("dropout");
    const json& d = j.at("duration");
    c.duration.in_dim = d.at("in_dim");
    c.duration.hidden = d.at("hidden");
    c.duration.kernel = d.at("kernel");
    c.duration.dropout = d.at("dropout");
    const json& k = j.at("decoder");
    c.decoder.n_mels = k.at("n_mels");
    c.decoder.frame_budget = k.at("frame_budget");
    c.decoder.n_down_levels = k.at("n_down_levels");
    c.decoder.ch1 = k.at("ch1");
    c.decoder.ch2 = k.at("ch2");
    c.decoder.n_dit_blocks = k.at("n_dit_blocks");
    c.decoder.patch_f = k.at("patch_f");
    c.decoder.patch_t = k.at("patch_t");
    c.decoder.hidden_dim = k.at("hidden_dim");
    c.decoder.n_heads = k.at("n_heads");
    c.decoder.n_groups = k.at("n_groups");
    c.decoder.time_embed_dim = k.at("time_embed_dim");
    c.decoder.mlp_depth = k.at("mlp_depth");
    return c;
}

struct BlockEntry {
    std::string name;
    const Tensor* tensor;
};

}  // namespace

void save_checkpoint(const std::string& path, const nn::UDitModel& model,
                     const CheckpointExtras& extras,
                     const train::Adam* optimizer) {
    const nn::ParamStore& params = model.params();
    check_arg(extras.mel_mean.ndim() == 1 &&
                  extras.mel_mean.numel() == extras.mel.n_mels,
              "save_checkpoint: mel_mean must be a [n_mels] vector");
    check_arg(static_cast<int>(extras.vocab.size()) ==
                  model.config().encoder.vocab_size,
              "save_checkpoint: vocab size disagrees with the encoder table");

    std::vector<BlockEntry> blocks;
    for (size_t i = 0; i < params.names().size(); ++i)
        blocks.push_back(
            {"param/" + params.names()[i], &params.all()[i]->value});
    if (optimizer != nullptr) {
        check_arg(optimizer->first_moments().size() == params.names().size(),
                  "save_checkpoint: optimizer does not match the model");
        for (size_t i = 0; i < params.names().size(); ++i)
            blocks.push_back(
                {"adam_m/" + params.names()[i], &optimizer->first_moments()[i]});
        for (size_t i = 0; i < params.names().size(); ++i)
            blocks.push_back({"adam_v/" + params.names()[i],
                              &optimizer->second_moments()[i]});
    }
    blocks.push_back({"mel_mean", &extras.mel_mean});

    json directory = json::array();
    int64_t offset = 0;
    for (const BlockEntry& b : blocks) {
        json shape = json::array();
        for (int d : b.tensor->shape()) shape.push_back(d);
        directory.push_back({{"name", b.name},
                             {"shape", shape},
                             {"offset", offset},
                             {"numel", b.tensor->numel()}});
        offset += b.tensor->numel();
    }

    json manifest{{"format_version", kCheckpointFormatVersion},
                  {"mel", mel_to_json(extras.mel)},
                  {"training", training_to_json(extras.training)},
                  {"model", model_to_json(model.config())},
                  {"vocab", extras.vocab},
                  {"lexicon_kind", extras.lexicon_kind},
                  {"rng_state", extras.rng_state},
                  {"step", extras.step},
                  {"optimizer",
                   {{"present", optimizer != nullptr},
                    {"steps", optimizer != nullptr ? optimizer->steps() : 0}}},
                  {"blocks", directory}};
    const std::string manifest_text = manifest.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_checkpoint: cannot open " + path +
                                 " for writing");
    os.write(kMagic, 4);
    detail::put_u32(os, kCheckpointFormatVersion);
    detail::put_u64(os, manifest_text.size());
    os.write(manifest_text.data(),
             static_cast<std::streamsize>(manifest_text.size()));
    for (const BlockEntry& b : blocks)
        for (double v : b.tensor->vec_data()) detail::put_f64(os, v);
    if (!os)
        throw std::runtime_error("save_checkpoint: write failed for " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || magic[0] != kMagic[0] || magic[1] != kMagic[1] ||
        magic[2] != kMagic[2] || magic[3] != kMagic[3])
        throw std::runtime_error("load_checkpoint: " + path +
                                 " is not a checkpoint file (bad magic)");
    const uint32_t version = detail::get_u32(is, "checkpoint version");
    if (version != kCheckpointFormatVersion)
        throw std::runtime_error("load_checkpoint: unsupported format version " +
                                 std::to_string(version));
    const uint64_t manifest_len = detail::get_u64(is, "manifest length");
    std::string manifest_text(manifest_len, '\0');
    is.read(manifest_text.data(), static_cast<std::streamsize>(manifest_len));
    if (!is)
        throw std::runtime_error("load_checkpoint: truncated manifest in " +
                                 path);

    LoadedCheckpoint out;
    json manifest;
    try {
        manifest = json::parse(manifest_text);
        out.model_cfg = model_from_json(manifest.at("model"));
        out.extras.mel = mel_from_json(manifest.at("mel"));
        out.extras.training = training_from_json(manifest.at("training"));
        out.extras.vocab =
            manifest.at("vocab").get<std::vector<std::string>>();
        out.extras.lexicon_kind = manifest.at("lexicon_kind");
        out.extras.rng_state = manifest.at("rng_state");
        out.extras.step = manifest.at("step");
        out.has_optimizer = manifest.at("optimizer").at("present");
        out.adam_steps = manifest.at("optimizer").at("steps");
    } catch (const json::exception& e) {
        throw std::runtime_error("load_checkpoint: bad manifest in " + path +
                                 ": " + e.what());
    }
    audio::validate(out.extras.mel);
    train::validate(out.extras.training);
    nn::validate(out.model_cfg);

    // Build the model, then read blocks sequentially against the directory.
    out.model = std::make_unique<nn::UDitModel>(out.model_cfg, /*init_seed=*/0);
    const nn::ParamStore& params = out.model->params();
    const json& directory = manifest.at("blocks");
    const size_t n_params = params.names().size();
    const size_t expected_blocks = n_params * (out.has_optimizer ? 3 : 1) + 1;
    if (directory.size() != expected_blocks)
        throw std::runtime_error(
            "load_checkpoint: block directory has " +
            std::to_string(directory.size()) + " entries, expected " +
            std::to_string(expected_blocks));

    int64_t cursor = 0;
    auto read_block = [&](const json& entry, const std::string& want_name,
                          Tensor& dst) {
        const std::string name = entry.at("name");
        if (name != want_name)
            throw std::runtime_error("load_checkpoint: block \"" + name +
                                     "\" where \"" + want_name +
                                     "\" was expected");
        if (entry.at("offset").get<int64_t>() != cursor)
            throw std::runtime_error("load_checkpoint: non-contiguous block \"" +
                                     name + "\"");
        Shape shape;
        for (const auto& d : entry.at("shape")) shape.push_back(d.get<int>());
        Tensor t = Tensor::zeros(shape);
        if (entry.at("numel").get<int64_t>() != t.numel())
            throw std::runtime_error("load_checkpoint: block \"" + name +
                                     "\" numel disagrees with its shape");
        double* p = t.data();
        for (int64_t i = 0; i < t.numel(); ++i)
            p[i] = detail::get_f64(is, "block " + name);
        cursor += t.numel();
        dst = std::move(t);
    };

    size_t bi = 0;
    for (size_t i = 0; i < n_params; ++i) {
        Tensor t;
        read_block(directory[bi++], "param/" + params.names()[i], t);
        ag::Var var = params.get(params.names()[i]);
        check_state(var->value.same_shape(t),
                    "load_checkpoint: shape mismatch for parameter " +
                        params.names()[i]);
        var->value = std::move(t);
    }
    if (out.has_optimizer) {
        out.adam_m.resize(n_params);
        out.adam_v.resize(n_params);
        for (size_t i = 0; i < n_params; ++i)
            read_block(directory[bi++], "adam_m/" + params.names()[i],
                       out.adam_m[i]);
        for (size_t i = 0; i < n_params; ++i)
            read_block(directory[bi++], "adam_v/" + params.names()[i],
                       out.adam_v[i]);
    }
    read_block(directory[bi++], "mel_mean", out.extras.mel_mean);
    if (out.extras.mel_mean.numel() != out.extras.mel.n_mels)
        throw std::runtime_error(
            "load_checkpoint: mel_mean length disagrees with the mel config");

    is.peek();
    if (!is.eof())
        throw std::runtime_error("load_checkpoint: trailing bytes in " + path);
    return out;
}

void restore_trainer(train::Trainer& trainer, const LoadedCheckpoint& ck) {
    check_arg(ck.has_optimizer,
              "restore_trainer: checkpoint carries no optimizer state");
    check_arg(!ck.extras.rng_state.empty(),
              "restore_trainer: checkpoint carries no RNG state");
    trainer.optimizer().restore(ck.adam_m, ck.adam_v, ck.adam_steps);
    trainer.rng().deserialize(ck.extras.rng_state);
    trainer.set_completed_steps(ck.extras.step);
}

}  // namespace udit::io
