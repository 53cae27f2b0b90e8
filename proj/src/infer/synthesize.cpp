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

#include "udit/infer/synthesize.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "udit/align/mas.hpp"
#include "udit/core/autograd.hpp"
#include "udit/core/check.hpp"

namespace udit::infer {
namespace {

int duration_sum(const std::vector<int>& d) {
    return std::accumulate(d.begin(), d.end(), 0);
}

// First/second half of a segment's tokens, for the one-shot budget retry.
std::pair<text::PhonemeSequence, text::PhonemeSequence> split_in_half(
    const text::PhonemeSequence& seq) {
    const int n = seq.size();
    const int mid = n / 2;
    text::PhonemeSequence a, b;
    a.tokens.assign(seq.tokens.begin(), seq.tokens.begin() + mid);
    a.symbols.assign(seq.symbols.begin(), seq.symbols.begin() + mid);
    b.tokens.assign(seq.tokens.begin() + mid, seq.tokens.end());
    b.symbols.assign(seq.symbols.begin() + mid, seq.symbols.end());
    return {std::move(a), std::move(b)};
}

}  // namespace

void validate(const SynthesisConfig& cfg) {
    check_arg(cfg.n_steps >= 1, "synthesis: n_steps must be >= 1");
    check_arg(cfg.tau > 0.0, "synthesis: tau must be positive");
    check_arg(cfg.frame_budget >= 4 && cfg.frame_budget % 4 == 0,
              "synthesis: frame_budget must be a positive multiple of 4");
    check_arg(cfg.duration_scale > 0.0,
              "synthesis: duration_scale must be positive");
    check_arg(cfg.griffin_lim_iters >= 1,
              "synthesis: griffin_lim_iters must be >= 1");
}

int frames_from_log_duration(double log_d, double scale) {
    check_arg(std::isfinite(log_d), "duration: non-finite log-duration");
    const double frames = std::exp(log_d) * scale;
    return std::max(1, static_cast<int>(std::floor(frames + 0.5)));
}

PaddedPrior pad_to_budget(const Tensor& mu_frames, int budget,
                          const Tensor& pad_row) {
    check_arg(mu_frames.ndim() == 2 && mu_frames.rows() >= 1,
              "pad_to_budget: prior must be [n_frames x n_mels]");
    check_arg(pad_row.ndim() == 1 && pad_row.numel() == mu_frames.cols(),
              "pad_to_budget: pad row width " + pad_row.shape_str() +
                  " does not match prior " + mu_frames.shape_str());
    const int n = mu_frames.rows();
    check_arg(n <= budget, "pad_to_budget: prior of " + std::to_string(n) +
                               " frames exceeds budget " +
                               std::to_string(budget));
    PaddedPrior out;
    out.real_frames = n;
    if (n == budget) {
        out.mu = mu_frames;
        return out;
    }
    out.mu = Tensor({budget, mu_frames.cols()});
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < mu_frames.cols(); ++c)
            out.mu.at(r, c) = mu_frames.at(r, c);
    for (int r = n; r < budget; ++r)
        for (int c = 0; c < mu_frames.cols(); ++c) out.mu.at(r, c) = pad_row[c];
    return out;
}

std::vector<int> predict_durations(const nn::UDitModel& model,
                                   const std::vector<int>& token_ids,
                                   double duration_scale) {
    check_arg(!token_ids.empty(), "predict_durations: empty segment");
    ag::NoGradGuard ng;
    Rng unused(0);  // dropout is off, so no randomness is consumed
    ag::Var mu = model.encode_text(token_ids, unused, /*train=*/false);
    ag::Var log_d = model.predict_log_durations(mu, unused, /*train=*/false);
    std::vector<int> out(token_ids.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = frames_from_log_duration(log_d->value[static_cast<int64_t>(i)],
                                          duration_scale);
    return out;
}

SegmentSynthesis synthesize_segment(const nn::UDitModel& model,
                                    const text::PhonemeSequence& segment,
                                    const std::vector<int>& durations,
                                    const SynthesisConfig& cfg,
                                    const diffusion::NoiseSchedule& sched,
                                    const Tensor& mel_mean_row,
                                    uint64_t segment_seed) {
    validate(cfg);
    check_arg(segment.size() >= 1, "synthesize_segment: empty segment");
    check_arg(durations.size() == static_cast<size_t>(segment.size()),
              "synthesize_segment: one duration per token required");
    check_arg(cfg.frame_budget == model.config().decoder.frame_budget,
              "synthesize_segment: frame_budget " +
                  std::to_string(cfg.frame_budget) +
                  " does not match the model's " +
                  std::to_string(model.config().decoder.frame_budget));

    ag::NoGradGuard ng;
    Rng rng(segment_seed);

    Rng unused(0);
    ag::Var mu_tok = model.encode_text(segment.tokens, unused, /*train=*/false);

    align::DurationVector dur;
    dur.counts = durations;
    dur.log_counts.resize(durations.size());
    for (size_t i = 0; i < durations.size(); ++i) {
        check_arg(durations[i] >= 1, "synthesize_segment: durations must be >= 1");
        dur.log_counts[i] = std::log(static_cast<double>(durations[i]));
    }

    Tensor expanded = align::expand_by_durations(mu_tok->value, dur);
    PaddedPrior padded = pad_to_budget(expanded, cfg.frame_budget, mel_mean_row);
    Tensor mu_mel = padded.mu.transposed_2d();  // [n_mels x budget]

    diffusion::ScoreFn score = [&model](const Tensor& x, const Tensor& mu,
                                        double t) {
        return model.score(x, mu, t);
    };
    Tensor x0 = diffusion::reverse_ode_sample(score, mu_mel, cfg.n_steps,
                                              cfg.tau, sched, rng);

    SegmentSynthesis out;
    out.phonemes = segment;
    out.durations = durations;
    out.mel = Tensor({x0.rows(), padded.real_frames});
    for (int r = 0; r < x0.rows(); ++r)
        for (int c = 0; c < padded.real_frames; ++c)
            out.mel.at(r, c) = x0.at(r, c);
    check_state(out.mel.all_finite(), "synthesize_segment: non-finite mel");
    return out;
}

SynthesisResult synthesize(const nn::UDitModel& model,
                           const text::Lexicon& lexicon, const std::string& text,
                           const SynthesisConfig& cfg,
                           const diffusion::NoiseSchedule& sched,
                           const audio::MelConfig& mel_cfg,
                           const Tensor& mel_mean_row) {
    validate(cfg);
    audio::validate(mel_cfg);
    check_arg(mel_cfg.n_mels == model.config().decoder.n_mels,
              "synthesize: mel config has " + std::to_string(mel_cfg.n_mels) +
                  " bands but the model expects " +
                  std::to_string(model.config().decoder.n_mels));

    text::PhonemeSequence seq = text::text_to_phonemes(text, lexicon);
    check_arg(seq.size() >= 1, "synthesize: text produced no phonemes");
    for (int id : seq.tokens)
        check_arg(id >= 0 && id < model.config().encoder.vocab_size,
                  "synthesize: token id " + std::to_string(id) +
                      " is outside the model's vocabulary (size " +
                      std::to_string(model.config().encoder.vocab_size) +
                      "); lexicon and checkpoint disagree");

    // Plan all segments first: predict durations and re-split any segment
    // whose frames would not fit the diffusion budget. One retry per
    // segment; token counts (<= 25) always fit after halving unless the
    // duration model is badly out of range.
    std::vector<text::PhonemeSequence> planned =
        text::segment_phonemes(seq, 22, 25);
    std::vector<text::PhonemeSequence> segments;
    std::vector<std::vector<int>> durations;
    for (const text::PhonemeSequence& seg : planned) {
        std::vector<int> d = predict_durations(model, seg.tokens,
                                               cfg.duration_scale);
        if (duration_sum(d) <= cfg.frame_budget) {
            segments.push_back(seg);
            durations.push_back(std::move(d));
            continue;
        }
        check_arg(seg.size() >= 2,
                  "synthesize: one token predicts " + std::to_string(d[0]) +
                      " frames, over the budget " +
                      std::to_string(cfg.frame_budget));
        auto [a, b] = split_in_half(seg);
        for (const text::PhonemeSequence& half : {a, b}) {
            std::vector<int> hd = predict_durations(model, half.tokens,
                                                    cfg.duration_scale);
            check_arg(
                duration_sum(hd) <= cfg.frame_budget,
                "synthesize: segment still exceeds the frame budget after one "
                "re-split (" +
                    std::to_string(duration_sum(hd)) + " frames > " +
                    std::to_string(cfg.frame_budget) + ")");
            segments.push_back(half);
            durations.push_back(std::move(hd));
        }
    }

    SynthesisResult result;
    for (size_t si = 0; si < segments.size(); ++si) {
        const uint64_t seg_seed = derive_seed(cfg.seed, si);
        SegmentSynthesis seg = synthesize_segment(
            model, segments[si], durations[si], cfg, sched, mel_mean_row,
            seg_seed);
        result.total_frames += duration_sum(seg.durations);

        audio::MelSpectrogram m;
        m.values = seg.mel;
        m.config = mel_cfg;
        audio::Waveform w =
            audio::invert_mel(m, cfg.griffin_lim_iters, seg_seed);
        result.wav.sample_rate = w.sample_rate;
        result.wav.samples.insert(result.wav.samples.end(), w.samples.begin(),
                                  w.samples.end());
        result.segments.push_back(std::move(seg));
    }
    return result;
}

}  // namespace udit::infer
