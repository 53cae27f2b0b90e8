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
#include <string>
#include <vector>

#include "udit/audio/mel.hpp"
#include "udit/audio/wav.hpp"
#include "udit/core/tensor.hpp"
#include "udit/text/lexicon.hpp"
#include "udit/train/trainer.hpp"

namespace udit::io {

// ---------------------------------------------------------------------------
// Corpus index (shared by the real-dataset and synthetic paths)
// ---------------------------------------------------------------------------

struct CorpusItem {
    std::string id;
    std::string audio_path;
    std::string text;  // normalized transcript
};

struct CorpusIndex {
    std::vector<CorpusItem> items;
    int skipped_missing_audio = 0;  // rows dropped because the WAV was absent
};

// Reads a pipe-delimited metadata file ("id|raw|normalized", one row per
// utterance) and resolves audio as <dir>/wavs/<id>.wav next to the metadata
// file. Rows whose audio file is missing are skipped and counted. Malformed
// rows (column count != 3) and duplicate ids report their line number; a
// file with no usable rows is an "empty corpus" error.
CorpusIndex parse_ljspeech_metadata(const std::string& metadata_path);

// ---------------------------------------------------------------------------
// Synthetic corpus: a deterministic eight-word language where every phoneme
// token renders a fixed timbre for a fixed number of frames, so ground-truth
// alignments exist by construction.
// ---------------------------------------------------------------------------

// Frames of audio laid down per phoneme token (including SIL boundaries).
inline constexpr int kSyntheticTokenFrames = 20;

// The eight words, lowercase, index-stable.
const std::vector<std::string>& synthetic_words();

// One pseudo-phoneme per word: six pure chord timbres and two
// noise-colored ones.
text::Lexicon synthetic_lexicon();

// Deterministic sentence of 3..6 words over the synthetic vocabulary.
std::string synthetic_sentence(uint64_t seed);

// Renders a phoneme sequence: one kSyntheticTokenFrames-frame chunk per
// token. Every symbol (pauses included) renders a fixed eight-partial chord
// whose codeword separates it from every other symbol in at least eight mel
// bands, and word/pause splices are crossfaded at calibrated offsets, so
// every analysis frame is nearest its own token's signature. The result is
// passed through the 16-bit PCM quantization used on disk, so in-memory
// renders match loaded WAV files bit for bit. Fully deterministic.
audio::Waveform render_synthetic_utterance(const text::PhonemeSequence& seq,
                                           const audio::MelConfig& mel_cfg);

// Reference mel row per token [n_tokens x n_mels]: the interior-frame
// average of a sustained render of each symbol. These are the oracle means
// for recovering the generating alignment.
Tensor synthetic_token_signatures(const text::PhonemeSequence& seq,
                                  const audio::MelConfig& mel_cfg);

// The generating durations under the analysis framing: kSyntheticTokenFrames
// per token, with the single trailing STFT frame assigned to the last token.
std::vector<int> synthetic_generating_durations(int n_tokens);

// Writes <out_dir>/metadata.csv and <out_dir>/wavs/SYN-%04d.wav for n_items
// deterministic sentences. Byte-identical for identical (n_items, seed).
CorpusIndex generate_synthetic_corpus(int n_items, uint64_t seed,
                                      const std::string& out_dir);

// ---------------------------------------------------------------------------
// Feature preparation
// ---------------------------------------------------------------------------

struct PreparedCorpus {
    std::vector<train::TrainSample> samples;  // token ids + [n_mels x frames]
    std::vector<std::string> texts;           // parallel transcripts
    Tensor mel_mean;                          // [n_mels], frame-weighted mean
};

// Loads every indexed WAV, extracts log-mels, tokenizes transcripts, and
// accumulates the dataset mel mean (the inference pad row).
PreparedCorpus prepare_corpus(const CorpusIndex& index,
                              const text::Lexicon& lexicon,
                              const audio::MelConfig& mel_cfg);

// Writes one portable matrix per utterance (<cache_dir>/<id>.mel), the
// dataset mel mean (<cache_dir>/mel_mean.udmx, [n_mels x 1]), and an
// index file (<cache_dir>/index.csv, "id|<id>.mel|transcript").
void write_feature_cache(const CorpusIndex& index, const text::Lexicon& lexicon,
                         const audio::MelConfig& mel_cfg,
                         const std::string& cache_dir);

}  // namespace udit::io
