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

#include "udit/io/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "udit/core/check.hpp"
#include "udit/core/rng.hpp"
#include "udit/io/matrix.hpp"

namespace udit::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// LJSpeech-format metadata
// ---------------------------------------------------------------------------

CorpusIndex parse_ljspeech_metadata(const std::string& metadata_path) {
    std::ifstream is(metadata_path);
    if (!is)
        throw std::runtime_error("cannot open metadata file " + metadata_path);
    const fs::path wav_dir = fs::path(metadata_path).parent_path() / "wavs";

    CorpusIndex index;
    std::set<std::string> seen_ids;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::string field;
        std::istringstream row(line);
        while (std::getline(row, field, '|')) cols.push_back(field);
        if (cols.size() != 3)
            throw std::runtime_error(
                metadata_path + " line " + std::to_string(line_no) +
                ": expected 3 pipe-delimited columns, got " +
                std::to_string(cols.size()));
        const std::string& id = cols[0];
        if (!seen_ids.insert(id).second)
            throw std::runtime_error(metadata_path + " line " +
                                     std::to_string(line_no) +
                                     ": duplicate utterance id \"" + id + "\"");
        const fs::path audio = wav_dir / (id + ".wav");
        if (!fs::exists(audio)) {
            ++index.skipped_missing_audio;
            continue;
        }
        index.items.push_back(CorpusItem{id, audio.string(), cols[2]});
    }
    if (index.items.empty())
        throw std::runtime_error("empty corpus: no usable rows in " +
                                 metadata_path);
    return index;
}

// ---------------------------------------------------------------------------
// Synthetic corpus
// ---------------------------------------------------------------------------

namespace {

// int16 PCM quantization as performed by the WAV writer/reader pair, so
// in-memory renders equal their disk round trip exactly.
double pcm_roundtrip(double x) {
    const double s = std::clamp(x, -1.0, 1.0);
    return static_cast<double>(std::lround(s * 32767.0)) / 32768.0;
}

// Every symbol renders a fixed eight-partial chord, optionally colored with
// noise. The sixteen candidate frequencies form eight log-spaced pairs; a
// symbol's 8-bit codeword picks one frequency per pair. The codewords are
// drawn from the extended Hamming code (pairwise distance >= 4), so any two
// symbols disagree in at least four pairs — at least eight mel bands flip
// between their steady spectra. That dense separation is what makes the
// generating alignment recoverable: boundary frames carry some crossfade
// smear, but the smear is small against an eight-band signature gap, while
// sparse single-tone timbres drown in it. SIL gets a chord of its own
// (codeword 0) at full level for the same reason — in log-mel space true
// silence is closer to a loud neighbor's leakage than leakage is to silence.
struct Timbre {
    // Colors stay narrowband on purpose. Broadband noise would raise a
    // pedestal across every mel band, and boundary smear frames (which carry
    // faint broadband fade splash) would then always match the noisy symbol
    // better than its neighbors. Phase wobble and tremolo keep the energy
    // concentrated in the chord bands while still sounding noisy.
    enum Color { kPure, kShimmer, kTrill };
    uint8_t code = 0;  // bit i selects the upper frequency of pair i
    Color color = kPure;
};

constexpr double kChordFreqs[16] = {260.0,  320.0,  395.0,  487.0,  601.0,
                                    740.0,  913.0,  1125.0, 1387.0, 1710.0,
                                    2108.0, 2599.0, 3204.0, 3950.0, 4870.0,
                                    6003.0};
constexpr double kPartialAmp = 0.1;
constexpr double kShimmerDepth = 0.15;  // rad of noise-driven phase wobble
constexpr double kTrillDepth = 0.4;     // rad of periodic phase buzz
constexpr uint64_t kNoiseTimbreSeed = 0x5eedba5e;

Timbre timbre_for_symbol(const std::string& symbol) {
    static const std::map<std::string, Timbre> table = {
        {text::kSilSymbol, {0x00, Timbre::kPure}},
        {"BEE", {0x0F, Timbre::kPure}},
        {"DAH", {0x33, Timbre::kPure}},
        {"GOO", {0x3C, Timbre::kPure}},
        {"KAY", {0x55, Timbre::kPure}},
        {"LUM", {0x5A, Timbre::kPure}},
        {"NOH", {0x66, Timbre::kPure}},
        {"RRR", {0x69, Timbre::kTrill}},
        {"SHH", {0x96, Timbre::kShimmer}},
    };
    const auto it = table.find(symbol);
    check_arg(it != table.end(),
              "synthetic corpus: no timbre for symbol " + symbol);
    return it->second;
}

// Samples by which a word's audio is trimmed inward at a word/pause splice
// (the pause is extended to fill). In log-energy terms the faint skirt of a
// chord — its onset entering the analysis window, or its tail leaving it —
// reads as nearly full presence, so a word claims pause frames next to it
// unless its audio is pulled back from the frame boundary. The pull each
// word exerts depends on how its codeword differs from the pause chord and
// on its color (phase wobble widens the spectral skirt), so the trim is
// calibrated per word: the value centers the per-frame preference flip on
// the generating boundary. Negative means the word is extended instead.
int word_trim_samples(const std::string& symbol) {
    static const std::map<std::string, int> table = {
        {"BEE", 64},  {"DAH", 32}, {"GOO", 96},  {"KAY", -32},
        {"LUM", 0},   {"NOH", 96}, {"RRR", 192}, {"SHH", 280},
    };
    const auto it = table.find(symbol);
    check_arg(it != table.end(),
              "synthetic corpus: no trim calibration for symbol " + symbol);
    return it->second;
}

// One token chunk of n samples at the given rate, before fading; `start` is
// the chunk's global sample offset in the utterance. Noise colors come from
// per-symbol fixed seeds, so every occurrence of a symbol renders the same
// samples (the corpus varies through sentence composition only).
std::vector<double> raw_token_chunk(const std::string& symbol, int start,
                                    int n, int hop, int sample_rate) {
    const Timbre t = timbre_for_symbol(symbol);
    // Phase wobble track. Shimmer: slow unit-RMS noise (one-pole smooth of
    // white noise, pole a, stationary sd sqrt((1-a)/(1+a)) divided out).
    // Trill: a periodic buzz at exactly one cycle per analysis hop, clocked
    // by the global sample index — every analysis window then catches the
    // same modulation phase, keeping the per-frame spectrum stationary.
    std::vector<double> wobble;
    if (t.color == Timbre::kShimmer) {
        Rng rng(derive_seed(kNoiseTimbreSeed, 1));
        const double a = 0.9995;
        const double sd = std::sqrt((1.0 - a) / (1.0 + a));
        wobble.resize(static_cast<size_t>(n));
        double y = 0.0;
        for (int i = 0; i < n; ++i) {
            y = a * y + (1.0 - a) * rng.normal();
            wobble[static_cast<size_t>(i)] = kShimmerDepth * y / sd;
        }
    } else if (t.color == Timbre::kTrill) {
        wobble.resize(static_cast<size_t>(n));
        const double wm = 2.0 * M_PI / hop;  // one cycle per hop
        for (int i = 0; i < n; ++i)
            wobble[static_cast<size_t>(i)] =
                kTrillDepth * std::sin(wm * (start + i));
    }
    std::vector<double> x(static_cast<size_t>(n), 0.0);
    for (int pair = 0; pair < 8; ++pair) {
        const int bit = (t.code >> pair) & 1;
        const double f = kChordFreqs[2 * pair + bit];
        const double w = 2.0 * M_PI * f / sample_rate;
        const double phase = 2.399963 * pair;  // spread peaks apart
        if (wobble.empty()) {
            for (int i = 0; i < n; ++i)
                x[i] += kPartialAmp * std::sin(w * i + phase);
        } else {
            for (int i = 0; i < n; ++i)
                x[i] += kPartialAmp *
                        std::sin(w * i + phase + wobble[static_cast<size_t>(i)]);
        }
    }
    return x;
}

// Raised-cosine fade-in/out over fade_len samples at both segment ends. The
// smooth (C1) envelope avoids the broadband onset/offset splash an abrupt
// edge or linear ramp would smear across neighboring analysis frames, which
// would otherwise out-shout the timbres themselves at chunk boundaries.
void apply_edge_envelope(std::vector<double>& x, int fade_len) {
    const int n = static_cast<int>(x.size());
    const int f = std::min(fade_len, n / 2);
    for (int i = 0; i < f; ++i) {
        const double g = 0.5 * (1.0 - std::cos(M_PI * (i + 0.5) / f));
        x[i] *= g;
        x[n - 1 - i] *= g;
    }
}

}  // namespace

const std::vector<std::string>& synthetic_words() {
    static const std::vector<std::string> words = {
        "bee", "dah", "goo", "kay", "lum", "noh", "rrr", "shh"};
    return words;
}

text::Lexicon synthetic_lexicon() {
    std::map<std::string, std::vector<std::string>> entries;
    for (const std::string& w : synthetic_words()) {
        std::string sym = w;
        for (char& c : sym)
            c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        entries[sym] = {sym};
    }
    return text::make_lexicon(std::move(entries));
}

std::string synthetic_sentence(uint64_t seed) {
    Rng rng(seed);
    const int n_words = 3 + static_cast<int>(rng.integer(4));
    const auto& words = synthetic_words();
    std::string out;
    for (int i = 0; i < n_words; ++i) {
        if (i > 0) out += ' ';
        out += words[rng.integer(words.size())];
    }
    return out;
}

audio::Waveform render_synthetic_utterance(const text::PhonemeSequence& seq,
                                           const audio::MelConfig& mel_cfg) {
    check_arg(seq.size() > 0, "render_synthetic_utterance: empty sequence");
    // Token k nominally owns samples [k*L, (k+1)*L). Two placements keep the
    // generating alignment recoverable from analysis frames:
    //   - acoustic transitions sit half a hop early, exactly between two
    //     frame centers, so every frame center lies strictly inside one
    //     token's territory rather than straddling a boundary;
    //   - at word/pause splices the word's audio is trimmed inward by its
    //     calibrated margin (see word_trim_samples), centering the flip of
    //     the per-frame nearest-signature preference on the boundary.
    const int hop = mel_cfg.hop_length;
    const int chunk_len = kSyntheticTokenFrames * hop;
    const int fade = hop / 2;
    const int n_tokens = seq.size();
    const auto is_pause = [&](int k) {
        return seq.symbols[static_cast<size_t>(k)] == text::kSilSymbol;
    };
    // Splice point between segments k-1 and k.
    const auto splice = [&](int k) {
        const std::string& prev = seq.symbols[static_cast<size_t>(k - 1)];
        const std::string& next = seq.symbols[static_cast<size_t>(k)];
        int offset = 0;
        if (is_pause(k) && !is_pause(k - 1))
            offset = -word_trim_samples(prev);
        else if (!is_pause(k) && is_pause(k - 1))
            offset = word_trim_samples(next);
        return k * chunk_len - fade + offset;
    };
    audio::Waveform w;
    w.sample_rate = audio::kSampleRate;
    w.samples.reserve(static_cast<size_t>(n_tokens) * chunk_len);
    for (int k = 0; k < n_tokens; ++k) {
        const int begin = (k == 0) ? 0 : splice(k);
        const int end = (k == n_tokens - 1) ? n_tokens * chunk_len : splice(k + 1);
        std::vector<double> x =
            raw_token_chunk(seq.symbols[static_cast<size_t>(k)], begin,
                            end - begin, hop, w.sample_rate);
        apply_edge_envelope(x, fade);
        w.samples.insert(w.samples.end(), x.begin(), x.end());
    }
    for (double& s : w.samples) s = pcm_roundtrip(s);
    return w;
}

Tensor synthetic_token_signatures(const text::PhonemeSequence& seq,
                                  const audio::MelConfig& mel_cfg) {
    check_arg(seq.size() > 0, "synthetic_token_signatures: empty sequence");
    // Signature per distinct symbol: average the interior frames of the
    // middle chunk of a sustained three-chunk render.
    std::map<std::string, std::vector<double>> cache;
    for (const std::string& sym : seq.symbols) {
        if (cache.count(sym)) continue;
        text::PhonemeSequence run;
        run.symbols = {sym, sym, sym};
        run.tokens = {0, 0, 0};  // unused by the renderer
        const audio::Waveform w = render_synthetic_utterance(run, mel_cfg);
        const audio::MelSpectrogram m = audio::compute_mel(w, mel_cfg);
        // Interior of the middle chunk, clear of both fade zones and of any
        // frame whose window reaches into them.
        const int lo = kSyntheticTokenFrames + 4;
        const int hi = 2 * kSyntheticTokenFrames - 4;
        std::vector<double> row(static_cast<size_t>(mel_cfg.n_mels), 0.0);
        for (int b = 0; b < mel_cfg.n_mels; ++b) {
            double acc = 0.0;
            for (int f = lo; f < hi; ++f) acc += m.values.at(b, f);
            row[static_cast<size_t>(b)] = acc / (hi - lo);
        }
        cache[sym] = std::move(row);
    }
    Tensor out = Tensor::zeros({seq.size(), mel_cfg.n_mels});
    for (int ti = 0; ti < seq.size(); ++ti) {
        const auto& row = cache.at(seq.symbols[static_cast<size_t>(ti)]);
        for (int b = 0; b < mel_cfg.n_mels; ++b) out.at(ti, b) = row[b];
    }
    return out;
}

std::vector<int> synthetic_generating_durations(int n_tokens) {
    check_arg(n_tokens >= 1, "synthetic_generating_durations: need >= 1 token");
    std::vector<int> d(static_cast<size_t>(n_tokens), kSyntheticTokenFrames);
    d.back() += 1;  // the trailing STFT frame (floor(len/hop) + 1 framing)
    return d;
}

CorpusIndex generate_synthetic_corpus(int n_items, uint64_t seed,
                                      const std::string& out_dir) {
    check_arg(n_items >= 1, "generate_synthetic_corpus: n_items must be >= 1");
    const fs::path root(out_dir);
    std::error_code ec;
    fs::create_directories(root / "wavs", ec);
    if (ec || !fs::is_directory(root / "wavs"))
        throw std::runtime_error("generate_synthetic_corpus: cannot create " +
                                 (root / "wavs").string() + ": " + ec.message());

    const text::Lexicon lex = synthetic_lexicon();
    const audio::MelConfig mel_cfg;  // rendering depends only on hop length
    CorpusIndex index;
    std::ofstream meta(root / "metadata.csv");
    if (!meta)
        throw std::runtime_error("generate_synthetic_corpus: cannot write " +
                                 (root / "metadata.csv").string());
    for (int i = 0; i < n_items; ++i) {
        const std::string sentence =
            synthetic_sentence(derive_seed(seed, static_cast<uint64_t>(i)));
        char id[16];
        std::snprintf(id, sizeof id, "SYN-%04d", i);
        const text::PhonemeSequence seq = text::text_to_phonemes(sentence, lex);
        const audio::Waveform w = render_synthetic_utterance(seq, mel_cfg);
        const fs::path wav_path = root / "wavs" / (std::string(id) + ".wav");
        audio::save_wav(wav_path.string(), w);
        meta << id << '|' << sentence << '|' << sentence << '\n';
        index.items.push_back(CorpusItem{id, wav_path.string(), sentence});
    }
    meta.close();
    if (!meta)
        throw std::runtime_error("generate_synthetic_corpus: write failed for " +
                                 (root / "metadata.csv").string());
    return index;
}

// ---------------------------------------------------------------------------
// Feature preparation
// ---------------------------------------------------------------------------

PreparedCorpus prepare_corpus(const CorpusIndex& index,
                              const text::Lexicon& lexicon,
                              const audio::MelConfig& mel_cfg) {
    check_arg(!index.items.empty(), "prepare_corpus: empty corpus index");
    PreparedCorpus out;
    out.mel_mean = Tensor::zeros({mel_cfg.n_mels});
    int64_t total_frames = 0;
    for (const CorpusItem& item : index.items) {
        const audio::Waveform w = audio::load_wav(item.audio_path);
        audio::MelSpectrogram m = audio::compute_mel(w, mel_cfg);
        const text::PhonemeSequence seq = text::text_to_phonemes(item.text, lexicon);
        check_state(seq.size() > 0,
                    "prepare_corpus: transcript for " + item.id +
                        " produced no phonemes");
        for (int b = 0; b < mel_cfg.n_mels; ++b)
            for (int f = 0; f < m.n_frames(); ++f)
                out.mel_mean[b] += m.values.at(b, f);
        total_frames += m.n_frames();
        out.samples.push_back(train::TrainSample{seq.tokens, m.values});
        out.texts.push_back(item.text);
    }
    for (int b = 0; b < mel_cfg.n_mels; ++b)
        out.mel_mean[b] /= static_cast<double>(total_frames);
    return out;
}

void write_feature_cache(const CorpusIndex& index, const text::Lexicon& lexicon,
                         const audio::MelConfig& mel_cfg,
                         const std::string& cache_dir) {
    const PreparedCorpus prepared = prepare_corpus(index, lexicon, mel_cfg);
    const fs::path root(cache_dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec || !fs::is_directory(root))
        throw std::runtime_error("write_feature_cache: cannot create " +
                                 root.string() + ": " + ec.message());
    std::ofstream csv(root / "index.csv");
    if (!csv)
        throw std::runtime_error("write_feature_cache: cannot write " +
                                 (root / "index.csv").string());
    for (size_t i = 0; i < index.items.size(); ++i) {
        const std::string mel_name = index.items[i].id + ".mel";
        save_matrix((root / mel_name).string(), prepared.samples[i].mel);
        csv << index.items[i].id << '|' << mel_name << '|' << prepared.texts[i]
            << '\n';
    }
    save_matrix((root / "mel_mean.udmx").string(),
                prepared.mel_mean.reshaped({mel_cfg.n_mels, 1}));
}

}  // namespace udit::io
