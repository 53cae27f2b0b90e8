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

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace udit::text {

inline constexpr const char* kPadSymbol = "PAD";
inline constexpr const char* kSilSymbol = "SIL";
inline constexpr const char* kUnkSymbol = "UNK";

// Word -> phoneme dictionary with a frozen, contiguous token vocabulary.
// Specials occupy the first three ids so they are stable across lexicons.
struct Lexicon {
    std::map<std::string, std::vector<std::string>> entries;
    std::vector<std::string> vocab;  // index -> symbol; [PAD, SIL, UNK, ...]
    std::unordered_map<std::string, int> symbol_to_id;

    int pad_id() const { return 0; }
    int sil_id() const { return 1; }
    int unk_id() const { return 2; }
    int vocab_size() const { return static_cast<int>(vocab.size()); }
};

// Builds the vocabulary (specials + sorted phoneme symbols) from entries.
Lexicon make_lexicon(std::map<std::string, std::vector<std::string>> entries);

// Reads a CMU-dictionary-format file: "WORD  PH1 PH2 ...". Comment lines
// (";;;") are skipped; variant entries "WORD(2)" fold into the first
// pronunciation. Errors carry the offending line number.
Lexicon load_lexicon(const std::string& path);

// Token sequence with the parallel symbol spelling (for logs and tests).
struct PhonemeSequence {
    std::vector<int> tokens;
    std::vector<std::string> symbols;

    int size() const { return static_cast<int>(tokens.size()); }
};

// Uppercases, expands digits to their names, joins words with single SIL
// boundaries (punctuation collapses into the same boundary), and spells
// out-of-vocabulary words letter by letter with UNK as the last resort.
PhonemeSequence text_to_phonemes(const std::string& text, const Lexicon& lex);

// Greedy segmentation for inference: fill up to max_len, preferring the
// largest cut inside [min_len, max_len] that lands on a SIL token.
// Concatenating the result always reproduces the input.
std::vector<PhonemeSequence> segment_phonemes(const PhonemeSequence& seq,
                                              int min_len = 22, int max_len = 25);

}  // namespace udit::text
