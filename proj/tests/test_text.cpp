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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "udit/core/rng.hpp"
#include "udit/text/lexicon.hpp"

using namespace udit::text;
using udit::Rng;

namespace {

std::string write_fixture(const std::string& name, const std::string& body) {
    const std::string path =
        (std::filesystem::temp_directory_path() / name).string();
    std::ofstream f(path);
    f << body;
    return path;
}

const char* kFixture =
    ";;; comment header\n"
    "HELLO  HH AH0 L OW1\n"
    "HELLO(2)  HH EH0 L OW1\n"
    "WORLD  W ER1 L D\n"
    "FOUR  F AO1 R\n"
    "TWO  T UW1\n"
    "A  AH0\n"
    "B  B IY1\n"
    "C  S IY1\n"
    "IT'S  IH1 T S\n";

Lexicon fixture_lexicon() {
    return load_lexicon(write_fixture("udit_lex.txt", kFixture));
}

std::vector<std::string> symbols_of(const PhonemeSequence& s) { return s.symbols; }

PhonemeSequence make_seq(const std::vector<int>& tokens) {
    PhonemeSequence s;
    s.tokens = tokens;
    for (int t : tokens) s.symbols.push_back(t == 1 ? kSilSymbol : "X" + std::to_string(t));
    return s;
}

}  // namespace

TEST_CASE("lexicon: parsing, variants, vocabulary") {
    Lexicon lex = fixture_lexicon();
    CHECK(lex.entries.at("HELLO") ==
          std::vector<std::string>{"HH", "AH0", "L", "OW1"});
    // Variant folded to the first pronunciation.
    CHECK(lex.entries.count("HELLO(2)") == 0);
    CHECK(lex.entries.at("HELLO")[1] == "AH0");
    CHECK(lex.entries.count("IT'S") == 1);

    CHECK(lex.vocab[0] == kPadSymbol);
    CHECK(lex.vocab[1] == kSilSymbol);
    CHECK(lex.vocab[2] == kUnkSymbol);
    for (int i = 0; i < lex.vocab_size(); ++i)
        CHECK(lex.symbol_to_id.at(lex.vocab[static_cast<size_t>(i)]) == i);
    for (const auto& [word, phones] : lex.entries)
        for (const auto& p : phones) CHECK(lex.symbol_to_id.count(p) == 1);
}

TEST_CASE("lexicon: error paths") {
    CHECK_THROWS_WITH_AS(load_lexicon(write_fixture("udit_lex_empty.txt", "")),
                         doctest::Contains("empty lexicon"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        load_lexicon(write_fixture("udit_lex_comments.txt", ";;; a\n;;; b\n")),
        doctest::Contains("empty lexicon"), std::runtime_error);
    CHECK_THROWS_WITH_AS(
        load_lexicon(write_fixture("udit_lex_bad.txt", "HELLO  HH\nLONE\n")),
        doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_AS(load_lexicon("/nonexistent/lexicon.txt"), std::runtime_error);
}

TEST_CASE("text_to_phonemes: lookups and boundaries") {
    Lexicon lex = fixture_lexicon();

    CHECK(symbols_of(text_to_phonemes("hello", lex)) ==
          std::vector<std::string>{"HH", "AH0", "L", "OW1"});
    CHECK(symbols_of(text_to_phonemes("hello hello", lex)) ==
          std::vector<std::string>{"HH", "AH0", "L", "OW1", "SIL", "HH", "AH0",
                                   "L", "OW1"});
    // Punctuation collapses into the single word boundary; none at the edges.
    CHECK(symbols_of(text_to_phonemes("  Hello, world!  ", lex)) ==
          std::vector<std::string>{"HH", "AH0", "L", "OW1", "SIL", "W", "ER1",
                                   "L", "D"});
    CHECK_THROWS_AS(text_to_phonemes("", lex), std::invalid_argument);
    CHECK_THROWS_AS(text_to_phonemes("  ...  ", lex), std::invalid_argument);

    // Token ids track the symbols.
    PhonemeSequence s = text_to_phonemes("hello", lex);
    for (int i = 0; i < s.size(); ++i)
        CHECK(lex.vocab[static_cast<size_t>(s.tokens[static_cast<size_t>(i)])] ==
              s.symbols[static_cast<size_t>(i)]);
}

TEST_CASE("text_to_phonemes: digits and out-of-vocabulary words") {
    Lexicon lex = fixture_lexicon();
    CHECK(symbols_of(text_to_phonemes("42", lex)) ==
          std::vector<std::string>{"F", "AO1", "R", "SIL", "T", "UW1"});
    // OOV falls back to per-letter spelling; letters without entries go UNK.
    CHECK(symbols_of(text_to_phonemes("cab", lex)) ==
          std::vector<std::string>{"S", "IY1", "AH0", "B", "IY1"});
    CHECK(symbols_of(text_to_phonemes("axb", lex)) ==
          std::vector<std::string>{"AH0", "UNK", "B", "IY1"});

    // Deterministic across calls.
    PhonemeSequence a = text_to_phonemes("hello world 42", lex);
    PhonemeSequence b = text_to_phonemes("hello world 42", lex);
    CHECK(a.tokens == b.tokens);
}

TEST_CASE("segment_phonemes: windowing rules") {
    SUBCASE("short input passes through") {
        auto segs = segment_phonemes(make_seq(std::vector<int>(10, 5)));
        CHECK(segs.size() == 1);
        CHECK(segs[0].size() == 10);
    }
    SUBCASE("no silence: greedy max fill") {
        auto segs = segment_phonemes(make_seq(std::vector<int>(50, 5)));
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].size() == 25);
        CHECK(segs[1].size() == 25);
    }
    SUBCASE("silence boundary preferred") {
        std::vector<int> tokens(30, 5);
        tokens[24] = 1;  // SIL
        auto segs = segment_phonemes(make_seq(tokens));
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].size() == 24);
        CHECK(segs[1].size() == 6);
        CHECK(segs[1].tokens[0] == 1);  // the SIL opens the next segment
    }
}

TEST_CASE("segment_phonemes: lossless over random sequences") {
    Rng rng(33);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.integer(120));
        std::vector<int> tokens(static_cast<size_t>(n));
        for (auto& t : tokens)
            t = rng.uniform() < 0.15 ? 1 : 3 + static_cast<int>(rng.integer(40));
        auto segs = segment_phonemes(make_seq(tokens));

        std::vector<int> flat;
        for (size_t i = 0; i < segs.size(); ++i) {
            CHECK(segs[i].size() <= 25);
            if (i + 1 < segs.size()) CHECK(segs[i].size() >= 22);
            CHECK(!segs[i].tokens.empty());
            flat.insert(flat.end(), segs[i].tokens.begin(), segs[i].tokens.end());
        }
        CHECK(flat == tokens);
    }
}
