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

#include "udit/text/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "udit/core/check.hpp"

namespace udit::text {

namespace {

const char* kDigitNames[10] = {"ZERO", "ONE", "TWO",   "THREE", "FOUR",
                               "FIVE", "SIX", "SEVEN", "EIGHT", "NINE"};

bool is_word_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '\'';
}

}  // namespace

Lexicon make_lexicon(std::map<std::string, std::vector<std::string>> entries) {
    check_arg(!entries.empty(), "empty lexicon");
    Lexicon lex;
    lex.entries = std::move(entries);
    std::set<std::string> symbols;
    for (const auto& [word, phones] : lex.entries)
        for (const auto& p : phones) symbols.insert(p);
    symbols.erase(kPadSymbol);
    symbols.erase(kSilSymbol);
    symbols.erase(kUnkSymbol);
    lex.vocab = {kPadSymbol, kSilSymbol, kUnkSymbol};
    lex.vocab.insert(lex.vocab.end(), symbols.begin(), symbols.end());
    for (size_t i = 0; i < lex.vocab.size(); ++i)
        lex.symbol_to_id[lex.vocab[i]] = static_cast<int>(i);
    return lex;
}

Lexicon load_lexicon(const std::string& path) {
    std::ifstream f(path);
    check_state(f.good(), "load_lexicon: cannot open " + path);

    std::map<std::string, std::vector<std::string>> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line.rfind(";;;", 0) == 0) continue;
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word.empty()) continue;
        std::vector<std::string> phones;
        std::string p;
        while (ss >> p) phones.push_back(p);
        check_state(!phones.empty(), "load_lexicon: malformed line " +
                                         std::to_string(line_no) + " in " + path);
        // "WORD(2)" is an alternate pronunciation; the first one wins.
        const size_t paren = word.find('(');
        if (paren != std::string::npos) word = word.substr(0, paren);
        check_state(!word.empty(), "load_lexicon: malformed line " +
                                       std::to_string(line_no) + " in " + path);
        entries.emplace(word, std::move(phones));  // keeps the first occurrence
    }
    check_state(!entries.empty(), "load_lexicon: empty lexicon: " + path);
    return make_lexicon(std::move(entries));
}

PhonemeSequence text_to_phonemes(const std::string& text, const Lexicon& lex) {
    // Normalize into a word list: uppercase, digits spelled out, everything
    // else (whitespace, punctuation) acting as a word boundary.
    std::vector<std::string> words;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    };
    for (char c : text) {
        if (is_word_char(c)) {
            cur.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        } else if (c >= '0' && c <= '9') {
            flush();
            words.emplace_back(kDigitNames[c - '0']);
        } else {
            flush();
        }
    }
    flush();
    check_arg(!words.empty(), "text_to_phonemes: empty text");

    PhonemeSequence seq;
    auto emit = [&](const std::string& symbol) {
        const auto it = lex.symbol_to_id.find(symbol);
        check_state(it != lex.symbol_to_id.end(),
                    "text_to_phonemes: symbol not in vocabulary: " + symbol);
        seq.tokens.push_back(it->second);
        seq.symbols.push_back(symbol);
    };
    auto emit_word = [&](const std::string& word) {
        const auto it = lex.entries.find(word);
        if (it != lex.entries.end()) {
            for (const auto& p : it->second) emit(p);
            return;
        }
        // Out of vocabulary: spell it letter by letter, UNK as last resort.
        for (char c : word) {
            const std::string letter(1, c);
            const auto lit = lex.entries.find(letter);
            if (lit != lex.entries.end())
                for (const auto& p : lit->second) emit(p);
            else
                emit(kUnkSymbol);
        }
    };
    for (size_t i = 0; i < words.size(); ++i) {
        if (i > 0) emit(kSilSymbol);
        emit_word(words[i]);
    }
    return seq;
}

std::vector<PhonemeSequence> segment_phonemes(const PhonemeSequence& seq,
                                              int min_len, int max_len) {
    check_arg(min_len >= 1 && min_len <= max_len,
              "segment_phonemes: need 1 <= min_len <= max_len");
    check_arg(!seq.tokens.empty(), "segment_phonemes: empty sequence");

    std::vector<PhonemeSequence> out;
    const int n = seq.size();
    const int sil = 1;  // Lexicon::sil_id()
    int start = 0;
    while (n - start > max_len) {
        int cut = max_len;  // greedy max-fill fallback
        for (int p = max_len; p >= min_len; --p) {
            if (seq.tokens[static_cast<size_t>(start + p)] == sil) {
                cut = p;
                break;
            }
        }
        PhonemeSequence s;
        s.tokens.assign(seq.tokens.begin() + start, seq.tokens.begin() + start + cut);
        s.symbols.assign(seq.symbols.begin() + start, seq.symbols.begin() + start + cut);
        out.push_back(std::move(s));
        start += cut;
    }
    PhonemeSequence last;
    last.tokens.assign(seq.tokens.begin() + start, seq.tokens.end());
    last.symbols.assign(seq.symbols.begin() + start, seq.symbols.end());
    out.push_back(std::move(last));
    return out;
}

}  // namespace udit::text
