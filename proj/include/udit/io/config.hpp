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
#include <map>
#include <string>

namespace udit::io {

// Flat key/value configuration file: one "key = value" pair per line,
// '#' or ';' starts a comment, blank lines are skipped, keys and values are
// trimmed. Malformed lines are reported with their line number.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Environment variable name for a config key: "UDIT_" + the key uppercased
// with '.' and '-' mapped to '_'  (e.g. "frame_crop" -> UDIT_FRAME_CROP,
// "dec.ch1" -> UDIT_DEC_CH1).
std::string env_name_for_key(const std::string& key);

// Layered string settings with per-key provenance. Later layers override
// earlier ones: defaults < config file < environment (UDIT_*) < flags.
// Only keys with a registered default participate; unknown keys in a config
// file are an error so typos cannot silently change nothing.
class Settings {
public:
    struct Entry {
        std::string value;
        std::string source = "default";  // default | file | env | flag
    };

    void set_default(const std::string& key, const std::string& value);
    // Parses the file and applies every pair at the "file" layer.
    void load_file(const std::string& path);
    // Looks up env_name_for_key(k) for every registered key via getenv.
    void apply_env();
    // Same, from an explicit map (hermetic tests).
    void apply_env(const std::map<std::string, std::string>& env);
    void set_flag(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    const std::string& source(const std::string& key) const;

    // Typed accessors; errors name the key and the offending value.
    int get_int(const std::string& key) const;
    uint64_t get_uint64(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;  // true/false/1/0/yes/no

    // One "key = value  (source)" line per key, sorted, for run logs.
    std::string describe() const;

    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    void set_layer(const std::string& key, const std::string& value,
                   const std::string& source);

    std::map<std::string, Entry> entries_;
};

}  // namespace udit::io
