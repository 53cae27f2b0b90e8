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

#include "udit/io/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "udit/core/check.hpp"

namespace udit::io {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open config file " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const size_t comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config file " + path + " line " +
                                     std::to_string(line_no) +
                                     ": expected key = value, got \"" + line +
                                     "\"");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config file " + path + " line " +
                                     std::to_string(line_no) + ": empty key");
        if (out.count(key))
            throw std::runtime_error("config file " + path + " line " +
                                     std::to_string(line_no) +
                                     ": duplicate key \"" + key + "\"");
        out[key] = value;
    }
    return out;
}

std::string env_name_for_key(const std::string& key) {
    std::string name = "UDIT_";
    for (char c : key) {
        if (c == '.' || c == '-')
            name.push_back('_');
        else
            name.push_back(
                static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return name;
}

void Settings::set_default(const std::string& key, const std::string& value) {
    check_arg(!key.empty(), "Settings: empty key");
    entries_[key] = Entry{value, "default"};
}

void Settings::set_layer(const std::string& key, const std::string& value,
                         const std::string& source) {
    auto it = entries_.find(key);
    if (it == entries_.end())
        throw std::runtime_error("unknown config key \"" + key + "\" (from " +
                                 source + "); known keys have defaults");
    it->second.value = value;
    it->second.source = source;
}

void Settings::load_file(const std::string& path) {
    for (const auto& [k, v] : parse_config_file(path)) set_layer(k, v, "file");
}

void Settings::apply_env() {
    for (auto& [key, entry] : entries_) {
        const char* v = std::getenv(env_name_for_key(key).c_str());
        if (v != nullptr) {
            entry.value = v;
            entry.source = "env";
        }
    }
}

void Settings::apply_env(const std::map<std::string, std::string>& env) {
    for (auto& [key, entry] : entries_) {
        const auto it = env.find(env_name_for_key(key));
        if (it != env.end()) {
            entry.value = it->second;
            entry.source = "env";
        }
    }
}

void Settings::set_flag(const std::string& key, const std::string& value) {
    set_layer(key, value, "flag");
}

bool Settings::has(const std::string& key) const {
    return entries_.count(key) != 0;
}

const std::string& Settings::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
        throw std::runtime_error("unknown config key \"" + key + "\"");
    return it->second.value;
}

const std::string& Settings::source(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
        throw std::runtime_error("unknown config key \"" + key + "\"");
    return it->second.source;
}

int Settings::get_int(const std::string& key) const {
    const std::string& v = get(key);
    try {
        size_t used = 0;
        const int n = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return n;
    } catch (const std::exception&) {
        throw std::runtime_error("config key \"" + key +
                                 "\": not an integer: \"" + v + "\"");
    }
}

uint64_t Settings::get_uint64(const std::string& key) const {
    const std::string& v = get(key);
    try {
        size_t used = 0;
        const unsigned long long n = std::stoull(v, &used);
        if (used != v.size() || v.find('-') != std::string::npos)
            throw std::invalid_argument(v);
        return static_cast<uint64_t>(n);
    } catch (const std::exception&) {
        throw std::runtime_error("config key \"" + key +
                                 "\": not an unsigned integer: \"" + v + "\"");
    }
}

double Settings::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::runtime_error("config key \"" + key + "\": not a number: \"" +
                                 v + "\"");
    }
}

bool Settings::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config key \"" + key + "\": not a boolean: \"" +
                             v + "\"");
}

std::string Settings::describe() const {
    std::ostringstream os;
    for (const auto& [key, entry] : entries_)
        os << key << " = " << entry.value << "  (" << entry.source << ")\n";
    return os.str();
}

}  // namespace udit::io
