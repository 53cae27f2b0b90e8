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

#include "udit/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "udit/audio/fft.hpp"
#include "udit/core/check.hpp"

namespace udit::audio {

namespace {

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void write_u32(std::ofstream& f, uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

void write_u16(std::ofstream& f, uint16_t v) {
    uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
    f.write(reinterpret_cast<const char*>(b), 2);
}

double sinc(double z) {
    if (std::fabs(z) < 1e-12) return 1.0;
    const double pz = kPi * z;
    return std::sin(pz) / pz;
}

}  // namespace

Waveform load_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    check_state(f.good(), "load_wav: cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    check_state(bytes.size() >= 44, "load_wav: file too small to be a WAV: " + path);
    check_state(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
                    std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
                "load_wav: not a RIFF/WAVE file: " + path);

    uint16_t audio_format = 0, n_channels = 0, bits = 0;
    uint32_t sample_rate = 0;
    const uint8_t* data = nullptr;
    uint32_t data_size = 0;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const uint32_t sz = read_u32(bytes.data() + pos + 4);
        const size_t body = pos + 8;
        if (body + sz > bytes.size()) break;
        if (std::memcmp(id, "fmt ", 4) == 0 && sz >= 16) {
            audio_format = read_u16(bytes.data() + body);
            n_channels = read_u16(bytes.data() + body + 2);
            sample_rate = read_u32(bytes.data() + body + 4);
            bits = read_u16(bytes.data() + body + 14);
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = sz;
        }
        pos = body + sz + (sz & 1);  // chunks are word-aligned
    }

    check_state(audio_format != 0, "load_wav: missing fmt chunk: " + path);
    check_state(data != nullptr, "load_wav: missing data chunk: " + path);
    check_state(n_channels >= 1, "load_wav: zero channels: " + path);
    const bool pcm16 = audio_format == 1 && bits == 16;
    const bool float32 = audio_format == 3 && bits == 32;
    check_state(pcm16 || float32,
                "load_wav: unsupported encoding (format " + std::to_string(audio_format) +
                    ", " + std::to_string(bits) + " bit) in " + path);

    const uint32_t bytes_per_sample = bits / 8;
    const uint32_t frame_size = bytes_per_sample * n_channels;
    const uint32_t n_frames = data_size / frame_size;
    check_state(n_frames > 0, "load_wav: zero-length audio: " + path);

    std::vector<double> mono(n_frames, 0.0);
    for (uint32_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (uint16_t c = 0; c < n_channels; ++c) {
            const uint8_t* p = data + static_cast<size_t>(i) * frame_size +
                               static_cast<size_t>(c) * bytes_per_sample;
            if (pcm16) {
                int16_t v;
                std::memcpy(&v, p, 2);
                acc += static_cast<double>(v) / 32768.0;
            } else {
                float v;
                std::memcpy(&v, p, 4);
                acc += static_cast<double>(v);
            }
        }
        mono[i] = acc / n_channels;
    }
    for (double& s : mono) s = std::clamp(s, -1.0, 1.0);

    Waveform w;
    w.sample_rate = kSampleRate;
    w.samples = (static_cast<int>(sample_rate) == kSampleRate)
                    ? std::move(mono)
                    : resample(mono, static_cast<int>(sample_rate), kSampleRate);
    check_state(!w.samples.empty(), "load_wav: zero-length audio after resampling: " + path);
    return w;
}

void save_wav(const std::string& path, const Waveform& w) {
    check_arg(!w.samples.empty(), "save_wav: empty waveform");
    check_arg(w.sample_rate > 0, "save_wav: bad sample rate");
    std::ofstream f(path, std::ios::binary);
    check_state(f.good(), "save_wav: cannot open " + path + " for writing");

    const uint32_t n = static_cast<uint32_t>(w.samples.size());
    const uint32_t data_size = n * 2;
    f.write("RIFF", 4);
    write_u32(f, 36 + data_size);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    write_u32(f, 16);
    write_u16(f, 1);  // PCM
    write_u16(f, 1);  // mono
    write_u32(f, static_cast<uint32_t>(w.sample_rate));
    write_u32(f, static_cast<uint32_t>(w.sample_rate) * 2);
    write_u16(f, 2);   // block align
    write_u16(f, 16);  // bits
    f.write("data", 4);
    write_u32(f, data_size);
    for (uint32_t i = 0; i < n; ++i) {
        const double s = std::clamp(w.samples[i], -1.0, 1.0);
        const int16_t v = static_cast<int16_t>(std::lround(s * 32767.0));
        f.write(reinterpret_cast<const char*>(&v), 2);
    }
    check_state(f.good(), "save_wav: write failed for " + path);
}

std::vector<double> resample(const std::vector<double>& x, int sr_in, int sr_out) {
    check_arg(sr_in > 0 && sr_out > 0, "resample: rates must be positive");
    if (sr_in == sr_out) return x;
    check_arg(!x.empty(), "resample: empty input");

    const double ratio = static_cast<double>(sr_out) / sr_in;
    const int64_t out_len = std::llround(static_cast<double>(x.size()) * ratio);
    // Anti-aliasing cutoff: the narrower of the two Nyquist bands.
    const double scale = std::min(1.0, ratio);
    const int half_taps = 32;
    const double width = half_taps / scale;

    std::vector<double> out(static_cast<size_t>(out_len), 0.0);
    const int64_t in_len = static_cast<int64_t>(x.size());
    for (int64_t n = 0; n < out_len; ++n) {
        const double t = static_cast<double>(n) / ratio;
        const int64_t lo = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(t - width)));
        const int64_t hi =
            std::min<int64_t>(in_len - 1, static_cast<int64_t>(std::floor(t + width)));
        double acc = 0.0;
        for (int64_t m = lo; m <= hi; ++m) {
            const double tau = t - static_cast<double>(m);
            const double window = 0.5 + 0.5 * std::cos(kPi * tau / width);
            acc += x[static_cast<size_t>(m)] * scale * sinc(scale * tau) * window;
        }
        out[static_cast<size_t>(n)] = std::clamp(acc, -1.0, 1.0);
    }
    return out;
}

}  // namespace udit::audio
