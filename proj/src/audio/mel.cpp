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

#include "udit/audio/mel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "udit/audio/fft.hpp"
#include "udit/core/check.hpp"
#include "udit/core/rng.hpp"

namespace udit::audio {

namespace {

// Slaney mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz) {
    const double f_sp = 200.0 / 3.0;
    const double min_log_hz = 1000.0;
    const double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (hz < min_log_hz) return hz / f_sp;
    return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz(double mel) {
    const double f_sp = 200.0 / 3.0;
    const double min_log_hz = 1000.0;
    const double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (mel < min_log_mel) return mel * f_sp;
    return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

// The n_mels + 2 band-edge frequencies, evenly spaced on the mel scale.
std::vector<double> band_edges(const MelConfig& cfg) {
    const double mel_lo = hz_to_mel(cfg.fmin);
    const double mel_hi = hz_to_mel(cfg.fmax);
    std::vector<double> hz(static_cast<size_t>(cfg.n_mels) + 2);
    for (int i = 0; i < cfg.n_mels + 2; ++i) {
        const double m = mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1);
        hz[static_cast<size_t>(i)] = mel_to_hz(m);
    }
    return hz;
}

std::vector<double> hann_periodic(int n) {
    std::vector<double> w(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        w[static_cast<size_t>(i)] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / n));
    return w;
}

// Window of win_length taps centered inside an fft_size frame.
std::vector<double> framed_window(const MelConfig& cfg) {
    std::vector<double> w(static_cast<size_t>(cfg.fft_size), 0.0);
    const std::vector<double> h = hann_periodic(cfg.win_length);
    const int off = (cfg.fft_size - cfg.win_length) / 2;
    for (int i = 0; i < cfg.win_length; ++i) w[static_cast<size_t>(off + i)] = h[static_cast<size_t>(i)];
    return w;
}

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

std::vector<double> pad_center_reflect(const std::vector<double>& x, int pad) {
    const int n = static_cast<int>(x.size());
    std::vector<double> out(static_cast<size_t>(n + 2 * pad));
    for (int i = 0; i < n + 2 * pad; ++i)
        out[static_cast<size_t>(i)] = x[static_cast<size_t>(reflect_index(i - pad, n))];
    return out;
}

int frame_count(int64_t padded_len, const MelConfig& cfg) {
    return static_cast<int>(1 + (padded_len - cfg.fft_size) / cfg.hop_length);
}

// Complex STFT of a padded signal: [n_frames][fft/2+1].
std::vector<std::vector<std::complex<double>>> stft_padded(
    const std::vector<double>& padded, const MelConfig& cfg) {
    const std::vector<double> win = framed_window(cfg);
    const int n_frames = frame_count(static_cast<int64_t>(padded.size()), cfg);
    std::vector<std::vector<std::complex<double>>> spec(static_cast<size_t>(n_frames));
    std::vector<double> frame(static_cast<size_t>(cfg.fft_size));
    for (int f = 0; f < n_frames; ++f) {
        const int64_t start = static_cast<int64_t>(f) * cfg.hop_length;
        for (int i = 0; i < cfg.fft_size; ++i)
            frame[static_cast<size_t>(i)] =
                padded[static_cast<size_t>(start + i)] * win[static_cast<size_t>(i)];
        spec[static_cast<size_t>(f)] = rfft(frame);
    }
    return spec;
}

// Overlap-add inverse STFT with squared-window normalization; returns a
// signal in the padded domain (same length convention as stft_padded input).
std::vector<double> istft_padded(
    const std::vector<std::vector<std::complex<double>>>& spec, const MelConfig& cfg) {
    const std::vector<double> win = framed_window(cfg);
    const int n_frames = static_cast<int>(spec.size());
    const int64_t total =
        static_cast<int64_t>(n_frames - 1) * cfg.hop_length + cfg.fft_size;
    std::vector<double> out(static_cast<size_t>(total), 0.0);
    std::vector<double> norm(static_cast<size_t>(total), 0.0);
    for (int f = 0; f < n_frames; ++f) {
        const std::vector<double> frame = irfft(spec[static_cast<size_t>(f)], cfg.fft_size);
        const int64_t start = static_cast<int64_t>(f) * cfg.hop_length;
        for (int i = 0; i < cfg.fft_size; ++i) {
            out[static_cast<size_t>(start + i)] += frame[static_cast<size_t>(i)] * win[static_cast<size_t>(i)];
            norm[static_cast<size_t>(start + i)] += win[static_cast<size_t>(i)] * win[static_cast<size_t>(i)];
        }
    }
    for (size_t i = 0; i < out.size(); ++i)
        if (norm[i] > 1e-9) out[i] /= norm[i];
    return out;
}

}  // namespace

void validate(const MelConfig& cfg) {
    check_arg(cfg.n_mels > 0 && cfg.win_length > 0 && cfg.hop_length > 0 &&
                  cfg.fft_size > 0,
              "mel config: sizes must be positive");
    check_arg(cfg.hop_length <= cfg.win_length && cfg.win_length <= cfg.fft_size,
              "mel config: need hop <= win <= fft");
    check_arg((cfg.fft_size & (cfg.fft_size - 1)) == 0,
              "mel config: fft_size must be a power of 2");
    check_arg(cfg.n_mels < cfg.fft_size / 2 + 1,
              "mel config: n_mels must be < fft_size/2 + 1");
    check_arg(cfg.fmin >= 0.0 && cfg.fmax > cfg.fmin, "mel config: need 0 <= fmin < fmax");
    check_arg(cfg.fmax <= kSampleRate / 2.0, "mel config: fmax above Nyquist");
    check_arg(cfg.log_floor > 0.0, "mel config: log_floor must be positive");
}

Tensor mel_filterbank(const MelConfig& cfg, int sample_rate) {
    validate(cfg);
    const int n_bins = cfg.fft_size / 2 + 1;
    const std::vector<double> f = band_edges(cfg);
    Tensor fb(Shape{cfg.n_mels, n_bins});
    for (int i = 0; i < cfg.n_mels; ++i) {
        const double lo = f[static_cast<size_t>(i)];
        const double mid = f[static_cast<size_t>(i) + 1];
        const double hi = f[static_cast<size_t>(i) + 2];
        const double norm = 2.0 / (hi - lo);  // Slaney area normalization
        for (int k = 0; k < n_bins; ++k) {
            const double freq = static_cast<double>(k) * sample_rate / cfg.fft_size;
            const double up = (freq - lo) / (mid - lo);
            const double down = (hi - freq) / (hi - mid);
            fb.at(i, k) = norm * std::max(0.0, std::min(up, down));
        }
    }
    return fb;
}

std::vector<double> mel_center_frequencies(const MelConfig& cfg) {
    const std::vector<double> f = band_edges(cfg);
    return std::vector<double>(f.begin() + 1, f.begin() + 1 + cfg.n_mels);
}

Tensor magnitude_stft(const std::vector<double>& samples, int win, int hop,
                      int fft) {
    check_arg(!samples.empty(), "magnitude_stft: empty signal");
    check_arg(hop > 0 && hop <= win && win <= fft,
              "magnitude_stft: need 0 < hop <= win <= fft");
    check_arg((fft & (fft - 1)) == 0, "magnitude_stft: fft must be a power of 2");

    MelConfig frame_cfg;  // only the framing fields are consulted
    frame_cfg.win_length = win;
    frame_cfg.hop_length = hop;
    frame_cfg.fft_size = fft;
    const std::vector<double> padded = pad_center_reflect(samples, fft / 2);
    const auto spec = stft_padded(padded, frame_cfg);
    const int n_frames = static_cast<int>(spec.size());
    const int n_bins = fft / 2 + 1;
    Tensor out(Shape{n_bins, n_frames});
    for (int t = 0; t < n_frames; ++t)
        for (int k = 0; k < n_bins; ++k)
            out.at(k, t) =
                std::abs(spec[static_cast<size_t>(t)][static_cast<size_t>(k)]);
    return out;
}

MelSpectrogram compute_mel(const Waveform& w, const MelConfig& cfg) {
    validate(cfg);
    check_arg(w.sample_rate == kSampleRate,
              "compute_mel: waveform must be at 22050 Hz (got " +
                  std::to_string(w.sample_rate) + ")");
    check_arg(!w.samples.empty(), "compute_mel: empty waveform");

    const std::vector<double> padded = pad_center_reflect(w.samples, cfg.fft_size / 2);
    const auto spec = stft_padded(padded, cfg);
    const int n_frames = static_cast<int>(spec.size());
    const int n_bins = cfg.fft_size / 2 + 1;

    const Tensor fb = mel_filterbank(cfg, kSampleRate);
    MelSpectrogram m;
    m.config = cfg;
    m.values = Tensor(Shape{cfg.n_mels, n_frames});
    const double lfloor = std::log(cfg.log_floor);
    for (int t = 0; t < n_frames; ++t) {
        for (int i = 0; i < cfg.n_mels; ++i) {
            double acc = 0.0;
            for (int k = 0; k < n_bins; ++k)
                acc += fb.at(i, k) * std::abs(spec[static_cast<size_t>(t)][static_cast<size_t>(k)]);
            m.values.at(i, t) = acc <= cfg.log_floor ? lfloor : std::log(acc);
        }
    }
    check_state(m.values.all_finite(), "compute_mel: non-finite output");
    return m;
}

Waveform invert_mel(const MelSpectrogram& m, int n_iters, uint64_t phase_seed) {
    const MelConfig& cfg = m.config;
    validate(cfg);
    check_arg(n_iters >= 1, "invert_mel: n_iters must be >= 1");
    check_arg(m.values.ndim() == 2 && m.values.rows() == cfg.n_mels &&
                  m.values.cols() >= 1,
              "invert_mel: values must be [n_mels x n_frames]");

    const int n_frames = m.values.cols();
    const int n_bins = cfg.fft_size / 2 + 1;

    // Target linear magnitudes: pinv(filterbank) applied to exp(log-mel).
    using RowMat =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Tensor fb = mel_filterbank(cfg, kSampleRate);
    Eigen::Map<const RowMat> FB(fb.data(), cfg.n_mels, n_bins);
    RowMat mel_lin(cfg.n_mels, n_frames);
    for (int i = 0; i < cfg.n_mels; ++i)
        for (int t = 0; t < n_frames; ++t) mel_lin(i, t) = std::exp(m.values.at(i, t));
    RowMat mag = FB.completeOrthogonalDecomposition().pseudoInverse() * mel_lin;
    mag = mag.cwiseMax(0.0);  // [n_bins x n_frames]

    // Griffin-Lim with a seeded random initial phase.
    Rng rng(phase_seed);
    std::vector<std::vector<std::complex<double>>> spec(
        static_cast<size_t>(n_frames),
        std::vector<std::complex<double>>(static_cast<size_t>(n_bins)));
    for (int t = 0; t < n_frames; ++t)
        for (int k = 0; k < n_bins; ++k) {
            const double phi = rng.uniform(0.0, 2.0 * kPi);
            spec[static_cast<size_t>(t)][static_cast<size_t>(k)] =
                std::polar(mag(k, t), phi);
        }
    for (int it = 0; it < n_iters; ++it) {
        const std::vector<double> x = istft_padded(spec, cfg);
        const auto est = stft_padded(x, cfg);
        for (int t = 0; t < n_frames; ++t)
            for (int k = 0; k < n_bins; ++k) {
                const std::complex<double> z = est[static_cast<size_t>(t)][static_cast<size_t>(k)];
                const double a = std::abs(z);
                spec[static_cast<size_t>(t)][static_cast<size_t>(k)] =
                    a > 1e-12 ? z * (mag(k, t) / a) : std::polar(mag(k, t), 0.0);
            }
    }

    const std::vector<double> padded = istft_padded(spec, cfg);
    const int pad = cfg.fft_size / 2;
    const int64_t out_len = static_cast<int64_t>(n_frames - 1) * cfg.hop_length;
    Waveform w;
    w.sample_rate = kSampleRate;
    w.samples.resize(static_cast<size_t>(std::max<int64_t>(out_len, 1)), 0.0);
    for (int64_t i = 0; i < out_len && static_cast<size_t>(pad + i) < padded.size(); ++i)
        w.samples[static_cast<size_t>(i)] = padded[static_cast<size_t>(pad + i)];

    double peak = 0.0;
    for (double s : w.samples) peak = std::max(peak, std::fabs(s));
    check_state(std::isfinite(peak), "invert_mel: non-finite output");
    if (peak > 1.0)
        for (double& s : w.samples) s *= 0.999 / peak;
    return w;
}

}  // namespace udit::audio
