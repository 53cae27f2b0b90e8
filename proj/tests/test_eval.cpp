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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "udit/audio/mel.hpp"
#include "udit/audio/wav.hpp"
#include "udit/core/rng.hpp"
#include "udit/core/tensor.hpp"
#include "udit/eval/metrics.hpp"

using udit::Rng;
using udit::Shape;
using udit::Tensor;
namespace eval = udit::eval;
namespace audio = udit::audio;

namespace {

audio::Waveform noise_wave(int n, uint64_t seed, double amp) {
    audio::Waveform w;
    Rng rng(seed);
    w.samples.resize(static_cast<size_t>(n));
    for (double& s : w.samples) s = amp * rng.normal();
    return w;
}

eval::EmbeddingSet gaussian_set(int n, double mean, double std, uint64_t seed) {
    eval::EmbeddingSet set;
    set.provenance = "test";
    set.vectors = Tensor(Shape{n, 1});
    Rng rng(seed);
    for (int i = 0; i < n; ++i) set.vectors.at(i, 0) = mean + std * rng.normal();
    return set;
}

}  // namespace

TEST_CASE("lsd is zero for identical signals and symmetric otherwise") {
    audio::Waveform a = noise_wave(22050, 5, 0.3);
    CHECK(eval::lsd(a, a) == 0.0);

    audio::Waveform b = noise_wave(22050, 6, 0.3);
    CHECK(eval::lsd(a, b) > 0.0);
    CHECK(eval::lsd(a, b) == doctest::Approx(eval::lsd(b, a)).epsilon(1e-12));
}

TEST_CASE("lsd of a doubled signal is 20 log10 2 dB") {
    // Small amplitude keeps both signals inside the [-1, 1] waveform range,
    // where the resampler is exactly linear (it clamps outside it).
    audio::Waveform a = noise_wave(22050, 7, 0.05);
    audio::Waveform twice = a;
    for (double& s : twice.samples) s *= 2.0;  // exact scaling in binary

    // Every bin ratio is exactly 2, so every frame contributes the same
    // constant and the mean equals it.
    CHECK(eval::lsd(a, twice) ==
          doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
    CHECK(eval::lsd(twice, a) ==
          doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("lsd matches a direct reference computation on a random pair") {
    audio::Waveform a = noise_wave(18000, 8, 0.25);
    audio::Waveform b = noise_wave(20000, 9, 0.25);

    const std::vector<double> ra = audio::resample(a.samples, 22050, 16000);
    const std::vector<double> rb = audio::resample(b.samples, 22050, 16000);
    const Tensor sa = audio::magnitude_stft(ra, 1024, 256, 1024);
    const Tensor sb = audio::magnitude_stft(rb, 1024, 256, 1024);
    const int nf = std::min(sa.cols(), sb.cols());
    double ref = 0.0;
    for (int t = 0; t < nf; ++t) {
        double frame = 0.0;
        for (int k = 0; k < sa.rows(); ++k) {
            const double db = 20.0 * std::log10(std::max(sa.at(k, t), 1e-8) /
                                                std::max(sb.at(k, t), 1e-8));
            frame += db * db;
        }
        ref += std::sqrt(frame / sa.rows());
    }
    ref /= nf;

    CHECK(eval::lsd(a, b) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("lsd truncates to the common frame count") {
    audio::Waveform a = noise_wave(22050, 10, 0.05);
    audio::Waveform longer = a;
    longer.samples.resize(a.samples.size() + 4096, 0.0);

    // Every frame of the shorter analysis whose window stays inside the
    // shared samples is identical in both signals; only the last few
    // boundary frames differ (reflect padding against appended zeros). The
    // distance is therefore small, and exactly the reference over the
    // common frame count.
    const double d = eval::lsd(a, longer);
    CHECK(d > 0.0);
    CHECK(d < 1.5);

    const std::vector<double> ra = audio::resample(a.samples, 22050, 16000);
    const std::vector<double> rl = audio::resample(longer.samples, 22050, 16000);
    const Tensor sa = audio::magnitude_stft(ra, 1024, 256, 1024);
    const Tensor sl = audio::magnitude_stft(rl, 1024, 256, 1024);
    REQUIRE(sl.cols() > sa.cols());
    const int nf = sa.cols();
    double ref = 0.0;
    int interior_zero = 0;
    for (int t = 0; t < nf; ++t) {
        double frame = 0.0;
        for (int k = 0; k < sa.rows(); ++k) {
            const double db = 20.0 * std::log10(std::max(sa.at(k, t), 1e-8) /
                                                std::max(sl.at(k, t), 1e-8));
            frame += db * db;
        }
        if (frame == 0.0) ++interior_zero;
        ref += std::sqrt(frame / sa.rows());
    }
    ref /= nf;
    CHECK(d == doctest::Approx(ref).epsilon(1e-12));
    CHECK(interior_zero > nf / 2);  // the bulk of the frames match exactly
}

TEST_CASE("lsd rejects signals shorter than one window") {
    audio::Waveform tiny = noise_wave(100, 11, 0.3);
    audio::Waveform ok = noise_wave(22050, 12, 0.3);
    CHECK_THROWS_AS(eval::lsd(tiny, ok), std::invalid_argument);
    CHECK_THROWS_AS(eval::lsd(ok, tiny), std::invalid_argument);
}

TEST_CASE("frechet distance vanishes on equal sets and is symmetric") {
    Rng rng(13);
    eval::EmbeddingSet a;
    a.provenance = "test";
    a.vectors = Tensor::randn({50, 6}, rng);

    CHECK(eval::frechet_distance(a, a) < 1e-8);

    eval::EmbeddingSet b;
    b.provenance = "test";
    b.vectors = Tensor::randn({40, 6}, rng);
    const double ab = eval::frechet_distance(a, b);
    CHECK(ab > 0.0);
    CHECK(eval::frechet_distance(b, a) == ab);  // symmetric by construction
}

TEST_CASE("frechet distance matches an exact two-point construction") {
    // Sets {0, 2} and {1, 3}: means 1 and 2, equal sample variances, so the
    // covariance terms cancel (the shared ridge cancels too) and
    // FD = (1 - 2)^2 = 1.
    eval::EmbeddingSet a, b;
    a.vectors = Tensor::from({2, 1}, {0.0, 2.0});
    b.vectors = Tensor::from({2, 1}, {1.0, 3.0});
    CHECK(eval::frechet_distance(a, b) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("frechet distance recovers the 1-D closed form within 3 SE") {
    // N(0,1) vs N(1,1): population FD = (m1-m2)^2 + (s1-s2)^2 = 1. The
    // estimator's variance is dominated by the mean-difference term,
    // var ~= 8/n, so 3 SE = 3 sqrt(8/n).
    const int n = 10000;
    eval::EmbeddingSet a = gaussian_set(n, 0.0, 1.0, 14);
    eval::EmbeddingSet b = gaussian_set(n, 1.0, 1.0, 15);
    const double fd = eval::frechet_distance(a, b);
    CHECK(std::abs(fd - 1.0) <= 3.0 * std::sqrt(8.0 / n));
}

TEST_CASE("frechet distance validates its inputs") {
    eval::EmbeddingSet ok = gaussian_set(10, 0.0, 1.0, 16);
    eval::EmbeddingSet one;
    one.vectors = Tensor::zeros({1, 1});
    CHECK_THROWS_AS(eval::frechet_distance(one, ok), std::invalid_argument);

    eval::EmbeddingSet wide;
    wide.vectors = Tensor::zeros({10, 2});
    CHECK_THROWS_AS(eval::frechet_distance(ok, wide), std::invalid_argument);

    eval::EmbeddingSet bad = gaussian_set(10, 0.0, 1.0, 17);
    bad.vectors.at(3, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(eval::frechet_distance(ok, bad), std::invalid_argument);
}

TEST_CASE("kl divergence matches the frozen two-bin example") {
    // 0.5 ln 2 + 0.5 ln(2/3) = 0.14384103622589045 nats.
    CHECK(eval::kl_divergence({0.5, 0.5}, {0.25, 0.75}) ==
          doctest::Approx(0.14384103622589045).epsilon(1e-6));
}

TEST_CASE("kl divergence is zero on equal distributions and never negative") {
    std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
    CHECK(eval::kl_divergence(p, p) == 0.0);

    Rng rng(18);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(8), y(8);
        double sx = 0.0, sy = 0.0;
        for (int i = 0; i < 8; ++i) {
            x[static_cast<size_t>(i)] = rng.uniform() + 1e-3;
            y[static_cast<size_t>(i)] = rng.uniform() + 1e-3;
            sx += x[static_cast<size_t>(i)];
            sy += y[static_cast<size_t>(i)];
        }
        for (int i = 0; i < 8; ++i) {
            x[static_cast<size_t>(i)] /= sx;
            y[static_cast<size_t>(i)] /= sy;
        }
        CHECK(eval::kl_divergence(x, y) >= 0.0);
    }
}

TEST_CASE("kl divergence smooths zeros and rejects bad inputs") {
    // A zero in q where p has mass stays finite thanks to smoothing, but is
    // enormous; a zero in p contributes (almost) nothing.
    const double spiked = eval::kl_divergence({0.5, 0.5}, {1.0, 0.0});
    CHECK(std::isfinite(spiked));
    CHECK(spiked > 5.0);
    CHECK(eval::kl_divergence({1.0, 0.0}, {0.5, 0.5}) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-6));

    // Sub-tolerance normalization error is absorbed.
    CHECK(eval::kl_divergence({0.5 + 5e-7, 0.5}, {0.5, 0.5}) ==
          doctest::Approx(0.0).epsilon(1e-6));

    CHECK_THROWS_AS(eval::kl_divergence({0.6, 0.6}, {0.5, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(eval::kl_divergence({0.5, 0.5}, {1.5, -0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(eval::kl_divergence({1.0}, {0.5, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(eval::kl_divergence({}, {}), std::invalid_argument);
}

TEST_CASE("mel-stats embeddings are per-band means and standard deviations") {
    audio::MelSpectrogram m;
    m.values = Tensor::from({2, 3}, {1.0, 2.0, 3.0, 4.0, 4.0, 4.0});

    Tensor e = eval::mel_stats_embedding(m);
    REQUIRE(e.numel() == 4);
    CHECK(e[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e[1] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(e[2] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(e[3] == 0.0);

    audio::MelSpectrogram single;
    single.values = Tensor::from({2, 1}, {5.0, 7.0});
    Tensor se = eval::mel_stats_embedding(single);
    CHECK(se[0] == 5.0);
    CHECK(se[2] == 0.0);  // population std of one frame

    std::vector<audio::MelSpectrogram> clips = {m, m, single};
    eval::EmbeddingSet set = eval::make_mel_stats_set(clips);
    CHECK(set.provenance == "mel-stats");
    CHECK(set.vectors.rows() == 3);
    CHECK(set.vectors.cols() == 4);
    CHECK(set.vectors.at(2, 0) == 5.0);

    audio::MelSpectrogram other_bands;
    other_bands.values = Tensor::zeros({3, 2});
    CHECK_THROWS_AS(eval::make_mel_stats_set({m, other_bands}),
                    std::invalid_argument);
    CHECK_THROWS_AS(eval::make_mel_stats_set({m}), std::invalid_argument);
}
