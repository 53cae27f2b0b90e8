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

#include "udit/eval/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "udit/core/check.hpp"

namespace udit::eval {
namespace {

constexpr int kLsdSampleRate = 16000;
constexpr int kLsdWin = 1024;
constexpr int kLsdHop = 256;
constexpr double kLsdMagFloor = 1e-8;
constexpr double kCovRidge = 1e-6;
constexpr double kKlSmoothing = 1e-10;
constexpr double kKlNormTolerance = 1e-6;

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Symmetric PSD square root with eigenvalues floored at zero.
Mat sqrtm_psd(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    check_state(es.info() == Eigen::Success,
                "frechet_distance: eigendecomposition failed");
    Vec d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// tr((c_right^{1/2} c_left c_right^{1/2})^{1/2}), the trace of the product
// square root written in a symmetric form.
double trace_product_sqrt(const Mat& c_left, const Mat& c_right) {
    const Mat r = sqrtm_psd(c_right);
    Mat inner = r * c_left * r;
    inner = 0.5 * (inner + inner.transpose());  // scrub rounding asymmetry
    Eigen::SelfAdjointEigenSolver<Mat> es(inner);
    check_state(es.info() == Eigen::Success,
                "frechet_distance: eigendecomposition failed");
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

void fit_gaussian(const EmbeddingSet& set, Vec& mean, Mat& cov) {
    const int n = set.vectors.rows();
    const int d = set.vectors.cols();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        x(set.vectors.data(), n, d);
    mean = x.colwise().mean();
    const Mat centered = x.rowwise() - mean.transpose();
    cov = centered.transpose() * centered / static_cast<double>(n - 1);
    cov.diagonal().array() += kCovRidge;
}

}  // namespace

double lsd(const audio::Waveform& ref, const audio::Waveform& gen) {
    const std::vector<double> r =
        audio::resample(ref.samples, ref.sample_rate, kLsdSampleRate);
    const std::vector<double> g =
        audio::resample(gen.samples, gen.sample_rate, kLsdSampleRate);
    check_arg(static_cast<int>(r.size()) >= kLsdWin &&
                  static_cast<int>(g.size()) >= kLsdWin,
              "lsd: input shorter than one analysis window at 16 kHz");

    const Tensor a = audio::magnitude_stft(r, kLsdWin, kLsdHop, kLsdWin);
    const Tensor b = audio::magnitude_stft(g, kLsdWin, kLsdHop, kLsdWin);
    const int n_bins = a.rows();
    const int n_frames = std::min(a.cols(), b.cols());

    double acc = 0.0;
    for (int t = 0; t < n_frames; ++t) {
        double frame = 0.0;
        for (int k = 0; k < n_bins; ++k) {
            const double num = std::max(a.at(k, t), kLsdMagFloor);
            const double den = std::max(b.at(k, t), kLsdMagFloor);
            const double db = 20.0 * std::log10(num / den);
            frame += db * db;
        }
        acc += std::sqrt(frame / n_bins);
    }
    return acc / n_frames;
}

void validate(const EmbeddingSet& set) {
    check_arg(set.vectors.ndim() == 2, "embedding set: vectors must be 2-D");
    check_arg(set.vectors.rows() >= 2,
              "embedding set: need at least 2 samples for a covariance");
    check_arg(set.vectors.cols() >= 1, "embedding set: empty dimension");
    check_arg(set.vectors.all_finite(), "embedding set: non-finite entries");
}

double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b) {
    validate(a);
    validate(b);
    check_arg(a.vectors.cols() == b.vectors.cols(),
              "frechet_distance: dimension mismatch " +
                  std::to_string(a.vectors.cols()) + " vs " +
                  std::to_string(b.vectors.cols()));

    Vec ma, mb;
    Mat ca, cb;
    fit_gaussian(a, ma, ca);
    fit_gaussian(b, mb, cb);

    const double mean_term = (ma - mb).squaredNorm();
    const double tr_sqrt =
        0.5 * (trace_product_sqrt(ca, cb) + trace_product_sqrt(cb, ca));
    const double fd = mean_term + ca.trace() + cb.trace() - 2.0 * tr_sqrt;
    check_state(std::isfinite(fd), "frechet_distance: non-finite result");
    return std::max(0.0, fd);
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q) {
    check_arg(!p.empty() && p.size() == q.size(),
              "kl_divergence: distributions must share a non-empty support");
    double sp = 0.0, sq = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        check_arg(std::isfinite(p[i]) && p[i] >= 0.0 && std::isfinite(q[i]) &&
                      q[i] >= 0.0,
                  "kl_divergence: probabilities must be finite and >= 0");
        sp += p[i];
        sq += q[i];
    }
    check_arg(std::abs(sp - 1.0) < kKlNormTolerance,
              "kl_divergence: first distribution sums to " + std::to_string(sp));
    check_arg(std::abs(sq - 1.0) < kKlNormTolerance,
              "kl_divergence: second distribution sums to " + std::to_string(sq));

    // Smooth, then renormalize both (this also absorbs sub-tolerance
    // normalization error in the inputs).
    const double n = static_cast<double>(p.size());
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double pi = (p[i] + kKlSmoothing) / (sp + n * kKlSmoothing);
        const double qi = (q[i] + kKlSmoothing) / (sq + n * kKlSmoothing);
        acc += pi * std::log(pi / qi);
    }
    return acc;
}

Tensor mel_stats_embedding(const audio::MelSpectrogram& m) {
    check_arg(m.values.ndim() == 2 && m.values.rows() >= 1 && m.values.cols() >= 1,
              "mel_stats_embedding: values must be [n_mels x n_frames]");
    const int n_mels = m.values.rows();
    const int n_frames = m.values.cols();
    Tensor out(Shape{2 * n_mels});
    for (int i = 0; i < n_mels; ++i) {
        double mean = 0.0;
        for (int t = 0; t < n_frames; ++t) mean += m.values.at(i, t);
        mean /= n_frames;
        double var = 0.0;
        for (int t = 0; t < n_frames; ++t) {
            const double d = m.values.at(i, t) - mean;
            var += d * d;
        }
        out[i] = mean;
        out[n_mels + i] = std::sqrt(var / n_frames);
    }
    return out;
}

EmbeddingSet make_mel_stats_set(const std::vector<audio::MelSpectrogram>& clips) {
    check_arg(clips.size() >= 2, "mel-stats set: need at least 2 clips");
    const int d = 2 * clips.front().values.rows();
    EmbeddingSet set;
    set.provenance = "mel-stats";
    set.vectors = Tensor(Shape{static_cast<int>(clips.size()), d});
    for (size_t i = 0; i < clips.size(); ++i) {
        const Tensor e = mel_stats_embedding(clips[i]);
        check_arg(e.numel() == d,
                  "mel-stats set: clip " + std::to_string(i) +
                      " has a different band count");
        for (int j = 0; j < d; ++j)
            set.vectors.at(static_cast<int>(i), j) = e[j];
    }
    validate(set);
    return set;
}

}  // namespace udit::eval
