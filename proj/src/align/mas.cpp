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

#include "udit/align/mas.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "udit/core/check.hpp"

namespace udit::align {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_instance(const Tensor& log_lik) {
    check_arg(log_lik.ndim() == 2, "alignment: log_lik must be a matrix");
    check_arg(log_lik.all_finite(), "alignment: log_lik must be finite");
    check_arg(log_lik.rows() >= 1, "alignment: need at least one token");
    check_arg(log_lik.cols() >= log_lik.rows(),
              "alignment: no surjective path exists with " +
                  std::to_string(log_lik.rows()) + " tokens and only " +
                  std::to_string(log_lik.cols()) + " frames");
}

// Cell (i, j) lies on some surjective path iff tokens 0..i-1 fit before
// frame j and tokens i+1.. fit after it.
bool feasible(int i, int j, int n_tokens, int n_frames) {
    return j >= i && j <= n_frames - n_tokens + i;
}

// Equal-score preference of the dynamic program, expressed on whole paths:
// at the latest frame where two paths differ, the larger token wins
// (that is the path that "stayed" longer).
bool path_beats(const std::vector<int>& a, const std::vector<int>& b) {
    for (size_t j = a.size(); j-- > 0;)
        if (a[j] != b[j]) return a[j] > b[j];
    return false;
}

}  // namespace

AlignmentPath mas_align(const Tensor& log_lik) {
    check_instance(log_lik);
    const int nt = log_lik.rows(), nf = log_lik.cols();

    Tensor q = Tensor::full({nt, nf}, kNegInf);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nf; ++j) {
            if (!feasible(i, j, nt, nf)) continue;
            double best;
            if (j == 0) {
                best = 0.0;  // only (0, 0) is feasible at frame 0
            } else {
                const double stay = q.at(i, j - 1);
                const double move = i > 0 ? q.at(i - 1, j - 1) : kNegInf;
                best = std::max(stay, move);
            }
            q.at(i, j) = log_lik.at(i, j) + best;
        }

    AlignmentPath path;
    path.frame_to_token.resize(static_cast<size_t>(nf));
    int i = nt - 1;
    for (int j = nf - 1; j >= 0; --j) {
        path.frame_to_token[static_cast<size_t>(j)] = i;
        if (j == 0) break;
        const double stay =
            feasible(i, j - 1, nt, nf) ? q.at(i, j - 1) : kNegInf;
        const double move =
            (i > 0 && feasible(i - 1, j - 1, nt, nf)) ? q.at(i - 1, j - 1) : kNegInf;
        if (move > stay) --i;  // ties keep the current token
    }
    return path;
}

AlignmentPath brute_force_align(const Tensor& log_lik) {
    check_instance(log_lik);
    const int nt = log_lik.rows(), nf = log_lik.cols();
    check_arg(nt <= 6 && nf <= 8,
              "brute_force_align: instance exceeds the enumeration budget");

    std::vector<int> counts(static_cast<size_t>(nt), 0);
    std::vector<int> best_path;
    double best_score = kNegInf;

    // Enumerate all compositions of nf into nt positive parts.
    auto recurse = [&](auto&& self, int token, int remaining) -> void {
        if (token == nt - 1) {
            counts[static_cast<size_t>(token)] = remaining;
            std::vector<int> path;
            path.reserve(static_cast<size_t>(nf));
            double score = 0.0;
            for (int i = 0; i < nt; ++i)
                for (int c = 0; c < counts[static_cast<size_t>(i)]; ++c) {
                    score += log_lik.at(i, static_cast<int>(path.size()));
                    path.push_back(i);
                }
            if (score > best_score ||
                (score == best_score && path_beats(path, best_path))) {
                best_score = score;
                best_path = std::move(path);
            }
            return;
        }
        const int later_tokens = nt - 1 - token;
        for (int c = 1; c <= remaining - later_tokens; ++c) {
            counts[static_cast<size_t>(token)] = c;
            self(self, token + 1, remaining - c);
        }
    };
    recurse(recurse, 0, nf);
    return AlignmentPath{std::move(best_path)};
}

int64_t brute_force_path_count(int n_tokens, int n_frames) {
    check_arg(1 <= n_tokens && n_tokens <= n_frames, "path count: bad instance");
    // C(n_frames - 1, n_tokens - 1)
    int64_t c = 1;
    for (int k = 1; k <= n_tokens - 1; ++k)
        c = c * (n_frames - n_tokens + k) / k;
    return c;
}

double path_score(const Tensor& log_lik, const AlignmentPath& path) {
    check_arg(path.n_frames() == log_lik.cols(), "path_score: length mismatch");
    double s = 0.0;
    for (int j = 0; j < path.n_frames(); ++j)
        s += log_lik.at(path.frame_to_token[static_cast<size_t>(j)], j);
    return s;
}

std::string path_to_string(const AlignmentPath& path) {
    std::ostringstream ss;
    for (size_t j = 0; j < path.frame_to_token.size(); ++j) {
        if (j) ss << ' ';
        ss << path.frame_to_token[j];
    }
    return ss.str();
}

int DurationVector::total_frames() const {
    return std::accumulate(counts.begin(), counts.end(), 0);
}

DurationVector durations_from_path(const AlignmentPath& path, int n_tokens) {
    check_arg(n_tokens >= 1, "durations: need at least one token");
    check_arg(!path.frame_to_token.empty(), "durations: empty path");
    DurationVector d;
    d.counts.assign(static_cast<size_t>(n_tokens), 0);
    int prev = 0;
    for (size_t j = 0; j < path.frame_to_token.size(); ++j) {
        const int tok = path.frame_to_token[j];
        check_arg(tok >= 0 && tok < n_tokens, "durations: token out of range");
        check_arg(tok == prev || tok == prev + 1 || j == 0,
                  "durations: path is not monotone with unit steps");
        prev = tok;
        ++d.counts[static_cast<size_t>(tok)];
    }
    check_arg(path.frame_to_token.front() == 0 &&
                  path.frame_to_token.back() == n_tokens - 1,
              "durations: path does not cover all tokens");
    d.log_counts.resize(d.counts.size());
    for (size_t i = 0; i < d.counts.size(); ++i) {
        check_arg(d.counts[i] >= 1, "durations: token " + std::to_string(i) +
                                        " receives no frames");
        d.log_counts[i] = std::log(static_cast<double>(d.counts[i]));
    }
    return d;
}

Tensor expand_by_durations(const Tensor& mu_tokens, const DurationVector& durations) {
    check_arg(mu_tokens.ndim() == 2, "expand: mu_tokens must be a matrix");
    check_arg(mu_tokens.rows() == durations.n_tokens(),
              "expand: row count != duration count");
    for (int c : durations.counts)
        check_arg(c >= 1, "expand: every duration must be >= 1");
    const int d = mu_tokens.cols();
    Tensor out(Shape{durations.total_frames(), d});
    int r = 0;
    for (int i = 0; i < mu_tokens.rows(); ++i)
        for (int c = 0; c < durations.counts[static_cast<size_t>(i)]; ++c, ++r)
            for (int k = 0; k < d; ++k) out.at(r, k) = mu_tokens.at(i, k);
    return out;
}

Tensor gaussian_log_lik(const Tensor& mu_tokens, const Tensor& mel) {
    check_arg(mu_tokens.ndim() == 2 && mel.ndim() == 2 &&
                  mu_tokens.cols() == mel.rows(),
              "gaussian_log_lik: mu_tokens [n_tokens x D] vs mel [D x n_frames]");
    const int nt = mu_tokens.rows(), d = mu_tokens.cols(), nf = mel.cols();
    Tensor ll(Shape{nt, nf});
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nf; ++j) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = mel.at(k, j) - mu_tokens.at(i, k);
                acc += diff * diff;
            }
            ll.at(i, j) = -0.5 * acc;
        }
    return ll;
}

}  // namespace udit::align
