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

#include <string>
#include <vector>

#include "udit/core/tensor.hpp"

namespace udit::align {

// Frame-to-token map of a monotonic surjective alignment: non-decreasing,
// steps of 0 or 1, starts at token 0, ends at the last token.
struct AlignmentPath {
    std::vector<int> frame_to_token;

    int n_frames() const { return static_cast<int>(frame_to_token.size()); }
};

// Dynamic-program search for the path maximizing the summed log-likelihood
// log_lik[token][frame]. Ties prefer staying on the current token.
AlignmentPath mas_align(const Tensor& log_lik);

// Exhaustive oracle with the same tie-break; refuses instances larger than
// 6 tokens x 8 frames.
AlignmentPath brute_force_align(const Tensor& log_lik);

// Number of monotonic surjective paths = C(n_frames-1, n_tokens-1).
int64_t brute_force_path_count(int n_tokens, int n_frames);

double path_score(const Tensor& log_lik, const AlignmentPath& path);

std::string path_to_string(const AlignmentPath& path);

// Per-token frame counts with their natural logs (the duration targets).
struct DurationVector {
    std::vector<int> counts;
    std::vector<double> log_counts;

    int n_tokens() const { return static_cast<int>(counts.size()); }
    int total_frames() const;
};

DurationVector durations_from_path(const AlignmentPath& path, int n_tokens);

// Repeats row i of mu_tokens counts[i] times: [n_tokens x D] -> [sum x D].
Tensor expand_by_durations(const Tensor& mu_tokens, const DurationVector& durations);

// Unit-variance Gaussian log-density of every frame under every token's
// projected mean, constant terms dropped (alignment is shift-invariant):
// out[i][j] = -0.5 * || mel[:, j] - mu_tokens[i, :] ||^2.
Tensor gaussian_log_lik(const Tensor& mu_tokens, const Tensor& mel);

}  // namespace udit::align
