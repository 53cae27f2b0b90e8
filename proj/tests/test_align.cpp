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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "udit/align/mas.hpp"
#include "udit/core/rng.hpp"
#include "udit/core/tensor.hpp"

using namespace udit::align;
using udit::Rng;
using udit::Shape;
using udit::Tensor;

namespace {

void check_valid(const AlignmentPath& p, int n_tokens) {
    REQUIRE(!p.frame_to_token.empty());
    CHECK(p.frame_to_token.front() == 0);
    CHECK(p.frame_to_token.back() == n_tokens - 1);
    for (size_t j = 1; j < p.frame_to_token.size(); ++j) {
        const int step = p.frame_to_token[j] - p.frame_to_token[j - 1];
        CHECK(step >= 0);
        CHECK(step <= 1);
    }
}

}  // namespace

TEST_CASE("mas: trivial and error instances") {
    Tensor one_token = Tensor::zeros({1, 5});
    AlignmentPath p = mas_align(one_token);
    CHECK(p.frame_to_token == std::vector<int>{0, 0, 0, 0, 0});

    CHECK_THROWS_AS(mas_align(Tensor::zeros({3, 2})), std::invalid_argument);
    CHECK_THROWS_AS(mas_align(Tensor::full({2, 3}, std::nan(""))),
                    std::invalid_argument);
}

TEST_CASE("mas: two-token example with a far-apart mean") {
    // mu = [0, 10] in one mel dimension; frames [0.1, -0.2, 9.9].
    Tensor mu = Tensor::from({2, 1}, {0.0, 10.0});
    Tensor mel = Tensor::from({1, 3}, {0.1, -0.2, 9.9});
    Tensor ll = gaussian_log_lik(mu, mel);
    CHECK(ll.at(0, 0) == doctest::Approx(-0.005));
    CHECK(ll.at(1, 2) == doctest::Approx(-0.005));

    AlignmentPath best = mas_align(ll);
    CHECK(best.frame_to_token == std::vector<int>{0, 0, 1});

    AlignmentPath alt{{0, 1, 1}};
    CHECK(path_score(ll, best) - path_score(ll, alt) == doctest::Approx(52.0));
    CHECK(path_to_string(best) == "0 0 1");
}

TEST_CASE("mas: tie-break stays on the current token") {
    // All-equal likelihoods: the stay-preferring backtrack keeps the final
    // token as long as possible, so the switch lands at the earliest frame.
    AlignmentPath p = mas_align(Tensor::zeros({2, 3}));
    CHECK(p.frame_to_token == std::vector<int>{0, 1, 1});
    AlignmentPath b = brute_force_align(Tensor::zeros({2, 3}));
    CHECK(b.frame_to_token == p.frame_to_token);
}

TEST_CASE("brute force: path counts match the closed form") {
    CHECK(brute_force_path_count(1, 1) == 1);
    CHECK(brute_force_path_count(2, 3) == 2);
    CHECK(brute_force_path_count(3, 5) == 6);
    CHECK(brute_force_path_count(4, 6) == 10);
    CHECK(brute_force_path_count(6, 8) == 21);

    CHECK(brute_force_align(Tensor::zeros({1, 1})).frame_to_token ==
          std::vector<int>{0});
    CHECK_THROWS_AS(brute_force_align(Tensor::zeros({7, 8})), std::invalid_argument);
    CHECK_THROWS_AS(brute_force_align(Tensor::zeros({4, 9})), std::invalid_argument);
}

TEST_CASE("mas equals brute force exhaustively within budget") {
    Rng rng(77);
    for (int nt = 1; nt <= 4; ++nt)
        for (int nf = nt; nf <= 6; ++nf) {
            for (int trial = 0; trial < 100; ++trial) {
                Tensor ll = Tensor::randn({nt, nf}, rng);
                AlignmentPath a = mas_align(ll);
                AlignmentPath b = brute_force_align(ll);
                check_valid(a, nt);
                CHECK(a.frame_to_token == b.frame_to_token);
            }
            // Small-integer likelihoods force score ties and so exercise the
            // shared tie-break rule.
            for (int trial = 0; trial < 100; ++trial) {
                Tensor ll(Shape{nt, nf});
                for (int64_t i = 0; i < ll.numel(); ++i)
                    ll[i] = static_cast<double>(rng.integer(2));
                AlignmentPath a = mas_align(ll);
                AlignmentPath b = brute_force_align(ll);
                CHECK(a.frame_to_token == b.frame_to_token);
            }
        }
}

TEST_CASE("mas: score shifts by a constant, path does not") {
    Rng rng(78);
    Tensor ll = Tensor::randn({3, 5}, rng);
    AlignmentPath p1 = mas_align(ll);
    Tensor shifted = ll + 3.7;
    AlignmentPath p2 = mas_align(shifted);
    CHECK(p1.frame_to_token == p2.frame_to_token);
    CHECK(path_score(shifted, p2) ==
          doctest::Approx(path_score(ll, p1) + 3.7 * 5).epsilon(1e-12));
}

TEST_CASE("durations: counting and logs") {
    DurationVector d = durations_from_path(AlignmentPath{{0, 0, 1}}, 2);
    CHECK(d.counts == std::vector<int>{2, 1});
    CHECK(d.log_counts[0] == doctest::Approx(std::log(2.0)));
    CHECK(d.log_counts[1] == 0.0);
    CHECK(d.total_frames() == 3);

    CHECK(durations_from_path(AlignmentPath{{0}}, 1).counts == std::vector<int>{1});
    CHECK(durations_from_path(AlignmentPath{{0, 1, 2}}, 3).counts ==
          std::vector<int>{1, 1, 1});

    // A path that skips a token is rejected.
    CHECK_THROWS_AS(durations_from_path(AlignmentPath{{0, 2, 2}}, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(durations_from_path(AlignmentPath{{0, 0}}, 2),
                    std::invalid_argument);
}

TEST_CASE("durations: sums match frames for random valid paths") {
    Rng rng(79);
    for (int trial = 0; trial < 40; ++trial) {
        const int nt = 1 + static_cast<int>(rng.integer(5));
        const int nf = nt + static_cast<int>(rng.integer(6));
        Tensor ll = Tensor::randn({nt, nf}, rng);
        AlignmentPath p = mas_align(ll);
        DurationVector d = durations_from_path(p, nt);
        CHECK(d.total_frames() == nf);
        for (size_t i = 0; i < d.counts.size(); ++i) {
            CHECK(d.counts[i] >= 1);
            CHECK(d.log_counts[i] >= 0.0);
        }
    }
}

TEST_CASE("expand_by_durations: repetition semantics") {
    Tensor mu = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    DurationVector d;
    d.counts = {2, 1};
    d.log_counts = {std::log(2.0), 0.0};
    Tensor out = expand_by_durations(mu, d);
    CHECK(out.shape() == Shape{3, 3});
    CHECK(out.at(0, 0) == 1.0);
    CHECK(out.at(1, 0) == 1.0);
    CHECK(out.at(2, 0) == 4.0);
    CHECK(out.at(2, 2) == 6.0);

    DurationVector ones;
    ones.counts = {1, 1};
    ones.log_counts = {0.0, 0.0};
    Tensor id = expand_by_durations(mu, ones);
    for (int64_t i = 0; i < mu.numel(); ++i) CHECK(id[i] == mu[i]);

    Tensor single = Tensor::from({1, 2}, {7, 8});
    DurationVector three;
    three.counts = {3};
    three.log_counts = {std::log(3.0)};
    Tensor rep = expand_by_durations(single, three);
    CHECK(rep.shape() == Shape{3, 2});
    for (int r = 0; r < 3; ++r) CHECK(rep.at(r, 1) == 8.0);

    DurationVector bad;
    bad.counts = {0, 3};
    bad.log_counts = {0.0, 0.0};
    CHECK_THROWS_AS(expand_by_durations(mu, bad), std::invalid_argument);
}

TEST_CASE("expand then recount round-trips the durations") {
    Rng rng(80);
    for (int trial = 0; trial < 20; ++trial) {
        const int nt = 1 + static_cast<int>(rng.integer(5));
        DurationVector d;
        for (int i = 0; i < nt; ++i)
            d.counts.push_back(1 + static_cast<int>(rng.integer(4)));
        for (int c : d.counts) d.log_counts.push_back(std::log(static_cast<double>(c)));

        AlignmentPath p;
        for (int i = 0; i < nt; ++i)
            for (int c = 0; c < d.counts[static_cast<size_t>(i)]; ++c)
                p.frame_to_token.push_back(i);

        Tensor mu = Tensor::randn({nt, 4}, rng);
        Tensor expanded = expand_by_durations(mu, d);
        CHECK(expanded.rows() == d.total_frames());
        DurationVector back = durations_from_path(p, nt);
        CHECK(back.counts == d.counts);
    }
}
