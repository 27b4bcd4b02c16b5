// Copyright 2026 The cisp Authors.
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

#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "cisp/channel.hpp"
#include "cisp/linalg.hpp"

namespace cisp {
namespace {

using cd = std::complex<double>;

TEST(Realify, ImaginaryUnit) {
    Eigen::MatrixXcd A(1, 1);
    A << cd(0, 1);
    Eigen::MatrixXd expected(2, 2);
    expected << 0, -1, 1, 0;
    EXPECT_EQ(realify_matrix(A), expected);
}

TEST(Realify, Identity) {
    EXPECT_EQ(realify_matrix(Eigen::MatrixXcd::Identity(3, 3)), Eigen::MatrixXd::Identity(6, 6));
}

TEST(Realify, Homomorphism) {
    Rng rng = trial_rng(21, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXcd A = sample_channel(4, 3, rng);
        const Eigen::VectorXcd b = sample_channel(3, 1, rng);
        EXPECT_LT((realify_vector(A * b) - realify_matrix(A) * realify_vector(b)).norm(), 1e-13);
        EXPECT_EQ(complexify_vector(realify_vector(b)), b);
    }
}

TEST(GramPseudoInverse, MatchesDirectInverseForTallRank) {
    Rng rng = trial_rng(22, 0);
    const auto H = sample_channel(3, 5, rng);
    const auto g = gram_pseudo_inverse(H);
    const Eigen::MatrixXcd direct = (H * H.adjoint()).inverse();
    EXPECT_LT((g.pinv - direct).norm(), 1e-10 * direct.norm());
    EXPECT_LT((g.projector - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-12);
    EXPECT_EQ(g.rank, 3);
}

TEST(GramPseudoInverse, PenroseConditionsForFatChannel) {
    Rng rng = trial_rng(23, 0);
    const auto H = sample_channel(6, 2, rng);
    const auto g = gram_pseudo_inverse(H);
    const Eigen::MatrixXcd A = H * H.adjoint();
    const Eigen::MatrixXcd& X = g.pinv;
    const double s = A.norm();
    EXPECT_LT((A * X * A - A).norm(), 1e-10 * s);
    EXPECT_LT((X * A * X - X).norm(), 1e-10 * X.norm());
    EXPECT_LT(((A * X).adjoint() - A * X).norm(), 1e-10);
    EXPECT_EQ(g.rank, 2);
    // Projector is idempotent and Hermitian with trace = rank.
    EXPECT_LT((g.projector * g.projector - g.projector).norm(), 1e-12);
    EXPECT_NEAR(g.projector.trace().real(), 2.0, 1e-12);
    EXPECT_LT((H * g.h_pinv * H - H).norm(), 1e-10 * H.norm());
}

TEST(SymmetricPseudoInverse, DropsNullDirections) {
    Eigen::MatrixXd A(3, 3);
    A << 2, 0, 0, 0, 0, 0, 0, 0, 4;
    Eigen::Index rank = 0;
    const auto X = symmetric_pseudo_inverse(A, 1e-12, &rank);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    expected(0, 0) = 0.5;
    expected(2, 2) = 0.25;
    EXPECT_LT((X - expected).norm(), 1e-15);
    EXPECT_EQ(rank, 2);
}

} // namespace
} // namespace cisp
