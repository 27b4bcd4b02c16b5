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

#include <random>

#include <gtest/gtest.h>

#include "cisp/errors.hpp"
#include "cisp/simplex_qp.hpp"
#include "test_oracles.hpp"

namespace cisp {
namespace {

using testing::grid_search_qp;
using testing::random_psd;

void expect_on_simplex(const Eigen::VectorXd& u) {
    EXPECT_GE(u.minCoeff(), 0.0);
    EXPECT_NEAR(u.sum(), 1.0, 1e-10);
}

TEST(ProjectToSimplex, KnownProjections) {
    Eigen::VectorXd v(3);
    v << 0.2, 0.3, 0.5;
    EXPECT_LT((project_to_simplex(v) - v).norm(), 1e-15);
    v << 2.0, 0.0, 0.0;
    Eigen::VectorXd e0 = Eigen::VectorXd::Unit(3, 0);
    EXPECT_LT((project_to_simplex(v) - e0).norm(), 1e-15);
    v << 1.0, 1.0, -5.0;
    Eigen::VectorXd half(3);
    half << 0.5, 0.5, 0.0;
    EXPECT_LT((project_to_simplex(v) - half).norm(), 1e-15);
}

TEST(ProjectToSimplex, IsNearestPointAgainstSamples) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    std::exponential_distribution<double> ex;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd v(5);
        for (auto& x : v) x = 2 * g(rng);
        const auto p = project_to_simplex(v);
        expect_on_simplex(p);
        for (int s = 0; s < 200; ++s) {
            Eigen::VectorXd q(5);
            for (auto& x : q) x = ex(rng);
            q /= q.sum();
            EXPECT_LE((p - v).norm(), (q - v).norm() + 1e-12);
        }
    }
}

TEST(SolveSimplexQp, Identity) {
    const auto sol = solve_simplex_qp(Eigen::MatrixXd::Identity(2, 2));
    EXPECT_NEAR(sol.u(0), 0.5, 1e-10);
    EXPECT_NEAR(sol.u(1), 0.5, 1e-10);
    EXPECT_NEAR(sol.objective, 0.5, 1e-10);
}

TEST(SolveSimplexQp, NullDirectionVertex) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
    M(1, 1) = 1.0;
    const auto sol = solve_simplex_qp(M);
    EXPECT_NEAR(sol.u(0), 1.0, 1e-10);
    EXPECT_NEAR(sol.u(1), 0.0, 1e-10);
    EXPECT_NEAR(sol.objective, 0.0, 1e-10);
}

TEST(SolveSimplexQp, Diag1And100) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
    M(0, 0) = 1.0;
    M(1, 1) = 100.0;
    const auto sol = solve_simplex_qp(M);
    EXPECT_NEAR(sol.u(0), 100.0 / 101.0, 1e-10);
    EXPECT_NEAR(sol.u(1), 1.0 / 101.0, 1e-10);
    EXPECT_NEAR(sol.objective, 100.0 / 101.0, 1e-10);
}

TEST(KktResidual, VertexOfIdentityIsSuboptimal) {
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(2, 2);
    EXPECT_GT(kkt_residual(M, Eigen::VectorXd::Unit(2, 0)), 0.1);
    Eigen::VectorXd half = Eigen::VectorXd::Constant(2, 0.5);
    EXPECT_NEAR(kkt_residual(M, half), 0.0, 1e-15);
}

TEST(KktResidual, PenalisesInfeasiblePoints) {
    const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd u(2);
    u << 0.6, 0.6;
    EXPECT_GE(kkt_residual(M, u), 0.2 - 1e-15);
    u << 1.2, -0.2;
    EXPECT_GE(kkt_residual(M, u), 0.2 - 1e-15);
}

TEST(KktResidual, GridOptimumIsNearlyStationary) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 5; ++trial) {
        const auto M = random_psd(3, 3, rng);
        Eigen::VectorXd u;
        grid_search_qp(M, 1e-3, &u);
        EXPECT_LE(kkt_residual(M, u), 1e-2);
    }
}

TEST(SolveSimplexQp, MatchesGridSearchSmallN) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + trial % 3;
        const int r = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
        const auto M = random_psd(n, r, rng);
        const auto sol = solve_simplex_qp(M);
        const double grid = grid_search_qp(M, 1e-3);
        EXPECT_LE(std::abs(sol.objective - grid), 1e-3 * (1.0 + sol.objective)) << "n=" << n;
        EXPECT_LE(sol.objective, grid + 1e-12);
    }
}

TEST(SolveSimplexQp, RandomPsdCertificates) {
    std::mt19937_64 rng(34);
    std::exponential_distribution<double> ex;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 23);
        const int r = 1 + static_cast<int>(rng() % static_cast<unsigned>(n));
        const auto M = random_psd(n, r, rng);
        const auto sol = solve_simplex_qp(M);
        expect_on_simplex(sol.u);
        EXPECT_LE(sol.kkt_residual, 1e-10);
        EXPECT_NEAR(sol.objective, sol.u.dot(M * sol.u), 1e-12 * (1.0 + M.norm()));
        const double tol = 1e-9 * (1.0 + M.cwiseAbs().maxCoeff());
        for (int k = 0; k < n; ++k) {
            EXPECT_LE(sol.objective, M(k, k) + tol);
        }
        for (int s = 0; s < 250; ++s) {
            Eigen::VectorXd v(n);
            for (auto& x : v) x = ex(rng);
            v /= v.sum();
            EXPECT_LE(sol.objective, v.dot(M * v) + tol);
        }
    }
}

TEST(SolveSimplexQp, ScaleEquivariance) {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 10; ++trial) {
        const auto M = random_psd(8, 8, rng);
        const auto a = solve_simplex_qp(M);
        const auto b = solve_simplex_qp(250.0 * M);
        EXPECT_LT((a.u - b.u).norm(), 1e-6);
        EXPECT_NEAR(b.objective, 250.0 * a.objective, 1e-8 * b.objective);
    }
}

TEST(SolveSimplexQp, ObjectiveNeverIncreases) {
    std::mt19937_64 rng(36);
    QpOptions opt;
    opt.record_history = true;
    for (int trial = 0; trial < 10; ++trial) {
        const auto M = random_psd(16, 5, rng);
        const auto sol = solve_simplex_qp(M, opt);
        ASSERT_FALSE(sol.history.empty());
        for (std::size_t i = 1; i < sol.history.size(); ++i) {
            EXPECT_LE(sol.history[i], sol.history[i - 1] + 1e-14 * (1.0 + sol.history[i - 1]));
        }
    }
}

TEST(SolveSimplexQp, WarmStartIsHonoured) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd start = Eigen::VectorXd::Unit(3, 2);
    const auto sol = solve_simplex_qp(M, {}, start);
    EXPECT_LT((sol.u - Eigen::VectorXd::Constant(3, 1.0 / 3)).norm(), 1e-10);
}

TEST(SolveSimplexQp, RejectsBadInput) {
    EXPECT_THROW(solve_simplex_qp(Eigen::MatrixXd::Zero(2, 3)), InputError);
    Eigen::MatrixXd asym(2, 2);
    asym << 1, 0.5, 0, 1;
    EXPECT_THROW(solve_simplex_qp(asym), InputError);
    Eigen::MatrixXd nan = Eigen::MatrixXd::Identity(2, 2);
    nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(solve_simplex_qp(nan), InputError);
    EXPECT_THROW(solve_simplex_qp(Eigen::MatrixXd(0, 0)), InputError);
}

TEST(SolveSimplexQp, NonConvergenceCarriesBestIterate) {
    std::mt19937_64 rng(37);
    const auto M = random_psd(20, 20, rng);
    QpOptions opt;
    opt.max_iter = 1;
    opt.tol = 1e-300;
    try {
        solve_simplex_qp(M, opt);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        expect_on_simplex(e.best().u);
        EXPECT_GT(e.best().kkt_residual, 0.0);
    }
}

} // namespace
} // namespace cisp
