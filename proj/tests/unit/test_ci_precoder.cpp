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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cisp/ci_precoder.hpp"
#include "cisp/errors.hpp"
#include "cisp/linalg.hpp"
#include "cisp/oracle.hpp"
#include "test_oracles.hpp"

namespace cisp {
namespace {

using testing::draw_instance;

// Oracle optima frozen from solve_p1_oracle (bisection tolerance 1e-6) for seed 2026.
constexpr double kTstarK3Nt2Qpsk = 0.1933102729;   // trial 0
constexpr double kTstarK4Nt2Psk8 = 0.0856035721;   // trial 8

Eigen::MatrixXcd ones(int n) {
    return Eigen::MatrixXcd::Ones(n, n);
}

void expect_solution_invariants(const PrecodeSolution& sol, const ChannelMatrix& H, const Eigen::VectorXcd& s,
                                double p0, double theta_t) {
    const Eigen::Index K = H.rows();
    const Eigen::VectorXcd x = sol.W * s;
    EXPECT_NEAR(x.squaredNorm(), p0, 1e-8 * p0);
    EXPECT_LE((H * x - sol.Lambda.cwiseProduct(s)).norm(), 1e-8 * std::max(sol.Lambda.norm(), 1.0));
    for (Eigen::Index i = 0; i < K; ++i) {
        for (Eigen::Index j = i + 1; j < K; ++j) {
            EXPECT_LE((sol.W.col(i) * s(i) - sol.W.col(j) * s(j)).norm(), 1e-8);
        }
    }
    EXPECT_GE(sol.u.minCoeff(), 0.0);
    EXPECT_NEAR(sol.u.sum(), 1.0, 1e-10);
    const Eigen::MatrixXcd T = build_T(H, s);
    EXPECT_LE((T * sol.Lambda).cwiseAbs().maxCoeff(), 1e-6 * sol.Lambda.cwiseAbs().maxCoeff());
    if (sol.feasible) {
        double margin = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < K; ++k) {
            const double m = (sol.Lambda(k).real() - sol.t_star) * std::tan(theta_t) - std::abs(sol.Lambda(k).imag());
            EXPECT_GE(m, -1e-8);
            margin = std::min(margin, m);
        }
        EXPECT_LE(margin, 1e-6);
    }
}

TEST(BuildT, ZeroWhenChannelHasFullRowRank) {
    Rng rng = trial_rng(41, 0);
    for (int K = 1; K <= 4; ++K) {
        const auto H = sample_channel(K, 4, rng);
        const auto inst = draw_instance(41, static_cast<std::uint64_t>(K), K, 4, 4);
        EXPECT_LT(build_T(H, inst.sym.s).norm(), 1e-12);
    }
}

TEST(BuildT, RankOneProjector) {
    const ChannelMatrix H = Eigen::MatrixXcd::Ones(3, 1);
    const Eigen::VectorXcd s = Eigen::VectorXcd::Ones(3);
    const Eigen::MatrixXcd expected = ones(3) / 3.0 - Eigen::MatrixXcd::Identity(3, 3);
    EXPECT_LT((build_T(H, s) - expected).norm(), 1e-14);
}

TEST(BuildP, IdentityChannel) {
    const ChannelMatrix H = Eigen::MatrixXcd::Identity(3, 3);
    const Eigen::VectorXcd s = Eigen::VectorXcd::Ones(3);
    EXPECT_LT((build_P(H, s) - Eigen::MatrixXcd::Identity(3, 3)).norm(), 1e-14);
}

TEST(BuildP, RankOneGram) {
    const ChannelMatrix H = Eigen::MatrixXcd::Ones(2, 1);
    const Eigen::VectorXcd s = Eigen::VectorXcd::Ones(2);
    EXPECT_LT((build_P(H, s) - ones(2) / 4.0).norm(), 1e-14);
}

TEST(BuildP, Hermitian) {
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto inst = draw_instance(42, i, 6, 4, 8);
        const auto P = build_P(inst.H, inst.sym.s);
        EXPECT_LT((P - P.adjoint()).norm(), 1e-12 * P.norm());
    }
}

TEST(BuildT, RejectsMismatchedSymbols) {
    const ChannelMatrix H = Eigen::MatrixXcd::Ones(3, 2);
    EXPECT_THROW(build_T(H, Eigen::VectorXcd::Ones(2)), InputError);
}

TEST(NullSpaceBasis, ZeroOperatorGivesWholeSpace) {
    const auto D = null_space_basis(Eigen::MatrixXd::Zero(2, 2), 1e-8);
    ASSERT_EQ(D.cols(), 2);
    EXPECT_LT((D.transpose() * D - Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-15);
}

TEST(NullSpaceBasis, IdentityHasNoNullSpace) {
    EXPECT_THROW(null_space_basis(Eigen::MatrixXd::Identity(2, 2), 1e-8), NoNullSpace);
}

TEST(NullSpaceBasis, AllOnes) {
    Eigen::MatrixXd T(2, 2);
    T << 1, 1, 1, 1;
    const auto D = null_space_basis(T, 1e-8);
    ASSERT_EQ(D.cols(), 1);
    Eigen::Vector2d expected(1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0));
    EXPECT_NEAR(std::abs(D.col(0).dot(expected)), 1.0, 1e-14);
}

TEST(NullSpaceBasis, GenericFatChannelRank) {
    // rank(T_E) = 2(K - Nt): D keeps 2 Nt columns.
    for (int Nt : {2, 4, 8}) {
        for (int extra : {1, 2, 3}) {
            const int K = Nt + extra;
            const auto inst = draw_instance(43, static_cast<std::uint64_t>(Nt * 10 + extra), K, Nt, 4);
            const auto b = build_bundle(inst.H, inst.sym.s, threshold_angle(inst.order));
            EXPECT_EQ(b.D.cols(), 2 * Nt);
            EXPECT_EQ(b.rank_T, 2 * extra);
            EXPECT_EQ(b.rank_T, b.expected_rank_T);
            EXPECT_LT((b.D.transpose() * b.D - Eigen::MatrixXd::Identity(b.D.cols(), b.D.cols())).norm(), 1e-12);
            EXPECT_LT((b.T_E * b.D).norm(), 1e-12);
        }
    }
}

TEST(SelectionMatrix, Structure) {
    const double theta = std::numbers::pi / 8;
    const auto S = selection_matrix(2, theta);
    const double c = 1.0 / std::tan(theta);
    Eigen::MatrixXd expected(4, 4);
    expected << 1, 0, -c, 0,
                0, 1, 0, -c,
                1, 0, c, 0,
                0, 1, 0, c;
    EXPECT_LT((S - expected).norm(), 1e-14);
}

TEST(BuildQpMatrix, SymmetricPsd) {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const int Nt = 2 + static_cast<int>(i % 3);
        const auto inst = draw_instance(44, i, Nt + 2, Nt, 8);
        const auto b = build_bundle(inst.H, inst.sym.s, threshold_angle(inst.order));
        const double scale = b.M_qp.cwiseAbs().maxCoeff();
        EXPECT_LE((b.M_qp - b.M_qp.transpose()).cwiseAbs().maxCoeff(), 1e-12 * scale);
        EXPECT_LE((b.Q_E - b.Q_E.transpose()).cwiseAbs().maxCoeff(), 1e-12 * b.Q_E.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.M_qp);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12 * scale);
    }
}

TEST(BuildQpMatrix, PseudoInverseMatchesExactInverseWhenNonsingular) {
    const ChannelMatrix H = Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::VectorXcd s = Eigen::VectorXcd::Ones(2);
    const double theta = threshold_angle(PskOrder(4));
    const auto b = build_bundle(H, s, theta);
    ASSERT_EQ(b.rank_Q, b.Q_E.rows());
    const Eigen::MatrixXd exact = b.S_sel * b.D * b.Q_E.inverse() * b.D.transpose() * b.S_sel.transpose();
    EXPECT_LT((b.M_qp - exact).norm(), 1e-12 * exact.norm());
}

TEST(BuildQpMatrix, ZeroPowerFormIsDegenerate) {
    NullSpaceBundle b;
    b.D = Eigen::MatrixXd::Identity(2, 2);
    b.P_E = Eigen::MatrixXd::Zero(2, 2);
    b.S_sel = selection_matrix(1, threshold_angle(PskOrder(4)));
    EXPECT_THROW(build_qp_matrix(b), DegeneratePowerForm);
}

TEST(RecoverSolution, RandomValidDualVectors) {
    std::mt19937_64 rng(45);
    std::exponential_distribution<double> ex;
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto inst = draw_instance(45, i, 5, 3, 4);
        const double theta = threshold_angle(inst.order);
        const auto b = build_bundle(inst.H, inst.sym.s, theta);
        Eigen::VectorXd u(10);
        for (auto& x : u) x = ex(rng);
        u /= u.sum();
        const auto sol = recover_solution(u, b, 2.0, theta, inst.H, inst.sym.s);
        const Eigen::VectorXcd x = sol.W * inst.sym.s;
        EXPECT_NEAR(x.squaredNorm(), 2.0, 1e-8 * 2.0);
        EXPECT_LE((inst.H * x - sol.Lambda.cwiseProduct(inst.sym.s)).norm(), 1e-8 * sol.Lambda.norm());
        EXPECT_NEAR(sol.beta.dot(b.Q_E * sol.beta), 2.0, 1e-8 * 2.0);
        EXPECT_NEAR(sol.alpha0, std::sqrt(u.dot(b.M_qp * u) / 8.0), 1e-12);
    }
}

TEST(RecoverSolution, RejectsPointsOffTheSimplex) {
    const auto inst = draw_instance(46, 0, 3, 2, 4);
    const double theta = threshold_angle(inst.order);
    const auto b = build_bundle(inst.H, inst.sym.s, theta);
    Eigen::VectorXd u = Eigen::VectorXd::Constant(6, 0.5);
    EXPECT_THROW(recover_solution(u, b, 1.0, theta, inst.H, inst.sym.s), InputError);
    u = Eigen::VectorXd::Constant(6, 1.0 / 6);
    u(0) = -0.1;
    u(1) += 0.1;
    EXPECT_THROW(recover_solution(u, b, 1.0, theta, inst.H, inst.sym.s), InputError);
}

TEST(RecoverSolution, ZeroDualObjectiveIsDegenerate) {
    // Trial 1 of seed 2026 (K=4, Nt=2, 8PSK) has no strictly constructive solution, so the QP
    // optimum vanishes.
    const auto inst = draw_instance(2026, 1, 4, 2, 8);
    const double theta = threshold_angle(inst.order);
    const auto b = build_bundle(inst.H, inst.sym.s, theta);
    const auto qp = solve_simplex_qp(b.M_qp);
    EXPECT_LE(qp.objective, 1e-12 * b.M_qp.cwiseAbs().maxCoeff());
    EXPECT_THROW(recover_solution(qp.u, b, 1.0, theta, inst.H, inst.sym.s), DegenerateDual);
}

TEST(ComputeTstar, RealPositiveLambda) {
    const double theta = threshold_angle(PskOrder(4));
    Eigen::VectorXcd L = Eigen::VectorXcd::Constant(4, 0.7);
    EXPECT_NEAR(compute_tstar(realify_vector(L), theta), 0.7, 1e-15);
}

TEST(ComputeTstar, BoundaryOfCiRegion) {
    const double theta = threshold_angle(PskOrder(8));
    Eigen::VectorXcd L(3);
    L << std::complex<double>(1.0, std::tan(theta)), std::complex<double>(3.0, 0.1), std::complex<double>(2.0, -0.2);
    EXPECT_NEAR(compute_tstar(realify_vector(L), theta), 0.0, 1e-15);
}

TEST(ComputeTstar, MatchesBisectionAndBasisForm) {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const auto inst = draw_instance(47, i, 5, 3, i % 2 == 0 ? 4 : 8);
        const double theta = threshold_angle(inst.order);
        const auto sol = precode(inst.H, inst.sym.s, inst.order);
        const double ref = testing::tstar_by_bisection(sol.Lambda, theta);
        EXPECT_NEAR(compute_tstar(sol.Lambda_E, theta), ref, 1e-12);
        const auto b = build_bundle(inst.H, inst.sym.s, theta);
        EXPECT_NEAR(compute_tstar(b.D, sol.beta, theta), compute_tstar(sol.Lambda_E, theta), 1e-12);
    }
}

TEST(IsFeasible, SignOfTstar) {
    EXPECT_TRUE(is_feasible(0.3));
    EXPECT_FALSE(is_feasible(0.0));
    EXPECT_FALSE(is_feasible(-0.1));
}

TEST(Precode, FrozenOracleValues) {
    {
        const auto inst = draw_instance(2026, 0, 3, 2, 4);
        const auto sol = precode(inst.H, inst.sym.s, inst.order);
        EXPECT_TRUE(sol.feasible);
        EXPECT_NEAR(sol.t_star, kTstarK3Nt2Qpsk, 1e-4);
    }
    {
        const auto inst = draw_instance(2026, 8, 4, 2, 8);
        const auto sol = precode(inst.H, inst.sym.s, inst.order);
        EXPECT_TRUE(sol.feasible);
        EXPECT_NEAR(sol.t_star, kTstarK4Nt2Psk8, 1e-4);
    }
}

TEST(Precode, InfeasibleInstanceContract) {
    const auto inst = draw_instance(2026, 1, 4, 2, 8);
    const auto sol = precode(inst.H, inst.sym.s, inst.order);
    EXPECT_FALSE(sol.feasible);
    EXPECT_TRUE(sol.degenerate_dual);
    EXPECT_EQ(sol.t_star, 0.0);
    expect_solution_invariants(sol, inst.H, inst.sym.s, 1.0, threshold_angle(inst.order));
}

TEST(Precode, InvariantsOnRandomInstances) {
    for (std::uint64_t i = 0; i < 120; ++i) {
        const int Nt = 2 + 2 * static_cast<int>(i % 3);
        const int K = std::max(1, Nt - 1 + static_cast<int>((i / 3) % 5));
        const int M = (i / 15) % 2 == 0 ? 4 : 8;
        const double p0 = 0.5 + static_cast<double>(i % 4);
        const auto inst = draw_instance(48, i, K, Nt, M);
        PrecoderOptions opt;
        opt.p0 = p0;
        const auto sol = precode(inst.H, inst.sym.s, inst.order, opt);
        expect_solution_invariants(sol, inst.H, inst.sym.s, p0, threshold_angle(inst.order));
        if (sol.feasible) {
            const auto b = build_bundle(inst.H, inst.sym.s, threshold_angle(inst.order));
            EXPECT_NEAR(sol.beta.dot(b.Q_E * sol.beta), p0, 1e-8 * p0);
        }
    }
}

TEST(Precode, DegenerateWhenUsersDoNotExceedAntennas) {
    for (std::uint64_t i = 0; i < 20; ++i) {
        const int Nt = 4;
        const int K = 1 + static_cast<int>(i % 4);
        const auto inst = draw_instance(49, i, K, Nt, 8);
        const double theta = threshold_angle(inst.order);
        const auto b = build_bundle(inst.H, inst.sym.s, theta);
        EXPECT_LE(b.T_E.norm(), 1e-10 * inst.H.squaredNorm());
        ASSERT_EQ(b.D.cols(), 2 * K);
        EXPECT_LT((b.D.transpose() * b.D - Eigen::MatrixXd::Identity(2 * K, 2 * K)).norm(), 1e-12);
        const auto sol = precode(inst.H, inst.sym.s, inst.order);
        EXPECT_TRUE(sol.feasible);
        const auto ref = solve_p1_oracle(inst.H, inst.sym.s, 1.0, theta);
        EXPECT_NEAR(sol.t_star, ref.t_star, 1e-4 * std::max(1.0, ref.t_star));
    }
}

TEST(Precode, OneExtraUserIsUsuallyFeasible) {
    int feasible = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto inst = draw_instance(50, i, 9, 8, 4);
        feasible += precode(inst.H, inst.sym.s, inst.order).feasible ? 1 : 0;
    }
    EXPECT_GE(feasible, 45);
}

TEST(Precode, TstarScalesWithSqrtPower) {
    const auto inst = draw_instance(2026, 0, 3, 2, 4);
    PrecoderOptions opt;
    const double t1 = precode(inst.H, inst.sym.s, inst.order, opt).t_star;
    opt.p0 = 2.0;
    const double t2 = precode(inst.H, inst.sym.s, inst.order, opt).t_star;
    EXPECT_NEAR(t2, std::sqrt(2.0) * t1, 1e-10);
}

TEST(Precode, StrongDualityWhenFeasible) {
    for (std::uint64_t i = 0; i < 30; ++i) {
        const auto inst = draw_instance(51, i, 6, 4, 4);
        const auto sol = precode(inst.H, inst.sym.s, inst.order);
        if (sol.feasible) {
            EXPECT_NEAR(std::sqrt(sol.dual_objective), sol.t_star, 1e-5 * sol.t_star);
        }
    }
}

TEST(Precode, StrictModeZeroesImaginaryParts) {
    PrecoderOptions opt;
    opt.strict_ci = true;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto inst = draw_instance(52, i, 3, 4, 4);
        const auto sol = precode(inst.H, inst.sym.s, inst.order, opt);
        EXPECT_LT(sol.Lambda.imag().cwiseAbs().maxCoeff(), 1e-10);
        expect_solution_invariants(sol, inst.H, inst.sym.s, 1.0, threshold_angle(inst.order));
        // Restricting the feasible set cannot raise the optimum.
        EXPECT_LE(sol.t_star, precode(inst.H, inst.sym.s, inst.order).t_star + 1e-9);
    }
}

TEST(Precode, RejectsBadArguments) {
    const auto inst = draw_instance(53, 0, 3, 2, 4);
    PrecoderOptions opt;
    opt.p0 = 0.0;
    EXPECT_THROW(precode(inst.H, inst.sym.s, inst.order, opt), ConfigError);
    Eigen::VectorXcd s = inst.sym.s;
    s(0) *= 1.1;
    EXPECT_THROW(precode(inst.H, s, inst.order), InputError);
    EXPECT_THROW(precode(inst.H, inst.sym.s.head(2), inst.order), InputError);
}

} // namespace
} // namespace cisp
