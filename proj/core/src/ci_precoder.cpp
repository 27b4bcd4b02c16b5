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

#include "cisp/ci_precoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <spdlog/spdlog.h>

#include "cisp/errors.hpp"
#include "cisp/linalg.hpp"

namespace cisp {

namespace {

void check_instance(const ChannelMatrix& H, const Eigen::VectorXcd& s) {
    if (H.rows() < 1 || H.cols() < 1) {
        throw InputError("channel matrix must be non-empty");
    }
    if (s.size() != H.rows()) {
        throw InputError("symbol vector length " + std::to_string(s.size()) + " does not match K=" +
                         std::to_string(H.rows()));
    }
}

// The non-zero singular values of T are exactly 1 (a projector times a unitary diagonal) while
// rounding leaves the zero ones at a few Nt * eps, so any cutoff well inside (1e-13, 1e-2) separates
// the two groups.
constexpr double kDefaultRankTol = 1e-8;

double default_pinv_tol(Eigen::Index n) {
    return 2.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
}

Eigen::MatrixXcd consistency_operator(const GramPseudoInverse& gram, const Eigen::VectorXcd& s) {
    const Eigen::Index K = s.size();
    return (gram.projector - Eigen::MatrixXcd::Identity(K, K)) * s.asDiagonal();
}

Eigen::MatrixXcd power_form(const GramPseudoInverse& gram, const Eigen::VectorXcd& s) {
    return s.conjugate().asDiagonal() * gram.pinv * s.asDiagonal();
}

// Fills Lambda, W and the CI margin for a given beta.
void assemble_from_beta(PrecodeSolution& sol, const NullSpaceBundle& bundle, double theta_t,
                        const Eigen::VectorXcd& s) {
    const auto K = static_cast<double>(s.size());
    sol.Lambda_E = bundle.D * sol.beta;
    sol.Lambda = complexify_vector(sol.Lambda_E);
    const Eigen::VectorXcd x = bundle.H_pinv * sol.Lambda.cwiseProduct(s);
    sol.W = (x * s.adjoint()) / K;
    sol.t_star = compute_tstar(sol.Lambda_E, theta_t);
}

} // namespace

Eigen::MatrixXcd build_T(const ChannelMatrix& H, const Eigen::VectorXcd& s) {
    check_instance(H, s);
    return consistency_operator(gram_pseudo_inverse(H), s);
}

Eigen::MatrixXcd build_P(const ChannelMatrix& H, const Eigen::VectorXcd& s) {
    check_instance(H, s);
    return power_form(gram_pseudo_inverse(H), s);
}

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& T_E, double rank_tol) {
    const Eigen::Index n = T_E.cols();
    if (n == 0) {
        throw NoNullSpace("operator has no columns");
    }
    if (!(rank_tol >= 0.0)) {
        throw ConfigError("rank tolerance must be non-negative");
    }
    // Pad to at least n rows so the SVD reports all n singular values.
    Eigen::MatrixXd A = T_E;
    if (A.rows() < n) {
        A.conservativeResize(n, Eigen::NoChange);
        A.bottomRows(n - T_E.rows()).setZero();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    // T has unit-norm structure (a projector times a unitary diagonal), so the cutoff never drops
    // below rank_tol itself; a numerically zero operator then yields the full space.
    const double cutoff = rank_tol * std::max(sv(0), 1.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) {
        ++rank;
    }
    if (rank == n) {
        throw NoNullSpace("consistency operator has full column rank " + std::to_string(n) +
                          "; no non-zero pre-scaling vector exists");
    }
    return svd.matrixV().rightCols(n - rank);
}

Eigen::MatrixXd selection_matrix(Eigen::Index K, double theta_t) {
    const double cot = 1.0 / std::tan(theta_t);
    Eigen::MatrixXd S(2 * K, 2 * K);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(K, K);
    S.topLeftCorner(K, K) = I;
    S.topRightCorner(K, K) = -cot * I;
    S.bottomLeftCorner(K, K) = I;
    S.bottomRightCorner(K, K) = cot * I;
    return S;
}

void build_qp_matrix(NullSpaceBundle& bundle) {
    const Eigen::MatrixXd& D = bundle.D;
    if (D.cols() == 0) {
        throw NoNullSpace("empty null-space basis");
    }
    Eigen::MatrixXd Q = D.transpose() * bundle.P_E * D;
    Q = 0.5 * (Q + Q.transpose());
    bundle.Q_E = Q;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    if (!(top > std::numeric_limits<double>::min())) {
        throw DegeneratePowerForm("reduced power form Q_E is numerically zero");
    }
    const double tol = bundle.pinv_tol > 0.0 ? bundle.pinv_tol : default_pinv_tol(bundle.P_E.rows());
    const double cutoff = tol * top;

    const Eigen::MatrixXd L = bundle.S_sel * D;
    Eigen::MatrixXd factor(L.rows(), D.cols());
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) > cutoff) {
            inv(i) = 1.0 / ev(i);
            factor.col(kept++) = (L * eig.eigenvectors().col(i)) / std::sqrt(ev(i));
        }
    }
    bundle.rank_Q = kept;
    if (kept == 0) {
        throw DegeneratePowerForm("reduced power form Q_E has no positive eigenvalues");
    }
    if (kept < ev.size()) {
        spdlog::warn("reduced power form Q_E is rank deficient ({} of {}); using its pseudo-inverse", kept,
                     ev.size());
    }
    bundle.Q_E_pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    const auto F = factor.leftCols(kept);
    bundle.M_qp = F * F.transpose();
}

NullSpaceBundle build_bundle(const ChannelMatrix& H, const Eigen::VectorXcd& s, double theta_t,
                             const PrecoderOptions& options) {
    check_instance(H, s);
    const Eigen::Index K = H.rows();
    const GramPseudoInverse gram = gram_pseudo_inverse(H);

    NullSpaceBundle b;
    b.rank_tol = options.rank_tol.value_or(kDefaultRankTol);
    b.pinv_tol = options.pinv_tol.value_or(default_pinv_tol(2 * K));
    b.H_pinv = gram.h_pinv;

    Eigen::MatrixXd T_E = realify_matrix(consistency_operator(gram, s));
    if (options.strict_ci) {
        T_E.conservativeResize(3 * K, Eigen::NoChange);
        T_E.bottomRows(K).setZero();
        T_E.bottomRightCorner(K, K).setIdentity();
    }
    b.T_E = std::move(T_E);
    b.D = null_space_basis(b.T_E, b.rank_tol);
    b.rank_T = 2 * K - b.D.cols();
    b.expected_rank_T = 2 * (K - gram.rank);
    if (!options.strict_ci && b.rank_T != b.expected_rank_T) {
        spdlog::warn("consistency operator rank {} differs from 2(K - rank H) = {}", b.rank_T, b.expected_rank_T);
    }

    b.P_E = realify_matrix(power_form(gram, s));
    b.P_E = 0.5 * (b.P_E + b.P_E.transpose());
    b.S_sel = selection_matrix(K, theta_t);
    build_qp_matrix(b);
    return b;
}

PrecodeSolution recover_solution(const Eigen::VectorXd& u, const NullSpaceBundle& bundle, double p0,
                                 double theta_t, const ChannelMatrix& H, const Eigen::VectorXcd& s,
                                 double degenerate_tol) {
    check_instance(H, s);
    if (!(p0 > 0.0)) {
        throw ConfigError("total power p0 must be positive");
    }
    if (u.size() != bundle.M_qp.rows()) {
        throw InputError("dual vector has length " + std::to_string(u.size()) + ", expected " +
                         std::to_string(bundle.M_qp.rows()));
    }
    if (u.minCoeff() < -1e-12 || std::abs(u.sum() - 1.0) > 1e-8) {
        throw InputError("dual vector must lie on the probability simplex");
    }

    const double objective = u.dot(bundle.M_qp * u);
    const double scale = bundle.M_qp.cwiseAbs().maxCoeff();
    if (!(objective > degenerate_tol * scale)) {
        throw DegenerateDual("dual objective u'Mu = " + std::to_string(objective) +
                             " is numerically zero; power multiplier undefined");
    }

    PrecodeSolution sol;
    sol.u = u;
    sol.dual_objective = objective;
    sol.alpha0 = std::sqrt(objective / (4.0 * p0));
    const Eigen::VectorXd g = bundle.D.transpose() * (bundle.S_sel.transpose() * u);
    sol.beta = bundle.Q_E_pinv * g / (2.0 * sol.alpha0);
    assemble_from_beta(sol, bundle, theta_t, s);
    sol.feasible = is_feasible(sol.t_star);
    return sol;
}

double compute_tstar(const Eigen::VectorXd& Lambda_E, double theta_t) {
    const Eigen::Index K = Lambda_E.size() / 2;
    const double tan_t = std::tan(theta_t);
    double t = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < K; ++k) {
        t = std::min(t, Lambda_E(k) - std::abs(Lambda_E(k + K)) / tan_t);
    }
    return t;
}

double compute_tstar(const Eigen::MatrixXd& D, const Eigen::VectorXd& beta, double theta_t) {
    const Eigen::Index K = D.rows() / 2;
    const double tan_t = std::tan(theta_t);
    double t = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < K; ++k) {
        const double re = D.row(k).dot(beta);
        const double im = D.row(k + K).dot(beta);
        t = std::min({t, re - im / tan_t, re + im / tan_t});
    }
    return t;
}

PrecodeSolution precode(const ChannelMatrix& H, const Eigen::VectorXcd& s, PskOrder order,
                        const PrecoderOptions& options) {
    check_instance(H, s);
    if (!(options.p0 > 0.0) || !std::isfinite(options.p0)) {
        throw ConfigError("total power p0 must be positive");
    }
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (std::abs(std::abs(s(k)) - 1.0) > 1e-9) {
            throw InputError("symbol " + std::to_string(k) + " is not unit modulus");
        }
    }
    const double theta_t = threshold_angle(order);
    const NullSpaceBundle bundle = build_bundle(H, s, theta_t, options);
    const QpSolution qp = solve_simplex_qp(bundle.M_qp, options.qp);

    const double scale = bundle.M_qp.cwiseAbs().maxCoeff();
    PrecodeSolution sol;
    if (qp.objective > options.degenerate_tol * scale) {
        sol = recover_solution(qp.u, bundle, options.p0, theta_t, H, s, options.degenerate_tol);
        const double dual_t = std::sqrt(options.p0 * qp.objective);
        if (sol.feasible) {
            sol.duality_residual = std::abs(sol.t_star - dual_t) / sol.t_star;
            if (sol.duality_residual > 1e-5) {
                spdlog::warn("dual value sqrt(p0 u'Mu) = {:.10g} differs from t* = {:.10g} (relative {:.3g})", dual_t,
                             sol.t_star, sol.duality_residual);
            }
        }
    } else {
        // Optimal margin is zero: report it as such and keep a full-power precoder along the
        // uniform dual direction so downstream consumers still get a well-formed W.
        sol.u = qp.u;
        sol.dual_objective = qp.objective;
        sol.degenerate_dual = true;
        const Eigen::Index r = bundle.D.cols();
        const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(bundle.M_qp.rows(), 1.0 / bundle.M_qp.rows());
        Eigen::VectorXd direction = bundle.Q_E_pinv * (bundle.D.transpose() * (bundle.S_sel.transpose() * uniform));
        double power = direction.dot(bundle.Q_E * direction);
        if (!(power > std::numeric_limits<double>::min())) {
            direction = Eigen::VectorXd::Unit(r, 0);
            power = direction.dot(bundle.Q_E * direction);
            if (!(power > std::numeric_limits<double>::min())) {
                throw DegeneratePowerForm("cannot build a full-power pre-scaling vector");
            }
        }
        sol.beta = direction * std::sqrt(options.p0 / power);
        assemble_from_beta(sol, bundle, theta_t, s);
        sol.t_star = 0.0;
        sol.feasible = false;
    }
    sol.qp_kkt_residual = qp.kkt_residual;
    sol.qp_iterations = qp.iterations;
    return sol;
}

} // namespace cisp
