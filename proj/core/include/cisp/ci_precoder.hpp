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

#pragma once

#include <optional>

#include <Eigen/Dense>

#include "cisp/channel.hpp"
#include "cisp/constellation.hpp"
#include "cisp/simplex_qp.hpp"

namespace cisp {

struct PrecoderOptions {
    double p0 = 1.0;
    /// Relative cutoff for zero singular values of the consistency operator. Defaults to 1e-8;
    /// the operator's non-zero singular values are all 1.
    std::optional<double> rank_tol;
    /// Relative cutoff for zero eigenvalues of the reduced power form Q_E when forming its
    /// pseudo-inverse. Defaults to 4K * machine epsilon.
    std::optional<double> pinv_tol;
    /// Force Im(lambda_k) = 0 for every user (strict phase rotation).
    bool strict_ci = false;
    QpOptions qp;
    /// The dual is treated as degenerate (no strictly constructive solution exists) when
    /// u'Mu <= degenerate_tol * max|M_ij|.
    double degenerate_tol = 1e-12;
};

/// Everything derived from (H, s) that the dual QP and the recovery step need. Immutable once
/// built; safe to share between threads.
struct NullSpaceBundle {
    Eigen::MatrixXd T_E;    ///< realified consistency operator (plus Im selector rows when strict)
    Eigen::MatrixXd D;      ///< orthonormal null-space basis of T_E, 2K x r
    Eigen::MatrixXd P_E;    ///< realified power form, 2K x 2K
    Eigen::MatrixXd Q_E;    ///< D' P_E D, r x r
    Eigen::MatrixXd Q_E_pinv;
    Eigen::MatrixXd S_sel;  ///< [[I, -I/tan], [I, I/tan]]
    Eigen::MatrixXd M_qp;   ///< S D Q_E^+ D' S', 2K x 2K symmetric PSD
    Eigen::MatrixXcd H_pinv;  ///< H^H (H H^H)^+, used to map Lambda back to W
    Eigen::Index rank_T = 0;
    Eigen::Index rank_Q = 0;
    Eigen::Index expected_rank_T = 0;  ///< 2 (K - rank H) for the non-strict operator
    double rank_tol = 0.0;
    double pinv_tol = 0.0;
};

struct PrecodeSolution {
    Eigen::MatrixXcd W;          ///< Nt x K
    Eigen::VectorXcd Lambda;     ///< pre-scaling vector, H W s = diag(Lambda) s
    Eigen::VectorXd Lambda_E;    ///< [Re Lambda; Im Lambda]
    Eigen::VectorXd beta;        ///< null-space weights, Lambda_E = D beta
    double alpha0 = 0.0;         ///< power multiplier
    Eigen::VectorXd u;           ///< dual vector on the 2K simplex
    double t_star = 0.0;         ///< achieved constructive-interference margin
    bool feasible = false;       ///< t_star > 0
    /// The QP optimum vanished: no pre-scaling vector in the consistent subspace lies strictly
    /// inside every detection sector. t_star is then the optimal value 0 and W, Lambda are the
    /// full-power precoder along the uniform dual direction (diagnostic only).
    bool degenerate_dual = false;
    double dual_objective = 0.0;  ///< u' M_qp u
    /// |t_star - sqrt(p0 u'Mu)| / t_star when feasible, else 0.
    double duality_residual = 0.0;
    double qp_kkt_residual = 0.0;
    int qp_iterations = 0;
};

/// T = [H H^H (H H^H)^+ - I] diag(s).
Eigen::MatrixXcd build_T(const ChannelMatrix& H, const Eigen::VectorXcd& s);

/// P = diag(s^H) (H H^H)^+ diag(s).
Eigen::MatrixXcd build_P(const ChannelMatrix& H, const Eigen::VectorXcd& s);

/// Right singular vectors of `T_E` whose singular values are <= rank_tol * max(sigma_max, 1).
/// Throws NoNullSpace when none qualify.
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& T_E, double rank_tol);

/// S of the dual Lagrangian: [[I, -cot(theta) I], [I, cot(theta) I]].
Eigen::MatrixXd selection_matrix(Eigen::Index K, double theta_t);

/// Q_E = D' P_E D and M_qp = S D Q_E^+ D' S'. Fills the Q/M fields of `bundle`; D, P_E and S_sel
/// must be set. Throws DegeneratePowerForm when Q_E vanishes numerically.
void build_qp_matrix(NullSpaceBundle& bundle);

/// Builds the full bundle for one (H, s, theta) instance.
NullSpaceBundle build_bundle(const ChannelMatrix& H, const Eigen::VectorXcd& s, double theta_t,
                             const PrecoderOptions& options = {});

/// Recovers beta, alpha0, Lambda and W from a dual vector. Throws DegenerateDual when
/// u'Mu <= degenerate_tol * max|M_ij|.
PrecodeSolution recover_solution(const Eigen::VectorXd& u, const NullSpaceBundle& bundle, double p0,
                                 double theta_t, const ChannelMatrix& H, const Eigen::VectorXcd& s,
                                 double degenerate_tol = PrecoderOptions{}.degenerate_tol);

/// min_k (Re lambda_k - |Im lambda_k| / tan theta) from the expanded pre-scaling vector.
double compute_tstar(const Eigen::VectorXd& Lambda_E, double theta_t);

/// Same quantity expressed through the rows d_k of the null-space basis:
/// min_k { d_k'beta - d_{k+K}'beta / tan theta, d_k'beta + d_{k+K}'beta / tan theta }.
double compute_tstar(const Eigen::MatrixXd& D, const Eigen::VectorXd& beta, double theta_t);

inline bool is_feasible(double t_star) noexcept { return t_star > 0.0; }
inline bool is_feasible(const PrecodeSolution& sol) noexcept { return is_feasible(sol.t_star); }

/// Full pipeline: bundle -> simplex QP -> recovery -> t*. Infeasible instances still return a
/// complete solution with feasible == false.
PrecodeSolution precode(const ChannelMatrix& H, const Eigen::VectorXcd& s, PskOrder order,
                        const PrecoderOptions& options = {});

} // namespace cisp
