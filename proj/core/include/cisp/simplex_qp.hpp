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
#include <vector>

#include <Eigen/Dense>

#include "cisp/errors.hpp"

namespace cisp {

struct QpOptions {
    double tol = 1e-10;     ///< bound on kkt_residual at return
    int max_iter = 100000;  ///< projected-gradient plus active-set iterations
    bool record_history = false;
};

struct QpSolution {
    Eigen::VectorXd u;
    double objective = 0.0;     ///< u' M u
    double kkt_residual = 0.0;
    int iterations = 0;
    std::vector<double> history;  ///< objective after every gradient step and polish, if requested
};

/// Thrown when max_iter is exhausted; carries the best iterate seen.
class NonConvergence : public NumericalError {
public:
    NonConvergence(const std::string& what, QpSolution best)
        : NumericalError(what), best_(std::move(best)) {}

    const QpSolution& best() const noexcept { return best_; }

private:
    QpSolution best_;
};

/// Euclidean projection onto {u : u >= 0, 1'u = 1} (sort-based, exact).
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// Optimality certificate for min u'Mu over the simplex.
///
/// With g = M u / max|M_ij| and g_min = min_k g_k, the residual is
///   max_k min(u_k, g_k - g_min) + |1'u - 1| + max(0, -min_k u_k),
/// which vanishes exactly when u is feasible and every coordinate in the support attains the
/// minimal gradient entry (the simplex KKT conditions for PSD M). Normalising by the largest
/// entry of M makes the value invariant under positive scaling of M.
double kkt_residual(const Eigen::MatrixXd& M, const Eigen::VectorXd& u);

/// Minimises u'Mu subject to 1'u = 1, u >= 0 for symmetric PSD M.
///
/// Projected gradient with Barzilai-Borwein step lengths and an exact line search along the
/// projected direction (so the objective never increases), interleaved with a primal active-set
/// pass that solves the equality-constrained problem on the current support exactly. Starts
/// from the uniform vector unless `start` is given. Throws InputError for non-square or
/// non-symmetric M, NonConvergence when max_iter is exhausted.
QpSolution solve_simplex_qp(const Eigen::MatrixXd& M, const QpOptions& options = {},
                            const std::optional<Eigen::VectorXd>& start = std::nullopt);

} // namespace cisp
