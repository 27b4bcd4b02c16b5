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

namespace cisp {

/// Reference solution of the constructive-interference problem posed directly over the composite
/// transmit vector x = W s, independent of the null-space/QP pipeline.
struct OracleResult {
    double t_star = 0.0;
    Eigen::VectorXcd x;       ///< W s
    Eigen::MatrixXcd W;       ///< x s^H / K
    Eigen::VectorXcd Lambda;  ///< lambda_k = h_k^T x conj(s_k)
    int bisection_iters = 0;
};

struct MinNormOptions {
    double gap_tol = 1e-9;        ///< stop once the barrier duality gap is below this
    double barrier_factor = 10.0;
    /// Dual objective above this value certifies (for practical purposes) an empty constraint set.
    double infeasible_bound = 1e12;
    int max_newton = 500;
};

/// Minimum-norm x in C^Nt satisfying, for every user k,
///   Re(lambda_k) tan(theta) - |Im(lambda_k)| >= t tan(theta),   lambda_k = h_k^T x conj(s_k),
/// i.e. 2K half-planes in the 2Nt real coordinates of x. Solved by a log-barrier method on the
/// dual  max_{z >= 0} t 1'z - 1/2 ||G' z||^2  (x = G' z), whose iterates are always strictly
/// feasible. Returns std::nullopt when the dual is unbounded (empty constraint set).
std::optional<Eigen::VectorXcd> min_norm_ci(const ChannelMatrix& H, const Eigen::VectorXcd& s, double t,
                                            double theta_t, const MinNormOptions& options = {});

/// Maximises t subject to the CI constraints and ||x||^2 <= p0 by bisection on t, using
/// min_norm_ci as the feasibility test. When the optimum is positive x is rescaled to full power.
OracleResult solve_p1_oracle(const ChannelMatrix& H, const Eigen::VectorXcd& s, double p0, double theta_t,
                             double tol_bisect = 1e-6);

} // namespace cisp
