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

#include <Eigen/Dense>

namespace cisp {

/// Real equivalent [[Re A, -Im A], [Im A, Re A]] of a complex n x m matrix.
Eigen::MatrixXd realify_matrix(const Eigen::MatrixXcd& A);

/// Stacked real equivalent [Re a; Im a].
Eigen::VectorXd realify_vector(const Eigen::VectorXcd& a);

/// Inverse of realify_vector: [I, jI] applied to a length-2n real vector.
Eigen::VectorXcd complexify_vector(const Eigen::VectorXd& a);

/// Pseudo-inverse of the Gram matrix H H^H and the orthogonal projector onto the column space of
/// H H^H, both assembled from the economy SVD of H (the Gram matrix is never formed or inverted).
struct GramPseudoInverse {
    Eigen::MatrixXcd pinv;       ///< (H H^H)^+, K x K
    Eigen::MatrixXcd projector;  ///< H H^H (H H^H)^+, K x K
    Eigen::MatrixXcd h_pinv;     ///< H^+ = H^H (H H^H)^+, Nt x K
    Eigen::Index rank = 0;
};

/// Singular values of H at or below max(K, Nt) * eps * sigma_max are treated as zero.
GramPseudoInverse gram_pseudo_inverse(const Eigen::MatrixXcd& H);

/// Pseudo-inverse of a real symmetric matrix through its eigendecomposition. Eigenvalues with
/// |lambda| <= rel_tol * max|lambda| are dropped; `rank` receives the number kept.
Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& A, double rel_tol, Eigen::Index* rank = nullptr);

} // namespace cisp
