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

#include "cisp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cisp {

Eigen::MatrixXd realify_matrix(const Eigen::MatrixXcd& A) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = A.cols();
    Eigen::MatrixXd R(2 * n, 2 * m);
    R.topLeftCorner(n, m) = A.real();
    R.topRightCorner(n, m) = -A.imag();
    R.bottomLeftCorner(n, m) = A.imag();
    R.bottomRightCorner(n, m) = A.real();
    return R;
}

Eigen::VectorXd realify_vector(const Eigen::VectorXcd& a) {
    const Eigen::Index n = a.size();
    Eigen::VectorXd r(2 * n);
    r.head(n) = a.real();
    r.tail(n) = a.imag();
    return r;
}

Eigen::VectorXcd complexify_vector(const Eigen::VectorXd& a) {
    const Eigen::Index n = a.size() / 2;
    Eigen::VectorXcd c(n);
    c.real() = a.head(n);
    c.imag() = a.segment(n, n);
    return c;
}

GramPseudoInverse gram_pseudo_inverse(const Eigen::MatrixXcd& H) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = static_cast<double>(std::max(H.rows(), H.cols())) *
                          std::numeric_limits<double>::epsilon() * (sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) {
        ++rank;
    }

    const auto Ur = svd.matrixU().leftCols(rank);
    const auto Vr = svd.matrixV().leftCols(rank);
    const Eigen::VectorXd inv_sv = sv.head(rank).cwiseInverse();

    GramPseudoInverse out;
    out.rank = rank;
    out.projector = Ur * Ur.adjoint();
    out.pinv = Ur * inv_sv.cwiseAbs2().asDiagonal() * Ur.adjoint();
    out.h_pinv = Vr * inv_sv.asDiagonal() * Ur.adjoint();
    return out;
}

Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& A, double rel_tol, Eigen::Index* rank) {
    const Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double scale = ev.size() > 0 ? ev.cwiseAbs().maxCoeff() : 0.0;
    const double cutoff = rel_tol * scale;

    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) > cutoff && scale > 0.0) {
            inv(i) = 1.0 / ev(i);
            ++kept;
        }
    }
    if (rank != nullptr) {
        *rank = kept;
    }
    const Eigen::MatrixXd& V = eig.eigenvectors();
    return V * inv.asDiagonal() * V.transpose();
}

} // namespace cisp
