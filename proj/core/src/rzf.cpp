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

#include "cisp/rzf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cisp/errors.hpp"

namespace cisp {

Eigen::MatrixXcd rzf_precode(const ChannelMatrix& H, const Eigen::VectorXcd& s, double p0, double alpha) {
    const Eigen::Index K = H.rows();
    const Eigen::Index Nt = H.cols();
    if (K < 1 || Nt < 1) {
        throw InputError("channel matrix must be non-empty");
    }
    if (s.size() != K) {
        throw InputError("symbol vector length does not match K");
    }
    if (!(p0 > 0.0)) {
        throw ConfigError("total power p0 must be positive");
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ConfigError("RZF regularizer must be a finite non-negative number");
    }
    if (alpha == 0.0 && K > Nt) {
        throw InputError("RZF with alpha = 0 needs K <= Nt; H H^H is singular for K=" + std::to_string(K) +
                         " > Nt=" + std::to_string(Nt));
    }

    const Eigen::MatrixXcd gram = H * H.adjoint() + alpha * Eigen::MatrixXcd::Identity(K, K);
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw InputError("regularized Gram matrix H H^H + alpha I is singular");
    }
    // (H H^H + alpha I)^-1 H, then adjoint: H^H (H H^H + alpha I)^-1 since the Gram is Hermitian.
    const Eigen::MatrixXcd W_unit = llt.solve(H).adjoint();

    const double norm2 = (W_unit * s).squaredNorm();
    if (!(norm2 > std::numeric_limits<double>::min())) {
        throw InputError("RZF transmit vector vanishes; cannot normalize");
    }
    return W_unit * std::sqrt(p0 / norm2);
}

} // namespace cisp
