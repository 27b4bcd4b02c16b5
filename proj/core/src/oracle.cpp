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

#include "cisp/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cisp/errors.hpp"
#include "cisp/linalg.hpp"

namespace cisp {

namespace {

// Rows of G act on [Re x; Im x]. For user k, with a = h_k conj(s_k):
//   Re(lambda_k) - Im(lambda_k) cot(theta) >= t   and   Re(lambda_k) + Im(lambda_k) cot(theta) >= t.
Eigen::MatrixXd constraint_matrix(const ChannelMatrix& H, const Eigen::VectorXcd& s, double theta_t) {
    const Eigen::Index K = H.rows();
    const Eigen::Index Nt = H.cols();
    const double cot = 1.0 / std::tan(theta_t);
    Eigen::MatrixXd G(2 * K, 2 * Nt);
    for (Eigen::Index k = 0; k < K; ++k) {
        const Eigen::RowVectorXcd a = H.row(k) * std::conj(s(k));
        Eigen::RowVectorXd re_row(2 * Nt);
        Eigen::RowVectorXd im_row(2 * Nt);
        re_row << a.real(), -a.imag();
        im_row << a.imag(), a.real();
        G.row(k) = re_row - cot * im_row;
        G.row(k + K) = re_row + cot * im_row;
    }
    return G;
}

enum class MinNormStatus { Solved, Infeasible, AbovePower, WithinPower };

struct MinNormOutcome {
    MinNormStatus status = MinNormStatus::Solved;
    Eigen::VectorXd x;
};

// Log-barrier method on the dual of  min 1/2 ||x||^2  s.t.  G x >= b:
//   minimise  phi(z) = 1/2 ||G' z||^2 - b'z - mu sum log z_i  over z > 0,  x = G' z.
// At an exact centre G x - b = mu / z > 0, so x is strictly feasible and the gap is m mu.
// With `power_cap`, returns early once ||x*||^2 <= cap or > cap is certified (primal feasible
// point inside the cap, or dual objective above cap / 2 by weak duality).
MinNormOutcome min_norm_barrier(const Eigen::MatrixXd& G, const Eigen::VectorXd& b, const MinNormOptions& opt,
                                std::optional<double> power_cap) {
    const Eigen::Index m = G.rows();
    const Eigen::MatrixXd GGt = G * G.transpose();
    Eigen::VectorXd z = Eigen::VectorXd::Ones(m);
    double mu = 1.0;

    auto phi = [&](const Eigen::VectorXd& v, double barrier) {
        return 0.5 * v.dot(GGt * v) - b.dot(v) - barrier * v.array().log().sum();
    };
    // Best dual value along the ray through v: max_c (c b'v - c^2/2 ||G'v||^2). When the dual is
    // unbounded, rounding stalls the iterates long before their own objective gets large.
    auto ray_value = [&](const Eigen::VectorXd& v) {
        const double r = b.dot(v);
        if (!(r > 0.0)) {
            return 0.0;
        }
        const double q = v.dot(GGt * v);
        return q > 0.0 ? 0.5 * r * r / q : std::numeric_limits<double>::infinity();
    };

    int newton = 0;
    while (true) {
        // Centering.
        for (int inner = 0; inner < 100; ++inner) {
            if (++newton > opt.max_newton) {
                throw NumericalError("min-norm barrier solver exceeded " + std::to_string(opt.max_newton) +
                                     " Newton steps (duality gap " + std::to_string(m * mu) + ")");
            }
            const Eigen::VectorXd grad = GGt * z - b - mu * z.cwiseInverse();
            Eigen::MatrixXd hess = GGt;
            hess.diagonal() += mu * z.cwiseInverse().cwiseAbs2();
            const Eigen::VectorXd dz = -hess.ldlt().solve(grad);
            const double decrement2 = -grad.dot(dz);
            if (!(decrement2 > 1e-14)) {
                break;
            }
            double step = 1.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (dz(i) < 0.0) {
                    step = std::min(step, -0.99 * z(i) / dz(i));
                }
            }
            const double f0 = phi(z, mu);
            while (step > 1e-16 && !(phi(z + step * dz, mu) <= f0 - 0.25 * step * decrement2)) {
                step *= 0.5;
            }
            if (step <= 1e-16) {
                break;
            }
            z += step * dz;
            const double lower = ray_value(z);
            if (lower > opt.infeasible_bound) {
                return {MinNormStatus::Infeasible, {}};
            }
            if (power_cap && lower > 0.5 * *power_cap) {
                return {MinNormStatus::AbovePower, {}};
            }
            if (decrement2 < 1e-10) {
                break;
            }
        }

        const Eigen::VectorXd x = G.transpose() * z;
        if (power_cap) {
            const bool primal_ok = ((G * x - b).array() >= 0.0).all();
            if (primal_ok && x.squaredNorm() <= *power_cap) {
                return {MinNormStatus::WithinPower, x};
            }
        }
        if (static_cast<double>(m) * mu <= opt.gap_tol) {
            if (power_cap) {
                return {x.squaredNorm() <= *power_cap ? MinNormStatus::WithinPower : MinNormStatus::AbovePower, x};
            }
            return {MinNormStatus::Solved, x};
        }
        mu /= opt.barrier_factor;
    }
}

Eigen::VectorXcd to_complex(const Eigen::VectorXd& x) {
    return complexify_vector(x);
}

void check_instance(const ChannelMatrix& H, const Eigen::VectorXcd& s) {
    if (H.rows() < 1 || H.cols() < 1) {
        throw InputError("channel matrix must be non-empty");
    }
    if (s.size() != H.rows()) {
        throw InputError("symbol vector length does not match K");
    }
}

} // namespace

std::optional<Eigen::VectorXcd> min_norm_ci(const ChannelMatrix& H, const Eigen::VectorXcd& s, double t,
                                            double theta_t, const MinNormOptions& options) {
    check_instance(H, s);
    const Eigen::MatrixXd G = constraint_matrix(H, s, theta_t);
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(G.rows(), t);
    const MinNormOutcome out = min_norm_barrier(G, b, options, std::nullopt);
    if (out.status == MinNormStatus::Infeasible) {
        return std::nullopt;
    }
    return to_complex(out.x);
}

OracleResult solve_p1_oracle(const ChannelMatrix& H, const Eigen::VectorXcd& s, double p0, double theta_t,
                             double tol_bisect) {
    check_instance(H, s);
    if (!(p0 > 0.0)) {
        throw ConfigError("total power p0 must be positive");
    }
    if (!(tol_bisect > 0.0)) {
        throw ConfigError("bisection tolerance must be positive");
    }
    const Eigen::Index K = H.rows();
    const Eigen::MatrixXd G = constraint_matrix(H, s, theta_t);
    const MinNormOptions opt;

    auto attempt = [&](double t) {
        const Eigen::VectorXd b = Eigen::VectorXd::Constant(G.rows(), t);
        return min_norm_barrier(G, b, opt, p0);
    };

    OracleResult result;
    double t_low = -1.0;
    MinNormOutcome low = attempt(t_low);
    if (low.status != MinNormStatus::WithinPower) {
        throw NumericalError("oracle bracket: t = -1 should be feasible");
    }

    double t_high = std::sqrt(p0) * H.rowwise().norm().maxCoeff();
    int expansions = 0;
    while (attempt(t_high).status == MinNormStatus::WithinPower) {
        t_low = t_high;
        t_high *= 2.0;
        if (++expansions > 60) {
            throw NumericalError("oracle bracket expansion failed");
        }
    }
    low = attempt(t_low);

    int iters = 0;
    while (t_high - t_low > tol_bisect) {
        const double mid = 0.5 * (t_low + t_high);
        MinNormOutcome trial = attempt(mid);
        if (trial.status == MinNormStatus::WithinPower) {
            t_low = mid;
            low = std::move(trial);
        } else {
            t_high = mid;
        }
        ++iters;
    }

    Eigen::VectorXd x = low.x;
    if (t_low > 0.0 && x.norm() > 0.0) {
        x *= std::sqrt(p0) / x.norm();
    }
    result.t_star = t_low;
    result.bisection_iters = iters;
    result.x = to_complex(x);
    result.W = result.x * s.adjoint() / static_cast<double>(K);
    result.Lambda = (H * result.x).cwiseProduct(s.conjugate());
    return result;
}

} // namespace cisp
