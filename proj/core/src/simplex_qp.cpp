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

#include "cisp/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace cisp {

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    if (n == 0) {
        throw InputError("cannot project an empty vector onto the simplex");
    }
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    double cumsum = 0.0;
    double theta = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        cumsum += sorted[static_cast<std::size_t>(j)];
        const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) {
            theta = candidate;
        }
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

namespace {

double max_abs(const Eigen::MatrixXd& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

double residual_normalized(const Eigen::MatrixXd& Mn, const Eigen::VectorXd& u) {
    const Eigen::VectorXd g = Mn * u;
    const double gmin = g.minCoeff();
    double stationarity = 0.0;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        stationarity = std::max(stationarity, std::min(u(k), g(k) - gmin));
    }
    const double sum_defect = std::abs(u.sum() - 1.0);
    const double sign_defect = std::max(0.0, -u.minCoeff());
    return stationarity + sum_defect + sign_defect;
}

// Primal active-set method on the support of `u`. Each pass minimises u'Mu on the affine hull
// of the working set exactly, steps back to the boundary if that minimiser leaves the simplex,
// and otherwise adds the coordinate with the most negative reduced gradient. Returns the number
// of passes taken; `u` is only replaced when the objective does not increase.
int active_set_polish(const Eigen::MatrixXd& Mn, Eigen::VectorXd& u) {
    const Eigen::Index n = Mn.rows();
    const int max_passes = static_cast<int>(4 * n + 20);
    constexpr double add_tol = 1e-15;

    Eigen::VectorXd x = u;
    std::vector<Eigen::Index> working;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (x(k) > 0.0) {
            working.push_back(k);
        }
    }

    int pass = 0;
    for (; pass < max_passes && !working.empty(); ++pass) {
        const auto w = static_cast<Eigen::Index>(working.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(w + 1, w + 1);
        for (Eigen::Index i = 0; i < w; ++i) {
            for (Eigen::Index j = 0; j < w; ++j) {
                kkt(i, j) = 2.0 * Mn(working[i], working[j]);
            }
            kkt(i, w) = 1.0;
            kkt(w, i) = 1.0;
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(w + 1);
        rhs(w) = 1.0;
        const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
        const Eigen::VectorXd v = sol.head(w);

        if (v.minCoeff() >= 0.0) {
            x.setZero();
            for (Eigen::Index i = 0; i < w; ++i) {
                x(working[i]) = v(i);
            }
            x /= x.sum();
            const Eigen::VectorXd g = Mn * x;
            const double level = x.dot(g);
            Eigen::Index enter = -1;
            double most_negative = -add_tol;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (std::find(working.begin(), working.end(), k) != working.end()) {
                    continue;
                }
                const double reduced = g(k) - level;
                if (reduced < most_negative) {
                    most_negative = reduced;
                    enter = k;
                }
            }
            if (enter < 0) {
                ++pass;
                break;
            }
            working.push_back(enter);
            continue;
        }

        // Step from the current (strictly positive) working coordinates toward v until the first
        // coordinate reaches zero, then drop it.
        double tau = 1.0;
        Eigen::Index leaving = -1;
        for (Eigen::Index i = 0; i < w; ++i) {
            const double xi = x(working[i]);
            if (v(i) < 0.0) {
                const double ratio = xi / (xi - v(i));
                if (ratio < tau) {
                    tau = ratio;
                    leaving = i;
                }
            }
        }
        for (Eigen::Index i = 0; i < w; ++i) {
            x(working[i]) += tau * (v(i) - x(working[i]));
        }
        if (leaving >= 0) {
            x(working[leaving]) = 0.0;
        }
        x = x.cwiseMax(0.0);
        x /= x.sum();
        std::erase_if(working, [&](Eigen::Index k) { return x(k) <= 0.0; });
    }

    if (x.allFinite() && x.dot(Mn * x) <= u.dot(Mn * u) * (1.0 + 1e-12) + 1e-300) {
        u = x;
    }
    return pass;
}

} // namespace

double kkt_residual(const Eigen::MatrixXd& M, const Eigen::VectorXd& u) {
    if (M.rows() != M.cols() || M.rows() != u.size()) {
        throw InputError("kkt_residual: dimension mismatch");
    }
    const double scale = max_abs(M);
    if (scale == 0.0) {
        return std::abs(u.sum() - 1.0) + std::max(0.0, -u.minCoeff());
    }
    return residual_normalized(M / scale, u);
}

QpSolution solve_simplex_qp(const Eigen::MatrixXd& M, const QpOptions& options,
                            const std::optional<Eigen::VectorXd>& start) {
    const Eigen::Index n = M.rows();
    if (n < 1 || M.cols() != n) {
        throw InputError("QP matrix must be square and non-empty");
    }
    if (!M.allFinite()) {
        throw InputError("QP matrix has non-finite entries");
    }
    const double scale = max_abs(M);
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300)) {
        throw InputError("QP matrix is not symmetric");
    }
    if (start && start->size() != n) {
        throw InputError("QP start vector has wrong length");
    }

    QpSolution out;
    Eigen::VectorXd u = start ? project_to_simplex(*start) : Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

    if (scale == 0.0 || n == 1) {
        out.u = u;
        out.objective = u.dot(M * u);
        out.kkt_residual = kkt_residual(M, u);
        return out;
    }

    const Eigen::MatrixXd Mn = M / scale;
    const double lipschitz = 2.0 * Mn.cwiseAbs().rowwise().sum().maxCoeff();
    double step = 1.0 / lipschitz;
    constexpr double step_min = 1e-12;
    constexpr double step_max = 1e12;
    constexpr int polish_every = 25;
    constexpr double polish_trigger = 1e-4;

    int iterations = 0;
    int since_polish = polish_every;
    double residual = residual_normalized(Mn, u);

    auto finish = [&](const Eigen::VectorXd& x, double res) {
        out.u = x;
        out.objective = x.dot(M * x);
        out.kkt_residual = res;
        out.iterations = iterations;
        return out;
    };

    while (true) {
        if (residual <= options.tol) {
            return finish(u, residual);
        }
        if (since_polish >= polish_every || residual < polish_trigger) {
            iterations += active_set_polish(Mn, u);
            residual = residual_normalized(Mn, u);
            since_polish = 0;
            if (options.record_history) {
                out.history.push_back(u.dot(M * u));
            }
            if (residual <= options.tol) {
                return finish(u, residual);
            }
        }
        if (iterations >= options.max_iter) {
            QpSolution best;
            best.u = u;
            best.objective = u.dot(M * u);
            best.kkt_residual = residual;
            best.iterations = iterations;
            best.history = std::move(out.history);
            throw NonConvergence("simplex QP did not reach KKT residual " + std::to_string(options.tol) +
                                     " within " + std::to_string(options.max_iter) +
                                     " iterations (residual " + std::to_string(residual) + ")",
                                 std::move(best));
        }

        const Eigen::VectorXd g = 2.0 * (Mn * u);
        const Eigen::VectorXd d = project_to_simplex(u - step * g) - u;
        const double slope = g.dot(d);
        Eigen::VectorXd next = u;
        if (slope < 0.0) {
            const double curvature = d.dot(Mn * d);
            const double tau = curvature > 0.0 ? std::min(1.0, -slope / (2.0 * curvature)) : 1.0;
            next = (u + tau * d).cwiseMax(0.0);
            next /= next.sum();
        } else {
            // No descent along the projected direction at this step length; force a polish.
            since_polish = polish_every;
            step = std::max(step_min, step * 0.5);
        }

        const Eigen::VectorXd s = next - u;
        const double sy = 2.0 * s.dot(Mn * s);
        if (sy > 0.0) {
            step = std::clamp(s.squaredNorm() / sy, step_min, step_max);
        }
        u = std::move(next);
        ++iterations;
        ++since_polish;
        residual = residual_normalized(Mn, u);
        if (options.record_history) {
            out.history.push_back(u.dot(M * u));
        }
    }
}

} // namespace cisp
