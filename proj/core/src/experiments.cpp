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

#include "cisp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include <json.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "cisp/channel.hpp"
#include "cisp/ci_precoder.hpp"
#include "cisp/constellation.hpp"
#include "cisp/errors.hpp"
#include "cisp/oracle.hpp"
#include "cisp/rzf.hpp"

#ifndef CISP_VERSION_STRING
#define CISP_VERSION_STRING "unknown"
#endif

namespace cisp {

namespace {

using Clock = std::chrono::steady_clock;

int worker_count(int requested) {
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [begin, end). Results must be written to per-index slots by the caller so
// that aggregation order does not depend on scheduling.
template <typename Fn>
void parallel_for(std::int64_t begin, std::int64_t end, int threads, Fn&& fn) {
    const std::int64_t n = end - begin;
    const int workers = static_cast<int>(std::min<std::int64_t>(threads, n));
    if (workers <= 1) {
        for (std::int64_t i = begin; i < end; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::int64_t> next{begin};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::int64_t i = next++; i < end; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

SymbolVector draw_symbols(int K, PskOrder order, Rng& rng) {
    std::uniform_int_distribution<int> word(0, order.value() - 1);
    std::vector<int> words(static_cast<std::size_t>(K));
    for (auto& w : words) {
        w = word(rng);
    }
    return modulate(words, order);
}

Rng noise_rng(std::uint64_t seed, std::int64_t trial, int slot, std::size_t snr_index) {
    const std::uint64_t base = seed + static_cast<std::uint64_t>(trial);
    std::seed_seq seq{static_cast<std::uint32_t>(base & 0xffffffffu), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(slot), static_cast<std::uint32_t>(snr_index), 0x6e6f6973u};
    return Rng(seq);
}

PrecoderOptions precoder_options(const ExperimentConfig& config) {
    PrecoderOptions opt;
    opt.p0 = config.p0;
    opt.rank_tol = config.rank_tol;
    opt.strict_ci = config.strict_ci;
    opt.qp.tol = config.qp_tol;
    return opt;
}

double rzf_alpha(const ExperimentConfig& config, int K, double sigma2) {
    return config.alpha_rzf.value_or(static_cast<double>(K) * sigma2);
}

struct Combo {
    int nt;
    int k;
    int mod;
};

std::vector<Combo> sweep_combos(const ExperimentConfig& config) {
    std::vector<Combo> combos;
    for (int nt : config.nt_values) {
        for (int k : config.k_values) {
            for (int m : config.mod_values) {
                combos.push_back({nt, k, m});
            }
        }
    }
    return combos;
}

} // namespace

std::string version_string() {
    return CISP_VERSION_STRING;
}

// ---------------------------------------------------------------------------------------------
// Feasibility

std::vector<FeasibilityRow> run_feasibility_sweep(const ExperimentConfig& config,
                                                  std::vector<std::vector<TrialRecord>>* records) {
    config.validate();
    if (config.k_values.empty()) {
        throw ConfigError("feasibility sweep needs at least one K");
    }
    const PrecoderOptions opt = precoder_options(config);
    const int threads = worker_count(config.threads);

    std::vector<FeasibilityRow> rows;
    for (const Combo& c : sweep_combos(config)) {
        const PskOrder order(c.mod);
        std::vector<TrialRecord> trials(static_cast<std::size_t>(config.trials));
        parallel_for(0, config.trials, threads, [&](std::int64_t t) {
            const auto start = Clock::now();
            TrialRecord& rec = trials[static_cast<std::size_t>(t)];
            rec.trial = t;
            rec.seed = config.seed + static_cast<std::uint64_t>(t);
            Rng rng = trial_rng(config.seed, static_cast<std::uint64_t>(t));
            const ChannelMatrix H = sample_channel(c.k, c.nt, rng);
            const SymbolVector sym = draw_symbols(c.k, order, rng);
            try {
                const PrecodeSolution sol = precode(H, sym.s, order, opt);
                rec.feasible = sol.feasible;
                rec.t_star = sol.t_star;
            } catch (const NumericalError& e) {
                rec.numerical_failure = true;
                spdlog::warn("feasibility trial {} (Nt={}, K={}, M={}) failed: {}", t, c.nt, c.k, c.mod, e.what());
            }
            rec.runtime_s = std::chrono::duration<double>(Clock::now() - start).count();
        });

        FeasibilityRow row{c.nt, c.k, c.mod, config.trials, 0, 0, 0.0};
        for (const auto& rec : trials) {
            row.feasible_count += rec.feasible ? 1 : 0;
            row.failure_count += rec.numerical_failure ? 1 : 0;
        }
        row.probability = static_cast<double>(row.feasible_count) / static_cast<double>(row.trials);
        rows.push_back(row);
        if (records != nullptr) {
            records->push_back(std::move(trials));
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------------------------
// BER

namespace {

struct BerTrialOutcome {
    // Indexed [precoder][snr].
    std::vector<std::vector<std::int64_t>> errors;
    std::vector<std::int64_t> infeasible_slots;  // per precoder
    std::vector<std::int64_t> failures;          // per precoder
};

BerTrialOutcome run_ber_trial(const ExperimentConfig& config, const Combo& c, PskOrder order,
                              const std::vector<NoiseSpec>& noise, const PrecoderOptions& opt, std::int64_t t) {
    const std::size_t n_prec = config.precoders.size();
    const std::size_t n_snr = noise.size();
    BerTrialOutcome out;
    out.errors.assign(n_prec, std::vector<std::int64_t>(n_snr, 0));
    out.infeasible_slots.assign(n_prec, 0);
    out.failures.assign(n_prec, 0);

    Rng rng = trial_rng(config.seed, static_cast<std::uint64_t>(t));
    const ChannelMatrix H = sample_channel(c.k, c.nt, rng);
    const double theta_t = threshold_angle(order);

    for (int slot = 0; slot < config.symbol_slots; ++slot) {
        const SymbolVector sym = draw_symbols(c.k, order, rng);

        // Noise is shared by all precoders so comparisons use common random numbers.
        std::vector<Eigen::VectorXcd> noise_draws;
        noise_draws.reserve(n_snr);
        for (std::size_t i = 0; i < n_snr; ++i) {
            Rng nrng = noise_rng(config.seed, t, slot, i);
            noise_draws.push_back(add_noise(Eigen::VectorXcd::Zero(c.k), noise[i], nrng));
        }

        for (std::size_t p = 0; p < n_prec; ++p) {
            const PrecoderKind kind = config.precoders[p];
            std::optional<Eigen::MatrixXcd> fixed_W;
            bool use_rzf = kind == PrecoderKind::rzf;
            if (kind != PrecoderKind::rzf) {
                bool feasible = false;
                try {
                    if (kind == PrecoderKind::ci) {
                        const PrecodeSolution sol = precode(H, sym.s, order, opt);
                        feasible = sol.feasible;
                        fixed_W = sol.W;
                    } else {
                        const OracleResult res = solve_p1_oracle(H, sym.s, config.p0, theta_t);
                        feasible = res.t_star > 0.0;
                        fixed_W = res.W;
                    }
                } catch (const NumericalError& e) {
                    ++out.failures[p];
                    spdlog::warn("BER trial {} slot {} ({}): {}", t, slot, to_string(kind), e.what());
                }
                if (!feasible) {
                    ++out.infeasible_slots[p];
                    if (config.fallback_rzf || !fixed_W) {
                        use_rzf = true;
                    }
                }
            }

            for (std::size_t i = 0; i < n_snr; ++i) {
                const Eigen::MatrixXcd W =
                    use_rzf ? rzf_precode(H, sym.s, config.p0, rzf_alpha(config, c.k, noise[i].sigma2())) : *fixed_W;
                const Eigen::VectorXcd r = H * (W * sym.s) + noise_draws[i];
                std::int64_t errs = 0;
                for (int k = 0; k < c.k; ++k) {
                    errs += bit_errors(sym.indices[static_cast<std::size_t>(k)], detect(r(k), order), order);
                }
                out.errors[p][i] += errs;
            }
        }
    }
    return out;
}

} // namespace

std::vector<BerRow> run_ber_sweep(const ExperimentConfig& config) {
    config.validate();
    if (config.k_values.empty()) {
        throw ConfigError("BER sweep needs at least one K");
    }
    if (config.snr_db.empty()) {
        throw ConfigError("BER sweep needs a non-empty SNR grid");
    }
    const PrecoderOptions opt = precoder_options(config);
    const int threads = worker_count(config.threads);
    const auto started = Clock::now();

    std::vector<NoiseSpec> noise;
    for (double snr : config.snr_db) {
        noise.push_back(NoiseSpec::from_snr_db(snr));
    }
    const std::size_t n_prec = config.precoders.size();
    const std::size_t n_snr = noise.size();

    std::vector<BerRow> rows;
    for (const Combo& c : sweep_combos(config)) {
        const PskOrder order(c.mod);
        const std::int64_t bits_per_trial =
            static_cast<std::int64_t>(c.k) * order.bits_per_symbol() * config.symbol_slots;
        const std::int64_t base = std::max<std::int64_t>(
            config.trials, (config.min_bits + bits_per_trial - 1) / bits_per_trial);
        const std::int64_t cap = std::max(base, config.max_trials);
        constexpr std::int64_t batch = 1000;

        std::vector<std::vector<std::int64_t>> errors(n_prec, std::vector<std::int64_t>(n_snr, 0));
        std::vector<std::int64_t> infeasible(n_prec, 0);
        std::vector<std::int64_t> failures(n_prec, 0);
        std::int64_t done = 0;

        auto out_of_time = [&] {
            return config.time_budget_s > 0.0 &&
                   std::chrono::duration<double>(Clock::now() - started).count() > config.time_budget_s;
        };
        auto needs_more = [&] {
            if (done < base) {
                return true;
            }
            if (done >= cap) {
                return false;
            }
            for (const auto& per_snr : errors) {
                for (auto e : per_snr) {
                    if (e < config.min_errors) {
                        return true;
                    }
                }
            }
            return false;
        };

        while (needs_more()) {
            if (out_of_time()) {
                spdlog::warn("time budget exhausted after {} trials for Nt={} K={} M={}", done, c.nt, c.k, c.mod);
                break;
            }
            const std::int64_t limit = done < base ? base : cap;
            const std::int64_t end = std::min(done + batch, limit);
            std::vector<BerTrialOutcome> outcomes(static_cast<std::size_t>(end - done));
            parallel_for(done, end, threads, [&](std::int64_t t) {
                outcomes[static_cast<std::size_t>(t - done)] = run_ber_trial(config, c, order, noise, opt, t);
            });
            for (const auto& o : outcomes) {
                for (std::size_t p = 0; p < n_prec; ++p) {
                    for (std::size_t i = 0; i < n_snr; ++i) {
                        errors[p][i] += o.errors[p][i];
                    }
                    infeasible[p] += o.infeasible_slots[p];
                    failures[p] += o.failures[p];
                }
            }
            done = end;
        }

        const std::int64_t bits = done * bits_per_trial;
        const std::int64_t slots = done * config.symbol_slots;
        for (std::size_t p = 0; p < n_prec; ++p) {
            for (std::size_t i = 0; i < n_snr; ++i) {
                BerRow row;
                row.nt = c.nt;
                row.k = c.k;
                row.mod = c.mod;
                row.snr_db = config.snr_db[i];
                row.precoder = config.precoders[p];
                row.trials = done;
                row.bits = bits;
                row.bit_errors = errors[p][i];
                row.ber = bits > 0 ? static_cast<double>(errors[p][i]) / static_cast<double>(bits) : 0.0;
                row.ci_infeasible_fraction =
                    slots > 0 ? static_cast<double>(infeasible[p]) / static_cast<double>(slots) : 0.0;
                row.numerical_failures = failures[p];
                rows.push_back(row);
            }
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------------------------
// Validation

ValidationReport run_validation(const ExperimentConfig& config, const ValidationBounds& bounds) {
    config.validate();
    std::vector<Combo> combos;
    for (int nt : config.nt_values) {
        std::vector<int> ks = config.k_values;
        if (ks.empty()) {
            ks = {nt + 1, nt + 2, nt + 3};
        }
        for (int k : ks) {
            for (int m : config.mod_values) {
                combos.push_back({nt, k, m});
            }
        }
    }
    const PrecoderOptions opt = precoder_options(config);
    const int threads = worker_count(config.threads);

    ValidationReport report;
    report.instances.resize(static_cast<std::size_t>(config.trials));
    parallel_for(0, config.trials, threads, [&](std::int64_t i) {
        const Combo& c = combos[static_cast<std::size_t>(i) % combos.size()];
        ValidationInstance& v = report.instances[static_cast<std::size_t>(i)];
        v.index = static_cast<int>(i);
        v.seed = config.seed + static_cast<std::uint64_t>(i);
        v.nt = c.nt;
        v.k = c.k;
        v.mod = c.mod;

        const PskOrder order(c.mod);
        const double theta_t = threshold_angle(order);
        Rng rng = trial_rng(config.seed, static_cast<std::uint64_t>(i));
        const ChannelMatrix H = sample_channel(c.k, c.nt, rng);
        const SymbolVector sym = draw_symbols(c.k, order, rng);
        const Eigen::VectorXcd& s = sym.s;

        try {
            const PrecodeSolution sol = precode(H, s, order, opt);
            const OracleResult ref = solve_p1_oracle(H, s, config.p0, theta_t);
            v.t_pipeline = sol.t_star;
            v.t_oracle = ref.t_star;
            v.t_error = std::abs(sol.t_star - ref.t_star) / std::max(1.0, std::abs(ref.t_star));
            v.feasible = sol.feasible;

            const Eigen::VectorXcd x = sol.W * s;
            v.power_residual = std::abs(x.squaredNorm() - config.p0) / config.p0;
            const double lambda_norm = sol.Lambda.norm();
            v.prescale_residual = (H * x - sol.Lambda.cwiseProduct(s)).norm() / std::max(lambda_norm, 1e-300);
            double column = 0.0;
            for (int a = 0; a < c.k; ++a) {
                for (int b = a + 1; b < c.k; ++b) {
                    column = std::max(column, (sol.W.col(a) * s(a) - sol.W.col(b) * s(b)).norm());
                }
            }
            v.column_residual = column;
            const double tan_t = std::tan(theta_t);
            double margin = std::numeric_limits<double>::infinity();
            for (int k = 0; k < c.k; ++k) {
                margin = std::min(margin, (sol.Lambda(k).real() - sol.t_star) * tan_t - std::abs(sol.Lambda(k).imag()));
            }
            v.margin_min = margin;
            const Eigen::MatrixXcd T = build_T(H, s);
            v.null_residual =
                (T * sol.Lambda).cwiseAbs().maxCoeff() / std::max(sol.Lambda.cwiseAbs().maxCoeff(), 1e-300);
            v.duality_residual = sol.duality_residual;
            if (sol.feasible && sol.duality_residual > bounds.duality) {
                spdlog::info("validation instance {}: duality residual {:.3g} (t* = {:.10g})", i,
                             sol.duality_residual, sol.t_star);
            }

            bool ok = v.t_error <= bounds.t_rel && v.power_residual <= bounds.power &&
                      v.prescale_residual <= bounds.prescale && v.column_residual <= bounds.column &&
                      v.null_residual <= bounds.null_space;
            if (sol.feasible) {
                ok = ok && v.margin_min >= bounds.margin && v.margin_min <= bounds.binding;
            }
            v.within_bounds = ok;
        } catch (const NumericalError& e) {
            v.numerical_failure = true;
            v.within_bounds = false;
            spdlog::warn("validation instance {} failed: {}", i, e.what());
        }
    });

    std::vector<double> errs;
    report.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& v : report.instances) {
        errs.push_back(v.t_error);
        report.max_t_error = std::max(report.max_t_error, v.t_error);
        report.max_power_residual = std::max(report.max_power_residual, v.power_residual);
        report.max_prescale_residual = std::max(report.max_prescale_residual, v.prescale_residual);
        report.max_column_residual = std::max(report.max_column_residual, v.column_residual);
        report.max_null_residual = std::max(report.max_null_residual, v.null_residual);
        if (v.feasible) {
            ++report.feasible_count;
            report.min_margin = std::min(report.min_margin, v.margin_min);
            if (v.duality_residual > bounds.duality) {
                ++report.duality_exceptions;
            }
        }
        if (!v.within_bounds) {
            ++report.violations;
        }
    }
    if (report.feasible_count == 0) {
        report.min_margin = 0.0;
    }
    if (!errs.empty()) {
        std::sort(errs.begin(), errs.end());
        auto quantile = [&](double q) {
            const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(errs.size()))) - 1;
            return errs[std::min(idx, errs.size() - 1)];
        };
        report.median_t_error = quantile(0.5);
        report.p95_t_error = quantile(0.95);
    }
    return report;
}

// ---------------------------------------------------------------------------------------------
// Output

std::string metadata_header(const std::string& command, const ExperimentConfig& config) {
    nlohmann::json cfg = nlohmann::json::parse(config_to_json(config));
    // Worker count and output path do not affect results.
    cfg.erase("threads");
    cfg.erase("out");
    nlohmann::json meta;
    meta["tool"] = "cisp";
    meta["version"] = version_string();
    meta["command"] = command;
    meta["config"] = cfg;
    meta["seed_rule"] = "trial_seed = seed + trial_index";
    meta["tolerances"] = {
        {"rank_tol", config.rank_tol ? nlohmann::json(*config.rank_tol) : nlohmann::json(1e-8)},
        {"qp_tol", config.qp_tol},
        {"degenerate_dual_tol", PrecoderOptions{}.degenerate_tol},
        {"oracle_bisection_tol", 1e-6},
    };
    meta["rzf_alpha"] = config.alpha_rzf ? nlohmann::json(*config.alpha_rzf) : nlohmann::json("K*sigma2");
    return "# " + meta.dump();
}

void write_feasibility_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<FeasibilityRow>& rows) {
    os << metadata_header("feasibility", config) << '\n';
    os << "nt,k,mod,trials,feasible_count,probability,numerical_failures\n";
    for (const auto& r : rows) {
        os << fmt::format("{},{},{},{},{},{:.6f},{}\n", r.nt, r.k, r.mod, r.trials, r.feasible_count, r.probability,
                          r.failure_count);
    }
}

void write_ber_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<BerRow>& rows) {
    os << metadata_header("ber", config) << '\n';
    os << "nt,k,mod,snr_db,precoder,trials,bits,bit_errors,ber,ci_infeasible_fraction,numerical_failures\n";
    for (const auto& r : rows) {
        os << fmt::format("{},{},{},{:g},{},{},{},{},{:.6e},{:.6f},{}\n", r.nt, r.k, r.mod, r.snr_db,
                          to_string(r.precoder), r.trials, r.bits, r.bit_errors, r.ber, r.ci_infeasible_fraction,
                          r.numerical_failures);
    }
}

std::string validation_summary_json(const ValidationReport& r) {
    nlohmann::json j;
    j["instances"] = r.instances.size();
    j["feasible"] = r.feasible_count;
    j["violations"] = r.violations;
    j["passed"] = r.passed();
    j["t_error"] = {{"max", r.max_t_error}, {"median", r.median_t_error}, {"p95", r.p95_t_error}};
    j["max_power_residual"] = r.max_power_residual;
    j["max_prescale_residual"] = r.max_prescale_residual;
    j["max_column_residual"] = r.max_column_residual;
    j["max_null_residual"] = r.max_null_residual;
    j["min_margin"] = r.min_margin;
    j["duality_exceptions"] = r.duality_exceptions;
    return j.dump();
}

void write_validation_csv(std::ostream& os, const ExperimentConfig& config, const ValidationReport& report) {
    os << metadata_header("validate", config) << '\n';
    os << "# summary " << validation_summary_json(report) << '\n';
    os << "index,seed,nt,k,mod,feasible,t_pipeline,t_oracle,t_error,power_residual,prescale_residual,"
          "column_residual,margin_min,null_residual,duality_residual,numerical_failure,within_bounds\n";
    for (const auto& v : report.instances) {
        os << fmt::format("{},{},{},{},{},{:d},{:.12g},{:.12g},{:.3e},{:.3e},{:.3e},{:.3e},{:.3e},{:.3e},{:.3e},{:d},{:d}\n",
                          v.index, v.seed, v.nt, v.k, v.mod, v.feasible, v.t_pipeline, v.t_oracle, v.t_error,
                          v.power_residual, v.prescale_residual, v.column_residual, v.margin_min, v.null_residual,
                          v.duality_residual, v.numerical_failure, v.within_bounds);
    }
}

} // namespace cisp
