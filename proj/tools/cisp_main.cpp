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

// cisp: command line front end for the CI precoding library.
//
//   cisp precode      one instance, JSON to stdout
//   cisp feasibility  feasibility probability sweep (CSV)
//   cisp ber          BER sweep (CSV)
//   cisp validate     pipeline versus oracle campaign (CSV, exit 3 on violations)

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cisp/channel.hpp"
#include "cisp/ci_precoder.hpp"
#include "cisp/constellation.hpp"
#include "cisp/errors.hpp"
#include "cisp/experiment_config.hpp"
#include "cisp/experiments.hpp"
#include "cisp/linalg.hpp"
#include "cisp/oracle.hpp"
#include "cisp/rzf.hpp"

namespace {

enum ExitCode { ok = 0, config_error = 1, numerical_error = 2, validation_failed = 3 };

// Raw flag values; only the ones the user passed override the config file.
struct Flags {
    std::string config;
    std::optional<std::string> nt, k, mod, snr_db, precoder;
    std::optional<int> trials, symbol_slots, threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> p0, rank_tol, qp_tol, alpha_rzf, time_budget;
    std::optional<std::int64_t> min_bits, min_errors, max_trials;
    std::optional<bool> fallback_rzf, strict_ci;
    std::optional<std::string> out;
    std::string log_level = "warn";

    // precode only
    std::string channel_in;
    std::string channel_out;
    std::string words;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "JSON config file; flags given on the command line override it");
    app->add_option("--nt", f.nt, "transmit antennas (list or range, e.g. 8 or 2,4)");
    app->add_option("--k", f.k, "users/streams (list or range, e.g. 8:12)");
    app->add_option("--mod", f.mod, "PSK order(s): 2, 4, 8, ...");
    app->add_option("--snr-db", f.snr_db, "SNR grid in dB (e.g. 0:10:40)");
    app->add_option("--trials", f.trials, "trials per point");
    app->add_option("--symbol-slots", f.symbol_slots, "symbol slots per channel draw");
    app->add_option("--seed", f.seed, "master seed; trial i uses seed + i");
    app->add_option("--p0", f.p0, "total transmit power (default 1)");
    app->add_option("--precoder", f.precoder, "ci, rzf or oracle (comma separated for BER)");
    app->add_flag("--fallback-rzf,!--no-fallback-rzf", f.fallback_rzf,
                  "use RZF on slots where CI is infeasible (default on)");
    app->add_flag("--strict-ci,!--no-strict-ci", f.strict_ci, "force Im(lambda_k) = 0");
    app->add_option("--rank-tol", f.rank_tol, "null-space singular value cutoff (default 1e-8)");
    app->add_option("--qp-tol", f.qp_tol, "simplex QP KKT tolerance");
    app->add_option("--alpha-rzf", f.alpha_rzf, "RZF loading (default K*sigma^2)");
    app->add_option("--min-bits", f.min_bits, "BER: minimum bits per point");
    app->add_option("--min-errors", f.min_errors, "BER: keep extending until this many errors per point");
    app->add_option("--max-trials", f.max_trials, "BER: cap on trials when extending (0 = no extension)");
    app->add_option("--time-budget", f.time_budget, "BER: wall-clock budget in seconds (0 = unlimited)");
    app->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    app->add_option("--out", f.out, "output path (default stdout)");
    app->add_option("--log-level", f.log_level, "trace, debug, info, warn, error, off");
}

cisp::ExperimentConfig build_config(const Flags& f) {
    cisp::ExperimentConfig c = f.config.empty() ? cisp::ExperimentConfig{} : cisp::load_config_file(f.config);
    if (f.nt) c.nt_values = cisp::parse_int_list(*f.nt);
    if (f.k) c.k_values = cisp::parse_int_list(*f.k);
    if (f.mod) c.mod_values = cisp::parse_int_list(*f.mod);
    if (f.snr_db) c.snr_db = cisp::parse_double_list(*f.snr_db);
    if (f.trials) c.trials = *f.trials;
    if (f.symbol_slots) c.symbol_slots = *f.symbol_slots;
    if (f.seed) c.seed = *f.seed;
    if (f.p0) c.p0 = *f.p0;
    if (f.precoder) {
        c.precoders.clear();
        std::string item;
        std::stringstream ss(*f.precoder);
        while (std::getline(ss, item, ',')) {
            c.precoders.push_back(cisp::parse_precoder(item));
        }
    }
    if (f.fallback_rzf) c.fallback_rzf = *f.fallback_rzf;
    if (f.strict_ci) c.strict_ci = *f.strict_ci;
    if (f.rank_tol) c.rank_tol = *f.rank_tol;
    if (f.qp_tol) c.qp_tol = *f.qp_tol;
    if (f.alpha_rzf) c.alpha_rzf = *f.alpha_rzf;
    if (f.min_bits) c.min_bits = *f.min_bits;
    if (f.min_errors) c.min_errors = *f.min_errors;
    if (f.max_trials) c.max_trials = *f.max_trials;
    if (f.time_budget) c.time_budget_s = *f.time_budget;
    if (f.threads) c.threads = *f.threads;
    if (f.out) c.out = *f.out;
    c.validate();
    return c;
}

template <typename Writer>
void emit(const cisp::ExperimentConfig& c, Writer&& write) {
    if (c.out.empty() || c.out == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(c.out);
    if (!os) {
        throw cisp::ConfigError("cannot open output file '" + c.out + "'");
    }
    write(os);
    if (!os) {
        throw cisp::ConfigError("failed writing '" + c.out + "'");
    }
}

nlohmann::json complex_vector_json(const Eigen::VectorXcd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back({v(i).real(), v(i).imag()});
    }
    return out;
}

nlohmann::json complex_matrix_json(const Eigen::MatrixXcd& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out.push_back(complex_vector_json(m.row(r).transpose()));
    }
    return out;
}

int run_precode(const Flags& f) {
    const cisp::ExperimentConfig c = build_config(f);
    if (c.nt_values.size() != 1 || c.k_values.size() != 1 || c.mod_values.size() != 1 || c.precoders.size() != 1) {
        throw cisp::ConfigError("precode takes a single nt, k, mod and precoder");
    }
    const cisp::PskOrder order(c.mod_values.front());
    cisp::Rng rng = cisp::trial_rng(c.seed, 0);

    cisp::ChannelMatrix H;
    if (!f.channel_in.empty()) {
        H = cisp::load_channel(f.channel_in);
        // The channel file is authoritative for the dimensions; the random stream still advances
        // past a draw of the same size so symbols match a generated instance.
        (void)cisp::sample_channel(static_cast<int>(H.rows()), static_cast<int>(H.cols()), rng);
    } else {
        H = cisp::sample_channel(c.k_values.front(), c.nt_values.front(), rng);
    }
    if (!f.channel_out.empty()) {
        cisp::save_channel(H, f.channel_out);
    }
    const int K = static_cast<int>(H.rows());

    std::vector<int> words;
    if (!f.words.empty()) {
        words = cisp::parse_int_list(f.words);
        if (static_cast<int>(words.size()) != K) {
            throw cisp::ConfigError("--words needs exactly K = " + std::to_string(K) + " entries");
        }
    } else {
        std::uniform_int_distribution<int> dist(0, order.value() - 1);
        for (int k = 0; k < K; ++k) {
            words.push_back(dist(rng));
        }
    }
    const cisp::SymbolVector sym = cisp::modulate(words, order);
    const double theta_t = cisp::threshold_angle(order);

    nlohmann::json out;
    out["nt"] = H.cols();
    out["k"] = K;
    out["mod"] = order.value();
    out["precoder"] = std::string(cisp::to_string(c.precoders.front()));
    out["symbols"] = sym.indices;

    Eigen::MatrixXcd W;
    Eigen::VectorXcd Lambda;
    double t_star = 0.0;
    switch (c.precoders.front()) {
    case cisp::PrecoderKind::ci: {
        cisp::PrecoderOptions opt;
        opt.p0 = c.p0;
        opt.rank_tol = c.rank_tol;
        opt.strict_ci = c.strict_ci;
        opt.qp.tol = c.qp_tol;
        const cisp::PrecodeSolution sol = cisp::precode(H, sym.s, order, opt);
        W = sol.W;
        Lambda = sol.Lambda;
        t_star = sol.t_star;
        out["degenerate_dual"] = sol.degenerate_dual;
        out["alpha0"] = sol.alpha0;
        out["dual_objective"] = sol.dual_objective;
        out["duality_residual"] = sol.duality_residual;
        out["qp"] = {{"iterations", sol.qp_iterations}, {"kkt_residual", sol.qp_kkt_residual}};
        break;
    }
    case cisp::PrecoderKind::oracle: {
        const cisp::OracleResult res = cisp::solve_p1_oracle(H, sym.s, c.p0, theta_t);
        W = res.W;
        Lambda = res.Lambda;
        t_star = res.t_star;
        out["bisection_iterations"] = res.bisection_iters;
        break;
    }
    case cisp::PrecoderKind::rzf: {
        const double alpha = c.alpha_rzf.value_or(K * cisp::NoiseSpec::from_snr_db(c.snr_db.empty() ? 40.0 : c.snr_db.front()).sigma2());
        W = cisp::rzf_precode(H, sym.s, c.p0, alpha);
        Lambda = (H * (W * sym.s)).cwiseProduct(sym.s.conjugate());
        t_star = cisp::compute_tstar(cisp::realify_vector(Lambda), theta_t);
        out["alpha_rzf"] = alpha;
        break;
    }
    }
    out["t_star"] = t_star;
    out["feasible"] = cisp::is_feasible(t_star);
    out["Lambda"] = complex_vector_json(Lambda);
    out["W"] = complex_matrix_json(W);

    emit(c, [&](std::ostream& os) { os << out.dump(2) << '\n'; });
    return ok;
}

int run_feasibility(const Flags& f) {
    const cisp::ExperimentConfig c = build_config(f);
    const auto rows = cisp::run_feasibility_sweep(c);
    emit(c, [&](std::ostream& os) { cisp::write_feasibility_csv(os, c, rows); });
    return ok;
}

int run_ber(const Flags& f) {
    const cisp::ExperimentConfig c = build_config(f);
    const auto rows = cisp::run_ber_sweep(c);
    emit(c, [&](std::ostream& os) { cisp::write_ber_csv(os, c, rows); });
    return ok;
}

int run_validate(const Flags& f) {
    const cisp::ExperimentConfig c = build_config(f);
    const cisp::ValidationReport report = cisp::run_validation(c);
    emit(c, [&](std::ostream& os) { cisp::write_validation_csv(os, c, report); });
    std::cerr << cisp::validation_summary_json(report) << '\n';
    return report.passed() ? ok : validation_failed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constructive-interference symbol-level precoding simulator"};
    app.set_version_flag("--version", cisp::version_string());
    app.require_subcommand(1);

    Flags flags;
    auto* precode = app.add_subcommand("precode", "precode one (H, s) instance and print JSON");
    auto* feasibility = app.add_subcommand("feasibility", "feasibility probability sweep");
    auto* ber = app.add_subcommand("ber", "bit error rate sweep");
    auto* validate = app.add_subcommand("validate", "pipeline versus oracle validation campaign");
    for (auto* sub : {precode, feasibility, ber, validate}) {
        add_common(sub, flags);
    }
    precode->add_option("--channel", flags.channel_in, "read H from this file instead of drawing it");
    precode->add_option("--emit-channel", flags.channel_out, "write the channel used to this file");
    precode->add_option("--words", flags.words, "comma separated Gray words, one per user");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    auto level = spdlog::level::from_str(flags.log_level);
    spdlog::set_default_logger(spdlog::stderr_color_mt("cisp"));
    spdlog::set_level(level);

    try {
        if (precode->parsed()) return run_precode(flags);
        if (feasibility->parsed()) return run_feasibility(flags);
        if (ber->parsed()) return run_ber(flags);
        if (validate->parsed()) return run_validate(flags);
    } catch (const cisp::NumericalError& e) {
        spdlog::error("numerical failure: {}", e.what());
        return numerical_error;
    } catch (const cisp::Error& e) {
        spdlog::error("{}", e.what());
        return config_error;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return config_error;
    }
    return config_error;
}
