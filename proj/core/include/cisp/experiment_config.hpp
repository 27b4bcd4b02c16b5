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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cisp {

enum class PrecoderKind { ci, rzf, oracle };

std::string_view to_string(PrecoderKind kind) noexcept;
/// Throws ConfigError for unknown names.
PrecoderKind parse_precoder(std::string_view name);

/// Settings shared by every experiment. Lists are swept as a Cartesian product
/// (nt x k x mod); when `k_values` is empty the validation campaign uses K = Nt+1 .. Nt+3.
struct ExperimentConfig {
    std::vector<int> nt_values{8};
    std::vector<int> k_values{9};
    std::vector<int> mod_values{4};
    std::vector<double> snr_db{0.0, 10.0, 20.0, 30.0, 40.0};
    int trials = 1000;
    int symbol_slots = 1;
    double p0 = 1.0;
    std::uint64_t seed = 1;
    std::vector<PrecoderKind> precoders{PrecoderKind::ci};
    bool fallback_rzf = true;
    bool strict_ci = false;
    std::optional<double> rank_tol;
    double qp_tol = 1e-10;
    /// RZF loading; defaults to K * sigma^2 at each SNR point.
    std::optional<double> alpha_rzf;
    std::string out;

    // BER stopping rule: at least `trials` trials and `min_bits` bits per point; then keep adding
    // batches while some point has fewer than `min_errors` errors, up to `max_trials`
    // (0 = no extension) and `time_budget_s` seconds (0 = unlimited).
    std::int64_t min_bits = 1'000'000;
    std::int64_t min_errors = 100;
    std::int64_t max_trials = 0;
    double time_budget_s = 0.0;

    int threads = 0;  ///< 0 = std::thread::hardware_concurrency()

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

/// Parses the JSON config file format (keys mirror the CLI flags, e.g. "nt", "k", "mod",
/// "snr_db", "trials", "seed", "precoder", "fallback_rzf"). Unknown keys are rejected.
ExperimentConfig parse_config_json(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

/// Serialises every field (the CSV metadata header embeds this).
std::string config_to_json(const ExperimentConfig& config);

/// "8,9,10", "8:12" (inclusive range) or "8:2:16" (start:step:stop). Blank text gives an empty list.
std::vector<int> parse_int_list(std::string_view text);
std::vector<double> parse_double_list(std::string_view text);

} // namespace cisp
