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
#include <iosfwd>
#include <string>
#include <vector>

#include "cisp/experiment_config.hpp"

namespace cisp {

/// Outcome of one CI precoding attempt inside a sweep.
struct TrialRecord {
    std::int64_t trial = 0;
    std::uint64_t seed = 0;
    bool feasible = false;
    bool numerical_failure = false;
    double t_star = 0.0;
    std::vector<int> user_bit_errors;  ///< BER sweeps only, summed over slots
    std::int64_t bits_sent = 0;
    double runtime_s = 0.0;            ///< wall clock; never written to the deterministic CSV
};

struct FeasibilityRow {
    int nt = 0;
    int k = 0;
    int mod = 0;
    std::int64_t trials = 0;
    std::int64_t feasible_count = 0;
    std::int64_t failure_count = 0;  ///< numerical errors, counted as infeasible
    double probability = 0.0;
};

struct BerRow {
    int nt = 0;
    int k = 0;
    int mod = 0;
    double snr_db = 0.0;
    PrecoderKind precoder = PrecoderKind::ci;
    std::int64_t trials = 0;
    std::int64_t bits = 0;
    std::int64_t bit_errors = 0;
    double ber = 0.0;
    /// Fraction of symbol slots where CI (or the oracle) was infeasible; these slots used RZF
    /// when fallback is enabled. Always 0 for rzf rows.
    double ci_infeasible_fraction = 0.0;
    std::int64_t numerical_failures = 0;
};

struct ValidationInstance {
    int index = 0;
    std::uint64_t seed = 0;
    int nt = 0;
    int k = 0;
    int mod = 0;
    double t_pipeline = 0.0;
    double t_oracle = 0.0;
    double t_error = 0.0;          ///< |t_pipeline - t_oracle| / max(1, |t_oracle|)
    double power_residual = 0.0;   ///< | ||Ws||^2 - p0 | / p0
    double prescale_residual = 0.0;  ///< ||HWs - diag(Lambda)s|| / ||Lambda||
    double column_residual = 0.0;  ///< max_ij ||w_i s_i - w_j s_j||
    double margin_min = 0.0;       ///< min_k (Re lambda_k - t*) tan - |Im lambda_k|
    double null_residual = 0.0;    ///< ||T Lambda||_inf / ||Lambda||_inf
    double duality_residual = 0.0;
    bool feasible = false;
    bool numerical_failure = false;
    bool within_bounds = false;
};

struct ValidationReport {
    std::vector<ValidationInstance> instances;
    double max_t_error = 0.0;
    double median_t_error = 0.0;
    double p95_t_error = 0.0;
    double max_power_residual = 0.0;
    double max_prescale_residual = 0.0;
    double max_column_residual = 0.0;
    double min_margin = 0.0;
    double max_null_residual = 0.0;
    int feasible_count = 0;
    int duality_exceptions = 0;  ///< feasible instances with duality residual > 1e-5 (logged only)
    int violations = 0;
    bool passed() const noexcept { return violations == 0; }
};

/// Hard per-instance bounds applied by run_validation.
struct ValidationBounds {
    double t_rel = 1e-4;
    double power = 1e-8;
    double prescale = 1e-8;
    double column = 1e-8;
    double margin = -1e-8;
    double binding = 1e-6;
    double null_space = 1e-6;
    double duality = 1e-5;  ///< reported, not enforced
};

/// For each (nt, k, mod): fraction of `trials` fresh (H, s) draws with t* > 0. Trial i of every
/// row uses seed + i (common random numbers across K).
std::vector<FeasibilityRow> run_feasibility_sweep(const ExperimentConfig& config,
                                                  std::vector<std::vector<TrialRecord>>* records = nullptr);

/// One precoder solve per symbol slot; receivers detect r_k = h_k^T W s + n_k by angle.
std::vector<BerRow> run_ber_sweep(const ExperimentConfig& config);

/// Pipeline-versus-oracle campaign over `trials` seeded instances cycling through the
/// (nt, k, mod) combinations.
ValidationReport run_validation(const ExperimentConfig& config, const ValidationBounds& bounds = {});

/// Leading `#`-prefixed JSON metadata line shared by every CSV output.
std::string metadata_header(const std::string& command, const ExperimentConfig& config);

void write_feasibility_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<FeasibilityRow>& rows);
void write_ber_csv(std::ostream& os, const ExperimentConfig& config, const std::vector<BerRow>& rows);
void write_validation_csv(std::ostream& os, const ExperimentConfig& config, const ValidationReport& report);
std::string validation_summary_json(const ValidationReport& report);

/// Library version string embedded in output metadata.
std::string version_string();

} // namespace cisp
