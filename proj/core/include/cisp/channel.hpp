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
#include <filesystem>
#include <iosfwd>
#include <random>

#include <Eigen/Dense>

namespace cisp {

/// Every random draw in the library goes through an explicitly passed generator of this type.
using Rng = std::mt19937_64;

/// Complex K x Nt flat-fading channel; row k is h_k^T.
using ChannelMatrix = Eigen::MatrixXcd;

/// Receiver noise level. sigma2 * rho == 1 with rho the transmit SNR (unit total power).
class NoiseSpec {
public:
    /// Throws InputError unless sigma2 > 0.
    static NoiseSpec from_sigma2(double sigma2);
    static NoiseSpec from_snr_db(double snr_db);

    double sigma2() const noexcept { return sigma2_; }
    double rho() const noexcept { return 1.0 / sigma2_; }

private:
    explicit NoiseSpec(double sigma2) : sigma2_(sigma2) {}
    double sigma2_;
};

/// Generator for trial `trial_index` under the documented rule seed = master_seed + trial_index.
Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial_index);

/// i.i.d. CN(0, 1) entries: real and imaginary parts each N(0, 1/2).
ChannelMatrix sample_channel(int K, int Nt, Rng& rng);

/// x + n with n i.i.d. CN(0, sigma2).
Eigen::VectorXcd add_noise(const Eigen::VectorXcd& x, const NoiseSpec& spec, Rng& rng);

/// Text format: header "# K Nt", then K lines of Nt whitespace-separated "re:im" tokens.
/// Values are written in shortest round-trip form, so save/load is bit-exact.
void write_channel(std::ostream& os, const ChannelMatrix& H);
ChannelMatrix read_channel(std::istream& is);

void save_channel(const ChannelMatrix& H, const std::filesystem::path& path);
ChannelMatrix load_channel(const std::filesystem::path& path);

} // namespace cisp
