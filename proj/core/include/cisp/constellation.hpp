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

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cisp {

/// Modulation order of an M-PSK constellation. Always a power of two, at least 2.
class PskOrder {
public:
    /// Throws ConfigError unless `m` is a power of two >= 2.
    explicit PskOrder(int m);

    int value() const noexcept { return m_; }
    int bits_per_symbol() const noexcept { return bits_; }

    friend bool operator==(PskOrder, PskOrder) = default;

private:
    int m_;
    int bits_;
};

/// Unit-modulus PSK symbols together with the angular index of each entry.
struct SymbolVector {
    Eigen::VectorXcd s;
    std::vector<int> indices;

    Eigen::Index size() const noexcept { return s.size(); }
};

/// Half-width pi/M of a detection sector.
double threshold_angle(PskOrder order);

/// exp(j 2 pi m / M).
std::complex<double> constellation_point(int index, PskOrder order);

/// Binary-reflected Gray label of an angular index, and its inverse.
int gray_encode(int index) noexcept;
int gray_decode(int label) noexcept;

/// Maps each log2(M)-bit word to the constellation point whose Gray label equals the word.
/// Throws InputError for words outside [0, M).
SymbolVector modulate(std::span<const int> words, PskOrder order);

/// Nearest-sector detection by angle. Ties and r == 0 resolve to the smaller index.
int detect(std::complex<double> r, PskOrder order) noexcept;

/// Hamming distance between the Gray labels of two angular indices.
int bit_errors(int sent_index, int detected_index, PskOrder order);

} // namespace cisp
