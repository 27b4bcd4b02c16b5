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

#include "cisp/constellation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "cisp/errors.hpp"

namespace cisp {

PskOrder::PskOrder(int m) : m_(m), bits_(0) {
    if (m < 2 || !std::has_single_bit(static_cast<unsigned>(m))) {
        throw ConfigError("PSK order must be a power of two >= 2, got " + std::to_string(m));
    }
    bits_ = std::countr_zero(static_cast<unsigned>(m));
}

double threshold_angle(PskOrder order) {
    return std::numbers::pi / order.value();
}

std::complex<double> constellation_point(int index, PskOrder order) {
    if (index < 0 || index >= order.value()) {
        throw InputError("constellation index " + std::to_string(index) + " outside [0, " +
                         std::to_string(order.value()) + ")");
    }
    return std::polar(1.0, 2.0 * std::numbers::pi * index / order.value());
}

int gray_encode(int index) noexcept {
    return index ^ (index >> 1);
}

int gray_decode(int label) noexcept {
    int index = 0;
    for (; label != 0; label >>= 1) {
        index ^= label;
    }
    return index;
}

SymbolVector modulate(std::span<const int> words, PskOrder order) {
    SymbolVector out;
    out.s.resize(static_cast<Eigen::Index>(words.size()));
    out.indices.reserve(words.size());
    for (std::size_t k = 0; k < words.size(); ++k) {
        const int word = words[k];
        if (word < 0 || word >= order.value()) {
            throw InputError("symbol word " + std::to_string(word) + " at position " + std::to_string(k) +
                             " outside [0, " + std::to_string(order.value()) + ")");
        }
        const int index = gray_decode(word);
        out.indices.push_back(index);
        out.s(static_cast<Eigen::Index>(k)) = constellation_point(index, order);
    }
    return out;
}

int detect(std::complex<double> r, PskOrder order) noexcept {
    const int m = order.value();
    double angle = std::atan2(r.imag(), r.real());
    if (angle < 0.0) {
        angle += 2.0 * std::numbers::pi;
    }
    // Position in units of the angular spacing, in [0, M].
    const double pos = angle * m / (2.0 * std::numbers::pi);
    const double below = std::floor(pos);
    const double frac = pos - below;
    const int lo = static_cast<int>(below) % m;
    const int hi = (lo + 1) % m;
    if (frac < 0.5) {
        return lo;
    }
    if (frac > 0.5) {
        return hi;
    }
    return std::min(lo, hi);
}

int bit_errors(int sent_index, int detected_index, PskOrder order) {
    const int m = order.value();
    if (sent_index < 0 || sent_index >= m || detected_index < 0 || detected_index >= m) {
        throw InputError("bit_errors: index outside [0, " + std::to_string(m) + ")");
    }
    return std::popcount(static_cast<unsigned>(gray_encode(sent_index) ^ gray_encode(detected_index)));
}

} // namespace cisp
