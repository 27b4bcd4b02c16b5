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

#include "cisp/channel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cisp/errors.hpp"

namespace cisp {

NoiseSpec NoiseSpec::from_sigma2(double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
        throw InputError("noise variance must be positive and finite, got " + std::to_string(sigma2));
    }
    return NoiseSpec(sigma2);
}

NoiseSpec NoiseSpec::from_snr_db(double snr_db) {
    if (!std::isfinite(snr_db)) {
        throw InputError("SNR must be finite");
    }
    return from_sigma2(std::pow(10.0, -snr_db / 10.0));
}

Rng trial_rng(std::uint64_t master_seed, std::uint64_t trial_index) {
    return Rng(master_seed + trial_index);
}

ChannelMatrix sample_channel(int K, int Nt, Rng& rng) {
    if (K < 1 || Nt < 1) {
        throw InputError("channel dimensions must be positive, got K=" + std::to_string(K) +
                         " Nt=" + std::to_string(Nt));
    }
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    ChannelMatrix H(K, Nt);
    for (int k = 0; k < K; ++k) {
        for (int n = 0; n < Nt; ++n) {
            const double re = normal(rng);
            const double im = normal(rng);
            H(k, n) = {re, im};
        }
    }
    return H;
}

Eigen::VectorXcd add_noise(const Eigen::VectorXcd& x, const NoiseSpec& spec, Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(spec.sigma2() / 2.0));
    Eigen::VectorXcd y = x;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        y(i) += std::complex<double>(re, im);
    }
    return y;
}

namespace {

void append_double(std::string& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

double parse_double(std::string_view text, int line, int field) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw ParseError("invalid number '" + std::string(text) + "'", line, field);
    }
    return v;
}

long parse_positive_int(std::string_view text, int line, int field) {
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || v < 1) {
        throw ParseError("expected a positive integer, got '" + std::string(text) + "'", line, field);
    }
    return v;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    for (std::string tok; ss >> tok;) {
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

} // namespace

void write_channel(std::ostream& os, const ChannelMatrix& H) {
    os << "# " << H.rows() << ' ' << H.cols() << '\n';
    std::string line;
    for (Eigen::Index k = 0; k < H.rows(); ++k) {
        line.clear();
        for (Eigen::Index n = 0; n < H.cols(); ++n) {
            if (n > 0) {
                line.push_back(' ');
            }
            append_double(line, H(k, n).real());
            line.push_back(':');
            append_double(line, H(k, n).imag());
        }
        os << line << '\n';
    }
}

ChannelMatrix read_channel(std::istream& is) {
    std::string line;
    int line_no = 0;

    // Header.
    bool have_header = false;
    long K = 0;
    long Nt = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto tokens = split_ws(line);
        if (tokens.empty()) {
            continue;
        }
        if (tokens[0] != "#" || tokens.size() != 3) {
            throw ParseError("expected header '# K Nt'", line_no, 1);
        }
        K = parse_positive_int(tokens[1], line_no, 2);
        Nt = parse_positive_int(tokens[2], line_no, 3);
        have_header = true;
        break;
    }
    if (!have_header) {
        throw ParseError("empty channel file", line_no, 0);
    }

    ChannelMatrix H(K, Nt);
    long row = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto tokens = split_ws(line);
        if (tokens.empty()) {
            continue;
        }
        if (row >= K) {
            throw ParseError("more rows than the header's K=" + std::to_string(K), line_no, 1);
        }
        if (static_cast<long>(tokens.size()) != Nt) {
            throw ParseError("expected " + std::to_string(Nt) + " entries, found " + std::to_string(tokens.size()),
                             line_no, static_cast<int>(std::min<long>(static_cast<long>(tokens.size()), Nt) + 1));
        }
        for (long n = 0; n < Nt; ++n) {
            const std::string& tok = tokens[static_cast<std::size_t>(n)];
            const int field = static_cast<int>(n + 1);
            const auto colon = tok.find(':');
            if (colon == std::string::npos) {
                throw ParseError("entry '" + tok + "' is not of the form re:im", line_no, field);
            }
            const std::string_view view(tok);
            const double re = parse_double(view.substr(0, colon), line_no, field);
            const double im = parse_double(view.substr(colon + 1), line_no, field);
            H(row, n) = {re, im};
        }
        ++row;
    }
    if (row != K) {
        throw ParseError("expected " + std::to_string(K) + " rows, found " + std::to_string(row), line_no, 0);
    }
    return H;
}

void save_channel(const ChannelMatrix& H, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw InputError("cannot open '" + path.string() + "' for writing");
    }
    write_channel(os, H);
    if (!os) {
        throw InputError("failed writing '" + path.string() + "'");
    }
}

ChannelMatrix load_channel(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    return read_channel(is);
}

} // namespace cisp
