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

#include "cisp/experiment_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cisp/constellation.hpp"
#include "cisp/errors.hpp"

namespace cisp {

using nlohmann::json;

std::string_view to_string(PrecoderKind kind) noexcept {
    switch (kind) {
    case PrecoderKind::ci:
        return "ci";
    case PrecoderKind::rzf:
        return "rzf";
    case PrecoderKind::oracle:
        return "oracle";
    }
    return "unknown";
}

PrecoderKind parse_precoder(std::string_view name) {
    if (name == "ci") {
        return PrecoderKind::ci;
    }
    if (name == "rzf") {
        return PrecoderKind::rzf;
    }
    if (name == "oracle") {
        return PrecoderKind::oracle;
    }
    throw ConfigError("unknown precoder '" + std::string(name) + "' (expected ci, rzf or oracle)");
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw ConfigError(what);
        }
    };
    require(!nt_values.empty(), "nt must list at least one antenna count");
    for (int nt : nt_values) {
        require(nt >= 1, "nt must be >= 1");
    }
    for (int k : k_values) {
        require(k >= 1, "k must be >= 1");
    }
    require(!mod_values.empty(), "mod must list at least one modulation order");
    for (int m : mod_values) {
        PskOrder{m};
    }
    for (double snr : snr_db) {
        require(std::isfinite(snr), "SNR values must be finite");
    }
    require(trials >= 1, "trials must be >= 1");
    require(symbol_slots >= 1, "symbol_slots must be >= 1");
    require(p0 > 0.0 && std::isfinite(p0), "p0 must be positive");
    require(!precoders.empty(), "at least one precoder is required");
    require(!rank_tol || (*rank_tol >= 0.0 && std::isfinite(*rank_tol)), "rank_tol must be >= 0");
    require(qp_tol > 0.0, "qp_tol must be positive");
    require(!alpha_rzf || (*alpha_rzf >= 0.0 && std::isfinite(*alpha_rzf)), "alpha_rzf must be >= 0");
    require(min_bits >= 0, "min_bits must be >= 0");
    require(min_errors >= 0, "min_errors must be >= 0");
    require(max_trials >= 0, "max_trials must be >= 0");
    require(time_budget_s >= 0.0, "time_budget must be >= 0");
    require(threads >= 0, "threads must be >= 0");
}

namespace {

template <typename T>
T parse_number(std::string_view tok) {
    T v{};
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last || first == last) {
        throw ConfigError("invalid number '" + std::string(tok) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t begin = 0;
    while (true) {
        const auto pos = text.find(sep, begin);
        auto part = text.substr(begin, pos == std::string_view::npos ? std::string_view::npos : pos - begin);
        while (!part.empty() && part.front() == ' ') {
            part.remove_prefix(1);
        }
        while (!part.empty() && part.back() == ' ') {
            part.remove_suffix(1);
        }
        parts.push_back(part);
        if (pos == std::string_view::npos) {
            break;
        }
        begin = pos + 1;
    }
    return parts;
}

template <typename T>
std::vector<T> parse_list(std::string_view text) {
    std::vector<T> out;
    if (text.find_first_not_of(' ') == std::string_view::npos) {
        return out;
    }
    for (auto item : split(text, ',')) {
        if (item.empty()) {
            throw ConfigError("empty element in list '" + std::string(text) + "'");
        }
        const auto range = split(item, ':');
        if (range.size() == 1) {
            out.push_back(parse_number<T>(range[0]));
            continue;
        }
        if (range.size() != 2 && range.size() != 3) {
            throw ConfigError("bad range '" + std::string(item) + "' (use start:stop or start:step:stop)");
        }
        const T start = parse_number<T>(range[0]);
        const T step = range.size() == 3 ? parse_number<T>(range[1]) : T{1};
        const T stop = parse_number<T>(range.back());
        if (!(step > T{0}) || stop < start) {
            throw ConfigError("bad range '" + std::string(item) + "'");
        }
        // Integer stepping avoids accumulating floating-point drift.
        const auto count = static_cast<long>(std::floor(static_cast<double>(stop - start) / step + 1e-9)) + 1;
        if (count > 100000) {
            throw ConfigError("range '" + std::string(item) + "' is too long");
        }
        for (long i = 0; i < count; ++i) {
            out.push_back(static_cast<T>(start + static_cast<T>(i) * step));
        }
    }
    return out;
}

template <typename T>
std::vector<T> list_field(const json& value, const char* key) {
    if (value.is_number()) {
        return {value.get<T>()};
    }
    if (value.is_string()) {
        return parse_list<T>(value.get<std::string>());
    }
    if (value.is_array()) {
        std::vector<T> out;
        for (const auto& v : value) {
            if (!v.is_number()) {
                throw ConfigError(std::string("non-numeric entry in '") + key + "'");
            }
            out.push_back(v.get<T>());
        }
        return out;
    }
    throw ConfigError(std::string("'") + key + "' must be a number, list or range string");
}

} // namespace

std::vector<int> parse_int_list(std::string_view text) {
    return parse_list<int>(text);
}

std::vector<double> parse_double_list(std::string_view text) {
    return parse_list<double>(text);
}

ExperimentConfig parse_config_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }

    ExperimentConfig cfg;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "nt") {
                cfg.nt_values = list_field<int>(value, "nt");
            } else if (key == "k") {
                cfg.k_values = list_field<int>(value, "k");
            } else if (key == "mod") {
                cfg.mod_values = list_field<int>(value, "mod");
            } else if (key == "snr_db") {
                cfg.snr_db = list_field<double>(value, "snr_db");
            } else if (key == "trials") {
                cfg.trials = value.get<int>();
            } else if (key == "symbol_slots") {
                cfg.symbol_slots = value.get<int>();
            } else if (key == "p0") {
                cfg.p0 = value.get<double>();
            } else if (key == "seed") {
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "precoder") {
                cfg.precoders.clear();
                if (value.is_array()) {
                    for (const auto& p : value) {
                        cfg.precoders.push_back(parse_precoder(p.get<std::string>()));
                    }
                } else {
                    for (auto p : split(value.get<std::string>(), ',')) {
                        cfg.precoders.push_back(parse_precoder(p));
                    }
                }
            } else if (key == "fallback_rzf") {
                cfg.fallback_rzf = value.get<bool>();
            } else if (key == "strict_ci") {
                cfg.strict_ci = value.get<bool>();
            } else if (key == "rank_tol") {
                cfg.rank_tol = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
            } else if (key == "qp_tol") {
                cfg.qp_tol = value.get<double>();
            } else if (key == "alpha_rzf") {
                cfg.alpha_rzf = value.is_null() ? std::nullopt : std::optional<double>(value.get<double>());
            } else if (key == "out") {
                cfg.out = value.get<std::string>();
            } else if (key == "min_bits") {
                cfg.min_bits = value.get<std::int64_t>();
            } else if (key == "min_errors") {
                cfg.min_errors = value.get<std::int64_t>();
            } else if (key == "max_trials") {
                cfg.max_trials = value.get<std::int64_t>();
            } else if (key == "time_budget") {
                cfg.time_budget_s = value.get<double>();
            } else if (key == "threads") {
                cfg.threads = value.get<int>();
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
    } catch (const json::type_error& e) {
        throw ConfigError(std::string("config field has the wrong type: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
    json doc;
    doc["nt"] = c.nt_values;
    doc["k"] = c.k_values;
    doc["mod"] = c.mod_values;
    doc["snr_db"] = c.snr_db;
    doc["trials"] = c.trials;
    doc["symbol_slots"] = c.symbol_slots;
    doc["p0"] = c.p0;
    doc["seed"] = c.seed;
    std::vector<std::string> names;
    for (auto p : c.precoders) {
        names.emplace_back(to_string(p));
    }
    doc["precoder"] = names;
    doc["fallback_rzf"] = c.fallback_rzf;
    doc["strict_ci"] = c.strict_ci;
    doc["rank_tol"] = c.rank_tol ? json(*c.rank_tol) : json(nullptr);
    doc["qp_tol"] = c.qp_tol;
    doc["alpha_rzf"] = c.alpha_rzf ? json(*c.alpha_rzf) : json(nullptr);
    doc["out"] = c.out;
    doc["min_bits"] = c.min_bits;
    doc["min_errors"] = c.min_errors;
    doc["max_trials"] = c.max_trials;
    doc["time_budget"] = c.time_budget_s;
    doc["threads"] = c.threads;
    return doc.dump();
}

} // namespace cisp
