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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "cisp/channel.hpp"
#include "cisp/ci_precoder.hpp"
#include "cisp/constellation.hpp"
#include "cisp/oracle.hpp"
#include "cisp/rzf.hpp"
#include "cisp/simplex_qp.hpp"

namespace {

struct Instance {
    cisp::ChannelMatrix H;
    cisp::SymbolVector sym;
    cisp::PskOrder order;
};

Instance make_instance(int K, int Nt, int M, std::uint64_t trial) {
    auto rng = cisp::trial_rng(7, trial);
    Instance inst{cisp::sample_channel(K, Nt, rng), {}, cisp::PskOrder(M)};
    std::uniform_int_distribution<int> word(0, M - 1);
    std::vector<int> words(static_cast<std::size_t>(K));
    for (auto& w : words) w = word(rng);
    inst.sym = cisp::modulate(words, inst.order);
    return inst;
}

// Args: K, Nt. A handful of instances rotate so one lucky draw does not dominate.
void BM_Precode(benchmark::State& state) {
    const int K = static_cast<int>(state.range(0));
    const int Nt = static_cast<int>(state.range(1));
    std::vector<Instance> pool;
    for (std::uint64_t t = 0; t < 8; ++t) pool.push_back(make_instance(K, Nt, 4, t));
    std::size_t i = 0;
    for (auto _ : state) {
        const auto& inst = pool[i++ % pool.size()];
        benchmark::DoNotOptimize(cisp::precode(inst.H, inst.sym.s, inst.order));
    }
}
BENCHMARK(BM_Precode)->Args({3, 2})->Args({9, 8})->Args({12, 8})->Args({18, 12});

void BM_BuildBundle(benchmark::State& state) {
    const int K = static_cast<int>(state.range(0));
    const int Nt = static_cast<int>(state.range(1));
    const auto inst = make_instance(K, Nt, 4, 0);
    const double theta = cisp::threshold_angle(inst.order);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cisp::build_bundle(inst.H, inst.sym.s, theta));
    }
}
BENCHMARK(BM_BuildBundle)->Args({9, 8})->Args({18, 12});

void BM_SimplexQp(benchmark::State& state) {
    const int K = static_cast<int>(state.range(0));
    const auto inst = make_instance(K, K - 1, 4, 1);
    const auto bundle = cisp::build_bundle(inst.H, inst.sym.s, cisp::threshold_angle(inst.order));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cisp::solve_simplex_qp(bundle.M_qp));
    }
}
BENCHMARK(BM_SimplexQp)->Arg(5)->Arg(9)->Arg(13);

void BM_Rzf(benchmark::State& state) {
    const auto inst = make_instance(9, 8, 4, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cisp::rzf_precode(inst.H, inst.sym.s, 1.0, 9e-4));
    }
}
BENCHMARK(BM_Rzf);

void BM_Oracle(benchmark::State& state) {
    const int K = static_cast<int>(state.range(0));
    const int Nt = static_cast<int>(state.range(1));
    const auto inst = make_instance(K, Nt, 4, 3);
    const double theta = cisp::threshold_angle(inst.order);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cisp::solve_p1_oracle(inst.H, inst.sym.s, 1.0, theta));
    }
}
BENCHMARK(BM_Oracle)->Args({3, 2})->Args({9, 8})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
