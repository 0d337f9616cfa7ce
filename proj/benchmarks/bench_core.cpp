// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include "tdmda/losses.hpp"
#include "tdmda/nn.hpp"
#include "tdmda/tensor.hpp"
#include "tdmda/uncertainty.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

using namespace tdmda;

std::vector<double> random_values(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

void BM_MatmulForward(benchmark::State& state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    auto a = ad::constant({n, n}, random_values(n * n, 1));
    auto b = ad::constant({n, n}, random_values(n * n, 2));
    for (auto _ : state) benchmark::DoNotOptimize(ad::matmul(a, b));
}

void BM_MlpForwardBackward(benchmark::State& state)
{
    const auto batch = static_cast<std::size_t>(state.range(0));
    nn::Mlp m("F", {2, 64, 64}, 0.5, {true});
    nn::init_params(m, 3);
    auto x = ad::constant({batch, 2}, random_values(batch * 2, 4));
    for (auto _ : state) {
        ad::Tape tape;
        nn::ParamBinder binder(tape);
        nn::Rng rng(5);
        auto y = ad::mean_all(
            ad::square(nn::mlp_forward(m, binder, x, nn::ForwardMode::StochasticDropout, rng)));
        binder.accumulate(tape.backward(y));
    }
}

void BM_McEntropy(benchmark::State& state)
{
    const auto T = static_cast<std::size_t>(state.range(0));
    nn::Mlp clf("C", {64, 32, 2}, 0.5, {true});
    nn::init_params(clf, 6);
    auto f_values = random_values(64 * 64, 7);
    for (auto _ : state) {
        ad::Tape tape;
        nn::ParamBinder binder(tape);
        nn::Rng rng(8);
        auto f = tape.leaf({64, 64}, f_values);
        benchmark::DoNotOptimize(unc::mc_entropy(clf, binder, f, T, rng));
    }
}

void BM_CertaintyMap(benchmark::State& state)
{
    nn::Mlp clf("C", {64, 32, 2}, 0.5, {true});
    nn::init_params(clf, 6);
    auto f_values = random_values(64 * 64, 7);
    for (auto _ : state) {
        ad::Tape tape;
        nn::ParamBinder binder(tape);
        nn::Rng rng(8);
        auto f = tape.leaf({64, 64}, f_values);
        auto mc = unc::mc_entropy(clf, binder, f, 8, rng);
        benchmark::DoNotOptimize(unc::certainty_map(f, mc.entropy));
    }
}

void BM_TotalObjectiveStep(benchmark::State& state)
{
    auto models = losses::make_models(2, 2, 0.5, 9);
    losses::Batch batch;
    batch.inputs = ad::constant({64, 2}, random_values(128, 10));
    for (std::size_t i = 0; i < 32; ++i) batch.labels.push_back(static_cast<int>(i % 2));
    batch.domain_labels.assign(64, 0.0);
    for (std::size_t i = 0; i < 32; ++i) batch.domain_labels[i] = 1.0;
    batch.n_source = 32;
    losses::ObjectiveConfig cfg;
    cfg.toggles = {true, true, true};
    for (auto _ : state) {
        ad::Tape tape;
        nn::ParamBinder binder(tape);
        nn::Rng rng(11);
        auto [j, report] = losses::total_objective(models, binder, batch, cfg, rng);
        for (auto* p : models.all_parameters()) p->zero_grad();
        binder.accumulate(tape.backward(j));
    }
}

}  // namespace

BENCHMARK(BM_MatmulForward)->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_MlpForwardBackward)->Arg(16)->Arg(64);
BENCHMARK(BM_McEntropy)->Arg(1)->Arg(8)->Arg(32);
BENCHMARK(BM_CertaintyMap);
BENCHMARK(BM_TotalObjectiveStep);

BENCHMARK_MAIN();
