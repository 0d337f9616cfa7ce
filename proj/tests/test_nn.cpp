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

#include "grad_check.hpp"
#include "tdmda/nn.hpp"

#include <doctest.h>

#include <cmath>

using namespace tdmda;

namespace {

std::vector<double> grad_of(ad::Tape& tape, const ad::Tensor& root, const ad::Tensor& leaf)
{
    return tape.backward(root)[static_cast<std::size_t>(leaf.node)];
}

}  // namespace

TEST_CASE("identity linear layer passes input through")
{
    nn::Mlp m("id", {2, 2}, 0.0, {});
    *m.layers[0].weight.value = {1.0, 0.0, 0.0, 1.0};
    ad::Tape tape;
    nn::ParamBinder binder(tape, /*record=*/false);
    nn::Rng rng(0);
    auto y = nn::mlp_forward(m, binder, ad::constant({1, 2}, {1.0, 2.0}),
                             nn::ForwardMode::Deterministic, rng);
    CHECK(y.values() == std::vector<double>{1.0, 2.0});
}

TEST_CASE("zero dropout makes the modes coincide")
{
    nn::Mlp m("m", {4, 8, 3}, 0.0, {true});
    nn::init_params(m, 5);
    auto x = ad::constant({3, 4}, {0.1, -0.2, 0.3, 1.0, -1.0, 0.5, 0.25, 2.0, 0.0, 0.7, -0.7, 0.4});
    ad::Tape tape;
    nn::ParamBinder binder(tape, false);
    nn::Rng r1(1), r2(2);
    auto det = nn::mlp_forward(m, binder, x, nn::ForwardMode::Deterministic, r1);
    auto sto = nn::mlp_forward(m, binder, x, nn::ForwardMode::StochasticDropout, r2);
    CHECK(det.values() == sto.values());
}

TEST_CASE("stochastic dropout replays per seed")
{
    nn::Mlp m("m", {4, 8, 3}, 0.5, {true});
    nn::init_params(m, 9);
    auto x = ad::constant({2, 4}, {0.1, -0.2, 0.3, 1.0, -1.0, 0.5, 0.25, 2.0});
    auto run = [&](std::uint64_t seed) {
        ad::Tape tape;
        nn::ParamBinder binder(tape, false);
        nn::Rng rng(seed);
        return nn::mlp_forward(m, binder, x, nn::ForwardMode::StochasticDropout, rng).values();
    };
    CHECK(run(7) == run(7));
    CHECK(run(7) != run(8));
}

TEST_CASE("deterministic forward is a pure function")
{
    nn::Mlp m("m", {4, 8, 3}, 0.5, {true});
    nn::init_params(m, 13);
    auto x = ad::constant({2, 4}, {0.1, -0.2, 0.3, 1.0, -1.0, 0.5, 0.25, 2.0});
    auto run = [&](std::uint64_t seed) {
        ad::Tape tape;
        nn::ParamBinder binder(tape, false);
        nn::Rng rng(seed);
        return nn::mlp_forward(m, binder, x, nn::ForwardMode::Deterministic, rng).values();
    };
    CHECK(run(1) == run(999));
}

TEST_CASE("grl gradient contract")
{
    std::mt19937_64 rng(21);
    auto vals = gradcheck::random_inputs(6, rng);

    auto grl_grad = [&](double lambda) {
        ad::Tape tape;
        auto x = tape.leaf({2, 3}, vals);
        auto y = ad::sum_all(ad::square(nn::grl_apply({lambda}, x)));
        return grad_of(tape, y, x);
    };
    ad::Tape ref_tape;
    auto xr = ref_tape.leaf({2, 3}, vals);
    auto plain = grad_of(ref_tape, ad::sum_all(ad::square(xr)), xr);

    for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
        auto g = grl_grad(lambda);
        REQUIRE(g.size() == plain.size());
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == -lambda * plain[i]);
    }

    ad::Tape tape;
    auto x = tape.leaf({1, 4}, {1.0, 2.0, 3.0, 4.0});
    auto g1 = grad_of(tape, ad::sum_all(nn::grl_apply({1.0}, x)), x);
    CHECK(g1 == std::vector<double>{-1.0, -1.0, -1.0, -1.0});
}

TEST_CASE("glorot init: deterministic, bounded, centered")
{
    nn::Mlp a("g", {256, 256}, 0.0, {});
    nn::Mlp b("g", {256, 256}, 0.0, {});
    nn::init_params(a, 77);
    nn::init_params(b, 77);
    CHECK(*a.layers[0].weight.value == *b.layers[0].weight.value);
    nn::init_params(b, 78);
    CHECK(*a.layers[0].weight.value != *b.layers[0].weight.value);

    const double bound = std::sqrt(6.0 / (256.0 + 256.0));
    double sum = 0.0;
    for (double w : *a.layers[0].weight.value) {
        CHECK(std::abs(w) <= bound);
        sum += w;
    }
    const double n = 256.0 * 256.0;
    const double sigma_mean = bound / std::sqrt(3.0) / std::sqrt(n);
    CHECK(std::abs(sum / n) <= 3.0 * sigma_mean);
    for (double v : *a.layers[0].bias.value) CHECK(v == 0.0);
}

TEST_CASE("parameter gradients accumulate through the binder")
{
    nn::Mlp m("m", {3, 2}, 0.0, {});
    nn::init_params(m, 4);
    ad::Tape tape;
    nn::ParamBinder binder(tape);
    nn::Rng rng(0);
    auto y = ad::sum_all(
        nn::mlp_forward(m, binder, ad::constant({2, 3}, {1, 0, 0, 0, 1, 0}),
                        nn::ForwardMode::Deterministic, rng));
    binder.accumulate(tape.backward(y));
    // d(sum)/d(bias_j) = batch size for a linear output layer.
    CHECK(m.layers[0].bias.grad == std::vector<double>{2.0, 2.0});
}

TEST_CASE("input dim mismatch is rejected")
{
    nn::Mlp m("m", {4, 2}, 0.0, {});
    nn::init_params(m, 1);
    ad::Tape tape;
    nn::ParamBinder binder(tape, false);
    nn::Rng rng(0);
    CHECK_THROWS_AS((void)nn::mlp_forward(m, binder, ad::constant({1, 3}, {1, 2, 3}),
                                          nn::ForwardMode::Deterministic, rng),
                    std::invalid_argument);
}
