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
#include "op_gradients.hpp"
#include "tdmda/uncertainty.hpp"

#include <doctest.h>

#include <cmath>

using namespace tdmda;

namespace {

void zero_fill(nn::Parameter& p) { std::fill(p.value->begin(), p.value->end(), 0.0); }

}  // namespace

TEST_CASE("uniform classifier gives entropy ln 2")
{
    nn::Mlp clf("C", {4, 8, 2}, 0.0, {true});
    nn::init_params(clf, 3);
    zero_fill(clf.layers[1].weight);  // logits identically zero
    ad::Tape tape;
    nn::ParamBinder binder(tape, false);
    nn::Rng rng(1);
    auto f = ad::constant({3, 4}, {1, 2, 3, 4, -1, 0, 0.5, 2, 0, 0, 0, 0});
    auto mc = unc::mc_entropy(clf, binder, f, 1, rng);
    for (double u : mc.entropy.values()) CHECK(u == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("one-hot prediction gives near-zero entropy")
{
    nn::Mlp clf("C", {4, 8, 2}, 0.0, {true});
    nn::init_params(clf, 3);
    zero_fill(clf.layers[1].weight);
    (*clf.layers[1].bias.value)[0] = 60.0;  // p ~ (1, e^-60)
    ad::Tape tape;
    nn::ParamBinder binder(tape, false);
    nn::Rng rng(1);
    auto f = ad::constant({2, 4}, {1, 2, 3, 4, -1, 0, 0.5, 2});
    auto mc = unc::mc_entropy(clf, binder, f, 1, rng);
    for (double u : mc.entropy.values()) {
        CHECK(u >= 0.0);
        CHECK(u <= 1e-10);
    }
}

TEST_CASE("zero dropout: entropy invariant in T and matches one pass")
{
    nn::Mlp clf("C", {4, 8, 3}, 0.0, {true});
    nn::init_params(clf, 8);
    auto f = ad::constant({2, 4}, {0.4, -1.2, 0.3, 0.9, 2.0, 0.1, -0.5, 0.7});
    auto entropy_for = [&](std::size_t T, std::uint64_t seed) {
        ad::Tape tape;
        nn::ParamBinder binder(tape, false);
        nn::Rng rng(seed);
        return unc::mc_entropy(clf, binder, f, T, rng).entropy.values();
    };
    auto e1 = entropy_for(1, 1);
    for (std::size_t T : {std::size_t{4}, std::size_t{16}}) {
        auto eT = entropy_for(T, T);
        REQUIRE(eT.size() == e1.size());
        // Averaging T identical passes only differs by summation rounding.
        for (std::size_t i = 0; i < e1.size(); ++i)
            CHECK(eT[i] == doctest::Approx(e1[i]).epsilon(1e-12));
    }
}

TEST_CASE("mc probability rows sum to one")
{
    nn::Mlp clf("C", {4, 8, 3}, 0.5, {true});
    nn::init_params(clf, 2);
    ad::Tape tape;
    nn::ParamBinder binder(tape, false);
    nn::Rng rng(5);
    auto f = ad::constant({3, 4}, {0.4, -1.2, 0.3, 0.9, 2.0, 0.1, -0.5, 0.7, 0, 0, 0, 1});
    auto mc = unc::mc_entropy(clf, binder, f, 6, rng);
    REQUIRE(mc.probs_per_pass.size() == 6);
    for (const auto& pass : mc.probs_per_pass) {
        REQUIRE(pass.size() == 9);
        for (std::size_t r = 0; r < 3; ++r) {
            double s = pass[r * 3] + pass[r * 3 + 1] + pass[r * 3 + 2];
            CHECK(std::abs(s - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("T = 0 is rejected")
{
    nn::Mlp clf("C", {2, 4, 2}, 0.5, {true});
    nn::init_params(clf, 1);
    ad::Tape tape;
    nn::ParamBinder binder(tape, false);
    nn::Rng rng(1);
    auto f = ad::constant({1, 2}, {1.0, 2.0});
    CHECK_THROWS_AS((void)unc::mc_entropy(clf, binder, f, 0, rng), std::invalid_argument);
}

TEST_CASE("zero uncertainty gradient gives the uniform certainty map")
{
    nn::Mlp clf("C", {4, 8, 3}, 0.0, {true});
    nn::init_params(clf, 3);
    zero_fill(clf.layers[0].weight);  // no path from f to the logits
    ad::Tape tape;
    nn::ParamBinder binder(tape, false);
    nn::Rng rng(1);
    auto f = tape.leaf({2, 4}, {1, -2, 3, 4, 0.5, 0.5, 0.5, 0.5});
    auto mc = unc::mc_entropy(clf, binder, f, 2, rng);
    auto ct = unc::certainty_map(f, mc.entropy);
    for (double v : ct.values()) CHECK(v == doctest::Approx(1.25).epsilon(1e-12));
    CHECK_FALSE(ct.requires_grad);
    CHECK(ct.node == -1);
}

TEST_CASE("mask saturation: single surviving coordinate takes all the mass")
{
    // U = sum_j c_j f_j with c = (-1, 1, 1) at f = (1, 1, 1): the product
    // f * (-dU/df) is positive only at coordinate 0.
    ad::Tape tape;
    auto f = tape.leaf({1, 3}, {1.0, 1.0, 1.0});
    auto c = ad::constant({1, 3}, {-1.0, 1.0, 1.0});
    auto u = ad::sum(ad::mul(f, c), 1);
    auto ct = unc::certainty_map(f, u);
    CHECK(ct.values()[0] == 2.0);
    CHECK(ct.values()[1] == 1.0);
    CHECK(ct.values()[2] == 1.0);
}

TEST_CASE("certainty map invariants over a 1000-sample batch")
{
    const std::size_t n = 1000, d = 6, k = 3;
    nn::Mlp clf("C", {d, 16, k}, 0.5, {true});
    nn::init_params(clf, 12);
    std::mt19937_64 vr(99);
    ad::Tape tape;
    auto f = tape.leaf({n, d}, gradcheck::random_inputs(n * d, vr));
    nn::ParamBinder binder(tape);
    nn::Rng rng(4);
    auto mc = unc::mc_entropy(clf, binder, f, 4, rng);
    for (double u : mc.entropy.values()) {
        CHECK(u >= 0.0);
        CHECK(u <= std::log(double(k)) + 1e-9);
    }
    auto ct = unc::certainty_map(f, mc.entropy);
    std::size_t bad = 0;
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double v = ct.values()[r * d + c];
            // masked coordinates sit exactly at 1 (zero softmax weight)
            if (!(v >= 1.0 && v <= 2.0)) ++bad;
            s += v - 1.0;
        }
        if (std::abs(s - 1.0) >= 1e-9) ++bad;
    }
    CHECK(bad == 0);
}

TEST_CASE("generated map shares the target map codomain")
{
    const std::size_t d = 5, k = 3;
    nn::Mlp gen("G", {k + d, 8, d}, 0.0, {false});
    nn::init_params(gen, 6);
    ad::Tape tape;
    nn::ParamBinder binder(tape, false);
    auto logits = ad::constant({2, k}, {1, -2, 0.5, 0, 0, 3});
    auto f = ad::constant({2, d}, {1, 2, 3, 4, 5, -1, -2, -3, -4, -5});
    auto cg = unc::generate_cmap(gen, binder, logits, f);
    for (std::size_t r = 0; r < 2; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double v = cg.values()[r * d + c];
            CHECK(v > 1.0);
            CHECK(v < 2.0);
            s += v - 1.0;
        }
        CHECK(std::abs(s - 1.0) < 1e-9);
    }

    // Zeroing the last layer forces uniform output.
    zero_fill(gen.layers[1].weight);
    zero_fill(gen.layers[1].bias);
    auto uniform = unc::generate_cmap(gen, binder, logits, f);
    for (double v : uniform.values()) CHECK(v == doctest::Approx(1.2).epsilon(1e-12));
}

TEST_CASE("generator regression loss is non-increasing under small steps")
{
    const std::size_t d = 4, k = 2, n = 8;
    nn::Mlp gen("G", {k + d, 8, d}, 0.0, {false});
    nn::init_params(gen, 30);
    std::mt19937_64 vr(31);
    auto logits = ad::constant({n, k}, gradcheck::random_inputs(n * k, vr));
    auto f = ad::constant({n, d}, gradcheck::random_inputs(n * d, vr));
    std::vector<double> target(n * d, 1.0);
    for (std::size_t r = 0; r < n; ++r) target[r * d + r % d] += 1.0;  // one-hot-ish valid maps
    auto tgt = ad::constant({n, d}, target);

    double prev = 1e300, first = 0.0, last = 0.0;
    for (int step = 0; step < 100; ++step) {
        ad::Tape tape;
        nn::ParamBinder binder(tape);
        auto cg = unc::generate_cmap(gen, binder, logits, f);
        auto loss = ad::mean_all(ad::square(ad::subtract(cg, tgt)));
        const double value = loss.scalar();
        if (step == 0) first = value;
        last = value;
        CHECK(value <= prev + 1e-12);
        prev = value;
        for (auto* p : gen.parameters()) p->zero_grad();
        binder.accumulate(tape.backward(loss));
        for (auto* p : gen.parameters())
            for (std::size_t i = 0; i < p->size(); ++i) (*p->value)[i] -= 0.05 * p->grad[i];
    }
    CHECK(last < first);
}

TEST_CASE("dU/df matches finite differences with replayed masks")
{
    CHECK(gradcheck::mc_pipeline_rel_error(2026) < gradcheck::kTol);
}

TEST_CASE("certainty map without a graph to f is rejected")
{
    ad::Tape tape;
    auto f = ad::constant({1, 3}, {1.0, 2.0, 3.0});  // detached features
    auto u = ad::constant({1}, {0.5});
    CHECK_THROWS_AS((void)unc::certainty_map(f, u), std::invalid_argument);
}
