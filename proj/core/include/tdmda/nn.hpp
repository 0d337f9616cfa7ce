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

#pragma once

#include "tdmda/tensor.hpp"

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace tdmda::nn {

using Rng = std::mt19937_64;

/// Trainable array with an accumulated gradient slot.
struct Parameter {
    std::string name;
    ad::Shape shape;
    std::shared_ptr<std::vector<double>> value;
    std::vector<double> grad;

    Parameter() = default;
    Parameter(std::string name_, ad::Shape shape_);
    std::size_t size() const { return value->size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

/// Binds parameters to one tape as leaves, at most once each, and routes
/// gradients from a backward sweep back into Parameter::grad.
class ParamBinder {
public:
    explicit ParamBinder(ad::Tape& tape, bool record = true) : tape_(&tape), record_(record) {}

    ad::Tensor get(Parameter& p);
    int node_of(const Parameter& p) const;  // -1 if unbound
    ad::Tape& tape() { return *tape_; }

    void accumulate(const ad::Tape::GradMap& grads);

private:
    ad::Tape* tape_;
    bool record_ = true;
    std::unordered_map<const Parameter*, ad::Tensor> bound_;
    std::vector<Parameter*> order_;
};

struct LinearLayer {
    Parameter weight;  // out x in
    Parameter bias;    // out

    LinearLayer() = default;
    LinearLayer(const std::string& name, std::size_t in_dim, std::size_t out_dim);
    std::size_t in_dim() const { return weight.shape[1]; }
    std::size_t out_dim() const { return weight.shape[0]; }
};

enum class ForwardMode { Deterministic, StochasticDropout };

/// Plain MLP: relu between layers, optional inverted dropout after
/// designated hidden activations, optional sigmoid on the last output.
struct Mlp {
    std::vector<LinearLayer> layers;
    double dropout_rate = 0.0;
    std::vector<bool> dropout_after;  // per hidden activation
    bool sigmoid_output = false;

    Mlp() = default;
    Mlp(const std::string& name, const std::vector<std::size_t>& dims, double dropout_rate,
        std::vector<bool> dropout_after, bool sigmoid_output = false);

    std::size_t in_dim() const { return layers.front().in_dim(); }
    std::size_t out_dim() const { return layers.back().out_dim(); }
    bool has_dropout() const;
    std::vector<Parameter*> parameters();
};

ad::Tensor mlp_forward(Mlp& m, ParamBinder& binder, const ad::Tensor& x, ForwardMode mode,
                       Rng& rng);

struct GradReverse {
    double lambda = 1.0;
};

/// Identity on values; backward multiplies the incoming gradient by -lambda.
ad::Tensor grl_apply(const GradReverse& g, const ad::Tensor& x);

/// Glorot-uniform weights, zero biases; deterministic per seed.
void init_params(Mlp& m, std::uint64_t seed);

}  // namespace tdmda::nn
