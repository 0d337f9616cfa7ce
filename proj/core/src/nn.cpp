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

#include "tdmda/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace tdmda::nn {

Parameter::Parameter(std::string name_, ad::Shape shape_)
    : name(std::move(name_)),
      shape(std::move(shape_)),
      value(std::make_shared<std::vector<double>>(ad::numel(shape), 0.0)),
      grad(ad::numel(shape), 0.0)
{
}

ad::Tensor ParamBinder::get(Parameter& p)
{
    auto it = bound_.find(&p);
    if (it != bound_.end()) return it->second;
    ad::Tensor t = tape_->leaf(p.shape, p.value, /*requires_grad=*/record_);
    bound_.emplace(&p, t);
    order_.push_back(&p);
    return t;
}

int ParamBinder::node_of(const Parameter& p) const
{
    auto it = bound_.find(&p);
    return it == bound_.end() ? -1 : it->second.node;
}

void ParamBinder::accumulate(const ad::Tape::GradMap& grads)
{
    for (Parameter* p : order_) {
        const int node = bound_.at(p).node;
        if (node < 0) continue;
        const auto& g = grads[static_cast<std::size_t>(node)];
        if (g.empty()) continue;
        for (std::size_t i = 0; i < g.size(); ++i) p->grad[i] += g[i];
    }
}

LinearLayer::LinearLayer(const std::string& name, std::size_t in_dim, std::size_t out_dim)
    : weight(name + ".weight", {out_dim, in_dim}), bias(name + ".bias", {out_dim})
{
}

Mlp::Mlp(const std::string& name, const std::vector<std::size_t>& dims, double dropout_rate_,
         std::vector<bool> dropout_after_, bool sigmoid_output_)
    : dropout_rate(dropout_rate_),
      dropout_after(std::move(dropout_after_)),
      sigmoid_output(sigmoid_output_)
{
    if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least one layer");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("Mlp: dropout_rate must be in [0, 1)");
    for (std::size_t i = 0; i + 1 < dims.size(); ++i)
        layers.emplace_back(name + ".l" + std::to_string(i), dims[i], dims[i + 1]);
    if (dropout_after.empty()) dropout_after.assign(layers.size() - 1, false);
    if (dropout_after.size() != layers.size() - 1)
        throw std::invalid_argument("Mlp: dropout_after must match hidden activation count");
}

bool Mlp::has_dropout() const
{
    if (dropout_rate == 0.0) return false;
    for (bool b : dropout_after)
        if (b) return true;
    return false;
}

std::vector<Parameter*> Mlp::parameters()
{
    std::vector<Parameter*> ps;
    for (auto& l : layers) {
        ps.push_back(&l.weight);
        ps.push_back(&l.bias);
    }
    return ps;
}

ad::Tensor mlp_forward(Mlp& m, ParamBinder& binder, const ad::Tensor& x, ForwardMode mode,
                       Rng& rng)
{
    if (x.shape.size() != 2 || x.shape[1] != m.in_dim())
        throw std::invalid_argument("mlp_forward: input " + ad::shape_str(x.shape)
                                    + " does not match layer input dim "
                                    + std::to_string(m.in_dim()));
    ad::Tensor h = x;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        auto& layer = m.layers[i];
        ad::Tensor w = binder.get(layer.weight);
        ad::Tensor b = binder.get(layer.bias);
        h = ad::add(ad::matmul(h, w, /*transpose_b=*/true), b);
        const bool last = i + 1 == m.layers.size();
        if (last) {
            if (m.sigmoid_output) h = ad::sigmoid(h);
            break;
        }
        h = ad::relu(h);
        if (m.dropout_after[i] && m.dropout_rate > 0.0
            && mode == ForwardMode::StochasticDropout) {
            // Inverted dropout: surviving units scaled by 1/(1-p), so the
            // deterministic path is the plain identity.
            const double keep = 1.0 - m.dropout_rate;
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::vector<double> mask(h.size());
            for (auto& v : mask) v = (u(rng) < keep) ? 1.0 / keep : 0.0;
            h = ad::dropout_apply(h, mask);
        }
    }
    return h;
}

ad::Tensor grl_apply(const GradReverse& g, const ad::Tensor& x)
{
    return ad::grad_reverse(x, g.lambda);
}

void init_params(Mlp& m, std::uint64_t seed)
{
    Rng rng(seed);
    for (auto& layer : m.layers) {
        const double fan_in = static_cast<double>(layer.in_dim());
        const double fan_out = static_cast<double>(layer.out_dim());
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (auto& w : *layer.weight.value) w = u(rng);
        std::fill(layer.bias.value->begin(), layer.bias.value->end(), 0.0);
        layer.weight.zero_grad();
        layer.bias.zero_grad();
    }
}

}  // namespace tdmda::nn
