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

#include "tdmda/uncertainty.hpp"

#include <stdexcept>

namespace tdmda::unc {

McResult mc_entropy(nn::Mlp& classifier, nn::ParamBinder& binder, const ad::Tensor& f,
                    std::size_t mc_samples, nn::Rng& rng)
{
    if (mc_samples == 0) throw std::invalid_argument("mc_entropy: T must be >= 1");
    McResult res;
    ad::Tensor acc;
    for (std::size_t t = 0; t < mc_samples; ++t) {
        ad::Tensor logits =
            mlp_forward(classifier, binder, f, nn::ForwardMode::StochasticDropout, rng);
        ad::Tensor p = ad::softmax(logits, 1);
        res.probs_per_pass.push_back(p.values());
        ad::Tensor plogp = ad::mul(p, ad::log(ad::clamp(p, kProbFloor, 1.0)));
        ad::Tensor row = ad::sum(plogp, 1);
        acc = (t == 0) ? row : ad::add(acc, row);
    }
    res.entropy = ad::scale(acc, -1.0 / static_cast<double>(mc_samples));
    return res;
}

ad::Tensor certainty_map(const ad::Tensor& f, const ad::Tensor& entropy_u)
{
    if (f.node < 0 || f.tape == nullptr)
        throw std::invalid_argument("certainty_map: features carry no graph");
    if (entropy_u.node < 0 || entropy_u.tape != f.tape)
        throw std::invalid_argument("certainty_map: entropy carries no graph back to f");

    // Row independence of the classifier makes the gradient of the summed
    // entropy equal to the stacked per-sample gradients dU_i/df_i.
    const auto grads = f.tape->backward(ad::sum_all(entropy_u));
    const auto& g = grads[static_cast<std::size_t>(f.node)];
    if (g.empty())
        throw std::invalid_argument("certainty_map: entropy does not depend on f");

    const auto& fv = f.values();
    std::vector<double> s(fv.size());
    for (std::size_t i = 0; i < fv.size(); ++i) s[i] = fv[i] * -g[i];

    ad::Tensor masked = ad::select_positive(ad::constant(f.shape, std::move(s)), kMaskFloor);
    ad::Tensor cmap = ad::add(ad::softmax(masked, 1), ad::full({f.shape[1]}, 1.0));
    return ad::detach(cmap);
}

ad::Tensor generate_cmap(nn::Mlp& gen, nn::ParamBinder& binder, const ad::Tensor& logits,
                         const ad::Tensor& f)
{
    if (logits.shape.size() != 2 || f.shape.size() != 2 || logits.shape[0] != f.shape[0])
        throw std::invalid_argument("generate_cmap: logits " + ad::shape_str(logits.shape)
                                    + " and features " + ad::shape_str(f.shape)
                                    + " do not align");
    ad::Tensor inp = ad::concat(logits, f, 1);
    if (inp.shape[1] != gen.in_dim())
        throw std::invalid_argument("generate_cmap: generator expects input dim "
                                    + std::to_string(gen.in_dim()) + ", got "
                                    + ad::shape_str(inp.shape));
    nn::Rng unused(0);
    ad::Tensor out = mlp_forward(gen, binder, inp, nn::ForwardMode::Deterministic, unused);
    return ad::add(ad::softmax(out, 1), ad::full({out.shape[1]}, 1.0));
}

}  // namespace tdmda::unc
