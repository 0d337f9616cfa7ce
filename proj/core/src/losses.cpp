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

#include "tdmda/uncertainty.hpp"

#include <stdexcept>

namespace tdmda::losses {

std::vector<nn::Parameter*> TdmdaModels::all_parameters()
{
    std::vector<nn::Parameter*> ps;
    for (auto& [name, m] : named_models())
        for (auto* p : m->parameters()) ps.push_back(p);
    return ps;
}

std::vector<std::pair<std::string, nn::Mlp*>> TdmdaModels::named_models()
{
    return {{"extractor", &extractor},   {"classifier", &classifier},
            {"disc_feature", &disc_feature}, {"disc_prob", &disc_prob},
            {"disc_cmap", &disc_cmap},   {"generator", &generator}};
}

TdmdaModels make_models(std::size_t input_dim, std::size_t num_classes, double dropout_rate,
                        std::uint64_t seed)
{
    constexpr std::size_t kFeatureDim = 64;
    TdmdaModels m;
    m.extractor = nn::Mlp("F", {input_dim, 64, kFeatureDim}, dropout_rate, {true});
    m.classifier = nn::Mlp("C", {kFeatureDim, 32, num_classes}, dropout_rate, {true});
    m.disc_feature = nn::Mlp("Df", {kFeatureDim, 32, 1}, 0.0, {false}, /*sigmoid=*/true);
    m.disc_prob = nn::Mlp("Dp", {num_classes, 32, 1}, 0.0, {false}, /*sigmoid=*/true);
    m.disc_cmap = nn::Mlp("Dc", {2 * kFeatureDim, 32, 1}, 0.0, {false}, /*sigmoid=*/true);
    m.generator = nn::Mlp("G", {num_classes + kFeatureDim, 64, kFeatureDim}, 0.0, {false});
    std::uint64_t k = 0;
    for (auto& [name, mlp] : m.named_models()) nn::init_params(*mlp, seed * 6364136223846793005ULL + ++k);
    return m;
}

ad::Tensor classifier_loss(const ad::Tensor& logits, const std::vector<int>& labels)
{
    if (logits.shape.size() != 2 || logits.shape[0] != labels.size())
        throw std::invalid_argument("classifier_loss: logits " + ad::shape_str(logits.shape)
                                    + " do not match " + std::to_string(labels.size())
                                    + " labels");
    const std::size_t n = logits.shape[0], k = logits.shape[1];
    std::vector<double> onehot(n * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= k)
            throw std::invalid_argument("classifier_loss: label " + std::to_string(y)
                                        + " out of range for " + std::to_string(k) + " classes");
        onehot[i * k + static_cast<std::size_t>(y)] = 1.0;
    }
    ad::Tensor p = ad::clamp(ad::softmax(logits, 1), unc::kProbFloor, 1.0);
    ad::Tensor picked = ad::mul(ad::constant({n, k}, std::move(onehot)), ad::log(p));
    return ad::scale(ad::sum_all(picked), -1.0 / static_cast<double>(n));
}

ad::Tensor domain_bce(const ad::Tensor& d_out, const std::vector<double>& domain_labels)
{
    if (d_out.size() != domain_labels.size())
        throw std::invalid_argument("domain_bce: output " + ad::shape_str(d_out.shape)
                                    + " does not match " + std::to_string(domain_labels.size())
                                    + " domain labels");
    const std::size_t n = d_out.size();
    std::vector<double> y(domain_labels);
    std::vector<double> one_minus_y(n);
    for (std::size_t i = 0; i < n; ++i) one_minus_y[i] = 1.0 - y[i];
    ad::Tensor p = ad::clamp(d_out, unc::kProbFloor, 1.0 - unc::kProbFloor);
    ad::Tensor pos = ad::mul(ad::constant(d_out.shape, std::move(y)), ad::log(p));
    ad::Tensor neg = ad::mul(ad::constant(d_out.shape, std::move(one_minus_y)),
                             ad::log(ad::subtract(ad::full(d_out.shape, 1.0), p)));
    return ad::scale(ad::sum_all(ad::add(pos, neg)), -1.0 / static_cast<double>(n));
}

ad::Tensor generator_loss(const ad::Tensor& cmap_generated, const ad::Tensor& cmap_target)
{
    if (cmap_target.node >= 0 || cmap_target.requires_grad)
        throw std::invalid_argument(
            "generator_loss: target map still carries a graph; detach it first");
    if (cmap_generated.shape != cmap_target.shape)
        throw std::invalid_argument("generator_loss: shape mismatch "
                                    + ad::shape_str(cmap_generated.shape) + " vs "
                                    + ad::shape_str(cmap_target.shape));
    return ad::mean_all(ad::square(ad::subtract(cmap_generated, cmap_target)));
}

double binary_accuracy(const ad::Tensor& d_out, const std::vector<double>& domain_labels)
{
    const auto& p = d_out.values();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if ((p[i] >= 0.5) == (domain_labels[i] >= 0.5)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(p.size());
}

std::pair<ad::Tensor, LossReport> total_objective(TdmdaModels& models, nn::ParamBinder& binder,
                                                  const Batch& batch,
                                                  const ObjectiveConfig& config, nn::Rng& rng)
{
    const auto& t = config.toggles;
    const std::size_t n = batch.inputs.rows();
    if (batch.n_source == 0 || batch.labels.size() != batch.n_source) {
        if (!t.feature_adapt && !t.prob_adapt && !t.cmap_adapt)
            throw std::invalid_argument(
                "total_objective: no labeled source rows and all adaptation toggles off");
        throw std::invalid_argument("total_objective: batch needs labeled source rows first");
    }
    if (batch.domain_labels.size() != n)
        throw std::invalid_argument("total_objective: domain labels do not cover the batch");

    LossReport report;
    ad::Tensor f =
        mlp_forward(models.extractor, binder, batch.inputs, nn::ForwardMode::StochasticDropout,
                    rng);
    ad::Tensor logits =
        mlp_forward(models.classifier, binder, f, nn::ForwardMode::StochasticDropout, rng);

    ad::Tensor j = classifier_loss(ad::slice_rows(logits, 0, batch.n_source), batch.labels);
    report.l_c = j.scalar();

    const nn::GradReverse grl{1.0};

    if (t.cmap_adapt) {
        auto mc = unc::mc_entropy(models.classifier, binder, f, config.mc_samples, rng);
        ad::Tensor cmap_t = unc::certainty_map(f, mc.entropy);
        // The regression loss trains G alone: its inputs are detached so
        // no gradient reaches F or C through this term.
        ad::Tensor cmap_g_det =
            unc::generate_cmap(models.generator, binder, ad::detach(logits), ad::detach(f));
        ad::Tensor l_g = generator_loss(cmap_g_det, cmap_t);
        report.l_g = l_g.scalar();
        j = ad::add(j, l_g);

        ad::Tensor cmap_g = unc::generate_cmap(models.generator, binder, logits, f);
        ad::Tensor dc_in = grl_apply(grl, ad::concat(cmap_g, f, 1));
        nn::Rng unused(0);
        ad::Tensor d_out = mlp_forward(models.disc_cmap, binder, dc_in,
                                       nn::ForwardMode::Deterministic, unused);
        ad::Tensor l_dc = domain_bce(d_out, batch.domain_labels);
        report.l_dc = l_dc.scalar();
        report.acc_dc = binary_accuracy(d_out, batch.domain_labels);
        j = ad::add(j, ad::scale(l_dc, config.lambda_c));
    }

    if (t.feature_adapt) {
        nn::Rng unused(0);
        ad::Tensor d_out = mlp_forward(models.disc_feature, binder, grl_apply(grl, f),
                                       nn::ForwardMode::Deterministic, unused);
        ad::Tensor l_df = domain_bce(d_out, batch.domain_labels);
        report.l_df = l_df.scalar();
        report.acc_df = binary_accuracy(d_out, batch.domain_labels);
        j = ad::add(j, ad::scale(l_df, config.lambda_f));
    }

    if (t.prob_adapt) {
        nn::Rng unused(0);
        ad::Tensor probs = ad::softmax(logits, 1);
        ad::Tensor d_out = mlp_forward(models.disc_prob, binder, grl_apply(grl, probs),
                                       nn::ForwardMode::Deterministic, unused);
        ad::Tensor l_dp = domain_bce(d_out, batch.domain_labels);
        report.l_dp = l_dp.scalar();
        report.acc_dp = binary_accuracy(d_out, batch.domain_labels);
        j = ad::add(j, ad::scale(l_dp, config.lambda_p));
    }

    report.j_total = j.scalar();
    return {j, report};
}

}  // namespace tdmda::losses
