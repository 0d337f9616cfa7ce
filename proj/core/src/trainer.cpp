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

#include "tdmda/trainer.hpp"

#include "tdmda/uncertainty.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tdmda::train {

double lambda_schedule(ScheduleKind kind, double gamma, double progress)
{
    if (kind == ScheduleKind::Constant) return 1.0;
    return 2.0 / (1.0 + std::exp(-gamma * progress)) - 1.0;
}

namespace {

class SgdMomentum {
public:
    SgdMomentum(std::vector<nn::Parameter*> params, double lr, double momentum,
                OptimizerKind kind)
        : params_(std::move(params)), lr_(lr), momentum_(momentum), kind_(kind)
    {
        for (auto* p : params_) {
            state1_.emplace_back(p->size(), 0.0);
            state2_.emplace_back(p->size(), 0.0);
        }
    }

    void step()
    {
        ++t_;
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& w = *params_[i]->value;
            const auto& g = params_[i]->grad;
            auto& v = state1_[i];
            if (kind_ == OptimizerKind::Sgd) {
                for (std::size_t j = 0; j < w.size(); ++j) {
                    v[j] = momentum_ * v[j] - lr_ * g[j];
                    w[j] += v[j];
                }
            } else {
                constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
                auto& m2 = state2_[i];
                const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
                const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
                for (std::size_t j = 0; j < w.size(); ++j) {
                    v[j] = b1 * v[j] + (1.0 - b1) * g[j];
                    m2[j] = b2 * m2[j] + (1.0 - b2) * g[j] * g[j];
                    w[j] -= lr_ * (v[j] / c1) / (std::sqrt(m2[j] / c2) + eps);
                }
            }
        }
    }

    void zero_grad()
    {
        for (auto* p : params_) p->zero_grad();
    }

private:
    std::vector<nn::Parameter*> params_;
    double lr_;
    double momentum_;
    OptimizerKind kind_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> state1_;
    std::vector<std::vector<double>> state2_;
};

ad::Tensor dataset_tensor(const data::DomainDataset& ds)
{
    return ad::constant({ds.n, ds.dim}, ds.inputs);
}

std::vector<int> required_labels(const data::DomainDataset& ds)
{
    std::vector<int> out;
    out.reserve(ds.n);
    for (const auto& l : ds.labels) {
        if (!l) throw std::invalid_argument("evaluate: dataset has unlabeled rows");
        out.push_back(*l);
    }
    return out;
}

}  // namespace

std::pair<double, double> evaluate(losses::TdmdaModels& models, const data::DomainDataset& ds,
                                   std::size_t mc_samples, std::uint64_t seed)
{
    const std::vector<int> labels = required_labels(ds);
    const std::size_t k = models.classifier.out_dim();
    nn::Rng rng(seed);

    ad::Tape tape;
    nn::ParamBinder binder(tape, /*record=*/false);
    ad::Tensor x = dataset_tensor(ds);
    ad::Tensor f = mlp_forward(models.extractor, binder, x, nn::ForwardMode::Deterministic, rng);
    ad::Tensor logits =
        mlp_forward(models.classifier, binder, f, nn::ForwardMode::Deterministic, rng);
    const auto& lv = logits.values();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.n; ++i) {
        std::size_t arg = 0;
        for (std::size_t c = 1; c < k; ++c)
            if (lv[i * k + c] > lv[i * k + arg]) arg = c;
        if (static_cast<int>(arg) == labels[i]) ++correct;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(ds.n);

    auto mc = unc::mc_entropy(models.classifier, binder, f, mc_samples, rng);
    const auto& u = mc.entropy.values();
    double mean_u = 0.0;
    for (double v : u) mean_u += v;
    mean_u /= static_cast<double>(ds.n);
    return {acc, mean_u};
}

TrainResult train(const TrainConfig& config, const data::DomainDataset& source,
                  const data::DomainDataset& target)
{
    config.validate();
    if (source.dim != target.dim)
        throw std::invalid_argument("train: source and target dimensions differ");
    for (const auto& l : source.labels)
        if (!l) throw std::invalid_argument("train: source must be fully labeled");

    const auto t_start = std::chrono::steady_clock::now();

    data::SplitSpec split_spec{1.0 - config.eval_fraction, config.eval_fraction, config.seed};
    auto [src_train, src_eval] = data::split(source, split_spec);
    auto [tgt_train, tgt_eval] = data::split(target, split_spec);
    // Quarantine: the optimization path never sees target labels.
    for (auto& l : tgt_train.labels) l.reset();

    data::Standardizer st = data::Standardizer::fit(src_train);
    src_train = st.apply(src_train);
    src_eval = st.apply(src_eval);
    tgt_train = st.apply(tgt_train);
    tgt_eval = st.apply(tgt_eval);

    const std::size_t num_classes = source.num_classes();
    TrainResult result;
    result.models = losses::make_models(source.dim, num_classes, config.dropout_rate,
                                        config.seed);
    result.standardizer = st;
    result.num_classes = num_classes;

    SgdMomentum opt(result.models.all_parameters(), config.learning_rate, config.momentum,
                    config.optimizer);

    const std::size_t half = std::max<std::size_t>(1, config.batch_size / 2);
    const std::size_t steps_per_epoch = std::max<std::size_t>(1, src_train.n / half);
    const std::size_t total_steps = config.epochs * steps_per_epoch;

    nn::Rng batch_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    nn::Rng drop_rng(config.seed ^ 0x2545f4914f6cdd1dULL);

    std::vector<std::size_t> src_idx(src_train.n), tgt_idx(tgt_train.n);
    for (std::size_t i = 0; i < src_train.n; ++i) src_idx[i] = i;
    for (std::size_t i = 0; i < tgt_train.n; ++i) tgt_idx[i] = i;

    losses::LossReport last_report;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(src_idx.begin(), src_idx.end(), batch_rng);
        std::shuffle(tgt_idx.begin(), tgt_idx.end(), batch_rng);
        for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
            const double progress =
                total_steps > 1 ? static_cast<double>(step) / static_cast<double>(total_steps - 1)
                                : 1.0;
            const double ramp =
                lambda_schedule(config.lambda_schedule, config.ramp_gamma, progress);

            losses::Batch batch;
            batch.n_source = half;
            std::vector<double> inputs;
            inputs.reserve(2 * half * src_train.dim);
            for (std::size_t i = 0; i < half; ++i) {
                const std::size_t r = src_idx[(s * half + i) % src_train.n];
                inputs.insert(inputs.end(),
                              src_train.inputs.begin() + static_cast<std::ptrdiff_t>(r * src_train.dim),
                              src_train.inputs.begin() + static_cast<std::ptrdiff_t>((r + 1) * src_train.dim));
                batch.labels.push_back(*src_train.labels[r]);
                batch.domain_labels.push_back(1.0);
            }
            for (std::size_t i = 0; i < half; ++i) {
                const std::size_t r = tgt_idx[(s * half + i) % tgt_train.n];
                inputs.insert(inputs.end(),
                              tgt_train.inputs.begin() + static_cast<std::ptrdiff_t>(r * tgt_train.dim),
                              tgt_train.inputs.begin() + static_cast<std::ptrdiff_t>((r + 1) * tgt_train.dim));
                batch.domain_labels.push_back(0.0);
            }
            batch.inputs = ad::constant({2 * half, src_train.dim}, std::move(inputs));

            losses::ObjectiveConfig oc;
            oc.toggles = {config.feature_adapt, config.prob_adapt, config.cmap_adapt};
            oc.lambda_f = config.lambda_f * ramp;
            oc.lambda_p = config.lambda_p * ramp;
            oc.lambda_c = config.lambda_c * ramp;
            oc.mc_samples = config.mc_samples;

            ad::Tape tape;
            nn::ParamBinder binder(tape);
            auto [j, report] = losses::total_objective(result.models, binder, batch, oc,
                                                       drop_rng);
            if (!std::isfinite(report.j_total))
                throw std::runtime_error("train: non-finite loss at step " + std::to_string(step)
                                         + " (last l_c=" + std::to_string(last_report.l_c)
                                         + ", j=" + std::to_string(last_report.j_total) + ")");
            last_report = report;

            binder.accumulate(tape.backward(j));
            opt.step();
            opt.zero_grad();

            const bool last_step = step + 1 == total_steps;
            if (step % config.eval_every == 0 || last_step) {
                Metrics m;
                m.step = step;
                m.loss = report;
                std::tie(m.source_acc, m.mean_entropy_source) =
                    evaluate(result.models, src_eval, config.mc_samples, config.seed + 1);
                std::tie(m.target_acc, m.mean_entropy_target) =
                    evaluate(result.models, tgt_eval, config.mc_samples, config.seed + 2);
                m.wall_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - t_start)
                                .count();
                result.history.push_back(m);
            }
        }
    }
    return result;
}

AblationResult run_ablation(const TrainConfig& base_config, const data::DomainDataset& source,
                            const data::DomainDataset& target,
                            const std::vector<std::uint64_t>& seeds)
{
    if (seeds.empty()) throw std::invalid_argument("run_ablation: seed list is empty");
    const Regime regimes[] = {Regime::SourceOnly, Regime::Dann, Regime::Pmda, Regime::Cmda,
                              Regime::Tdmda};
    AblationResult out;
    for (Regime r : regimes) {
        std::vector<double> t_accs, t_ents;
        for (std::uint64_t seed : seeds) {
            TrainConfig cfg = base_config;
            apply_regime(cfg, r);
            cfg.seed = seed;
            TrainResult res = train(cfg, source, target);
            const Metrics& final = res.history.back();
            AblationRow row;
            row.regime = to_string(r);
            row.seed = seed;
            row.target_acc = final.target_acc;
            row.source_acc = final.source_acc;
            row.target_entropy = final.mean_entropy_target;
            row.source_entropy = final.mean_entropy_source;
            out.rows.push_back(row);
            t_accs.push_back(row.target_acc);
            t_ents.push_back(row.target_entropy);
        }
        AblationSummary sum;
        sum.regime = to_string(r);
        sum.median_target_acc = median(t_accs);
        sum.iqr_target_acc = iqr(t_accs);
        sum.median_target_entropy = median(t_ents);
        sum.iqr_target_entropy = iqr(t_ents);
        out.summary.push_back(sum);
    }
    return out;
}

namespace {

double quantile_sorted(const std::vector<double>& v, double q)
{
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

double median(std::vector<double> values)
{
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.5);
}

double iqr(std::vector<double> values)
{
    if (values.empty()) throw std::invalid_argument("iqr: empty input");
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25);
}

}  // namespace tdmda::train
