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

#include "tdmda/io.hpp"

#include "tdmda/uncertainty.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tdmda::io {

using nlohmann::json;

void atomic_write(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp + " for writing");
        f << content;
        if (!f) throw std::runtime_error("write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

namespace {

std::string fmt17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string checkpoint_json(Checkpoint& ckpt)
{
    json j;
    j["input_dim"] = ckpt.input_dim;
    j["num_classes"] = ckpt.num_classes;
    j["dropout_rate"] = ckpt.dropout_rate;
    j["standardizer"] = {{"mean", ckpt.standardizer.mean},
                         {"stddev", ckpt.standardizer.stddev}};
    json params = json::array();
    for (auto& [model_name, mlp] : ckpt.models.named_models())
        for (auto* p : mlp->parameters())
            params.push_back({{"model", model_name},
                              {"name", p->name},
                              {"shape", p->shape},
                              {"values", *p->value}});
    j["params"] = std::move(params);
    return j.dump();
}

void save_checkpoint(Checkpoint& ckpt, const std::string& path)
{
    atomic_write(path, checkpoint_json(ckpt));
}

Checkpoint load_checkpoint(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path);
    json j;
    f >> j;

    Checkpoint ckpt;
    ckpt.input_dim = j.at("input_dim").get<std::size_t>();
    ckpt.num_classes = j.at("num_classes").get<std::size_t>();
    ckpt.dropout_rate = j.at("dropout_rate").get<double>();
    ckpt.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    ckpt.standardizer.stddev = j.at("standardizer").at("stddev").get<std::vector<double>>();
    ckpt.models = losses::make_models(ckpt.input_dim, ckpt.num_classes, ckpt.dropout_rate, 0);

    for (const auto& entry : j.at("params")) {
        const std::string model_name = entry.at("model").get<std::string>();
        const std::string param_name = entry.at("name").get<std::string>();
        nn::Parameter* found = nullptr;
        for (auto& [name, mlp] : ckpt.models.named_models()) {
            if (name != model_name) continue;
            for (auto* p : mlp->parameters())
                if (p->name == param_name) found = p;
        }
        if (found == nullptr)
            throw std::runtime_error("checkpoint: unknown parameter " + model_name + "/"
                                     + param_name);
        const auto shape = entry.at("shape").get<ad::Shape>();
        if (shape != found->shape)
            throw std::runtime_error("checkpoint: shape mismatch for " + param_name);
        *found->value = entry.at("values").get<std::vector<double>>();
        if (found->value->size() != ad::numel(shape))
            throw std::runtime_error("checkpoint: value count mismatch for " + param_name);
    }
    return ckpt;
}

std::string metrics_jsonl(const std::vector<train::Metrics>& history)
{
    std::ostringstream os;
    for (const auto& m : history) {
        json j;
        j["step"] = m.step;
        j["source_acc"] = m.source_acc;
        j["target_acc"] = m.target_acc;
        j["mean_entropy_source"] = m.mean_entropy_source;
        j["mean_entropy_target"] = m.mean_entropy_target;
        j["l_c"] = m.loss.l_c;
        j["l_g"] = m.loss.l_g;
        j["l_df"] = m.loss.l_df;
        j["l_dp"] = m.loss.l_dp;
        j["l_dc"] = m.loss.l_dc;
        j["j_total"] = m.loss.j_total;
        j["acc_df"] = m.loss.acc_df;
        j["acc_dp"] = m.loss.acc_dp;
        j["acc_dc"] = m.loss.acc_dc;
        os << j.dump() << '\n';
    }
    return os.str();
}

std::string ablation_csv(const std::vector<train::AblationRow>& rows)
{
    std::ostringstream os;
    os << "regime,seed,target_acc,source_acc,target_entropy,source_entropy\n";
    for (const auto& r : rows)
        os << r.regime << ',' << r.seed << ',' << fmt17(r.target_acc) << ','
           << fmt17(r.source_acc) << ',' << fmt17(r.target_entropy) << ','
           << fmt17(r.source_entropy) << '\n';
    return os.str();
}

std::string ablation_summary_csv(const std::vector<train::AblationSummary>& summary)
{
    std::ostringstream os;
    os << "regime,median_target_acc,iqr_target_acc,median_target_entropy,iqr_target_entropy\n";
    for (const auto& s : summary)
        os << s.regime << ',' << fmt17(s.median_target_acc) << ',' << fmt17(s.iqr_target_acc)
           << ',' << fmt17(s.median_target_entropy) << ',' << fmt17(s.iqr_target_entropy)
           << '\n';
    return os.str();
}

ExportKind export_kind_from_string(const std::string& s)
{
    if (s == "features") return ExportKind::Features;
    if (s == "probs") return ExportKind::Probs;
    if (s == "cmaps") return ExportKind::Cmaps;
    if (s == "uncertainty") return ExportKind::Uncertainty;
    throw std::invalid_argument("unknown export kind '" + s
                                + "' (expected features|probs|cmaps|uncertainty)");
}

std::string export_csv(Checkpoint& ckpt, const data::DomainDataset& ds, ExportKind what,
                       std::size_t mc_samples, std::uint64_t seed)
{
    const data::DomainDataset std_ds = ckpt.standardizer.apply(ds);
    const std::string dom = ds.domain == data::Domain::Source ? "source" : "target";
    auto label_str = [&](std::size_t i) {
        return ds.labels[i] ? std::to_string(*ds.labels[i]) : std::string();
    };

    nn::Rng rng(seed);
    ad::Tape tape;
    const bool need_graph = what == ExportKind::Cmaps;
    nn::ParamBinder binder(tape, /*record=*/need_graph);
    ad::Tensor x = ad::constant({std_ds.n, std_ds.dim}, std_ds.inputs);
    ad::Tensor f = mlp_forward(ckpt.models.extractor, binder, x,
                               nn::ForwardMode::Deterministic, rng);
    std::ostringstream os;

    if (what == ExportKind::Features) {
        const std::size_t d = f.cols();
        os << "id,domain,label";
        for (std::size_t c = 0; c < d; ++c) os << ",f" << c;
        os << '\n';
        for (std::size_t i = 0; i < std_ds.n; ++i) {
            os << i << ',' << dom << ',' << label_str(i);
            for (std::size_t c = 0; c < d; ++c) os << ',' << fmt17(f.values()[i * d + c]);
            os << '\n';
        }
        return os.str();
    }

    ad::Tensor logits = mlp_forward(ckpt.models.classifier, binder, f,
                                    nn::ForwardMode::Deterministic, rng);

    if (what == ExportKind::Probs) {
        ad::Tensor p = ad::softmax(logits, 1);
        const std::size_t k = p.cols();
        os << "id,domain,label";
        for (std::size_t c = 0; c < k; ++c) os << ",p" << c;
        os << '\n';
        for (std::size_t i = 0; i < std_ds.n; ++i) {
            os << i << ',' << dom << ',' << label_str(i);
            for (std::size_t c = 0; c < k; ++c) os << ',' << fmt17(p.values()[i * k + c]);
            os << '\n';
        }
        return os.str();
    }

    auto mc = unc::mc_entropy(ckpt.models.classifier, binder, f, mc_samples, rng);

    if (what == ExportKind::Uncertainty) {
        os << "id,domain,label,entropy\n";
        for (std::size_t i = 0; i < std_ds.n; ++i)
            os << i << ',' << dom << ',' << label_str(i) << ','
               << fmt17(mc.entropy.values()[i]) << '\n';
        return os.str();
    }

    // Cmaps: per-sample certainty bundle rows.
    ad::Tensor cmap_t = unc::certainty_map(f, mc.entropy);
    ad::Tensor cmap_g = unc::generate_cmap(ckpt.models.generator, binder, logits, f);
    const std::size_t d = f.cols();
    os << "id,domain,entropy";
    for (std::size_t c = 0; c < d; ++c) os << ",ct" << c;
    for (std::size_t c = 0; c < d; ++c) os << ",cg" << c;
    os << '\n';
    for (std::size_t i = 0; i < std_ds.n; ++i) {
        os << i << ',' << dom << ',' << fmt17(mc.entropy.values()[i]);
        for (std::size_t c = 0; c < d; ++c) os << ',' << fmt17(cmap_t.values()[i * d + c]);
        for (std::size_t c = 0; c < d; ++c) os << ',' << fmt17(cmap_g.values()[i * d + c]);
        os << '\n';
    }
    return os.str();
}

}  // namespace tdmda::io
