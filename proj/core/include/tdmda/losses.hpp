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

#include "tdmda/nn.hpp"
#include "tdmda/tensor.hpp"

#include <utility>
#include <vector>

namespace tdmda::losses {

struct LossReport {
    double l_c = 0.0;
    double l_g = 0.0;
    double l_df = 0.0;
    double l_dp = 0.0;
    double l_dc = 0.0;
    double j_total = 0.0;
    double acc_df = 0.0;  // batch accuracy of each active discriminator
    double acc_dp = 0.0;
    double acc_dc = 0.0;
};

/// The six networks of the pipeline.
struct TdmdaModels {
    nn::Mlp extractor;
    nn::Mlp classifier;
    nn::Mlp disc_feature;
    nn::Mlp disc_prob;
    nn::Mlp disc_cmap;
    nn::Mlp generator;

    std::vector<nn::Parameter*> all_parameters();
    std::vector<std::pair<std::string, nn::Mlp*>> named_models();
};

/// Desk-scale architecture: feature dim 64, hidden 32 discriminators,
/// dropout in F and C (C's dropout is the MC source).
TdmdaModels make_models(std::size_t input_dim, std::size_t num_classes, double dropout_rate,
                        std::uint64_t seed);

struct Toggles {
    bool feature_adapt = false;
    bool prob_adapt = false;
    bool cmap_adapt = false;
};

struct ObjectiveConfig {
    Toggles toggles;
    double lambda_f = 1.0;  // effective weights, schedule already applied
    double lambda_p = 1.0;
    double lambda_c = 1.0;
    std::size_t mc_samples = 8;
};

/// Minibatch with source rows first, then target rows.
struct Batch {
    ad::Tensor inputs;                  // n x d
    std::vector<int> labels;            // class index per source row
    std::vector<double> domain_labels;  // n entries, 1 = source, 0 = target
    std::size_t n_source = 0;
};

/// Mean cross-entropy of softmax(logits) against integer labels.
ad::Tensor classifier_loss(const ad::Tensor& logits, const std::vector<int>& labels);

/// Mean binary cross-entropy of sigmoid outputs against domain labels.
ad::Tensor domain_bce(const ad::Tensor& d_out, const std::vector<double>& domain_labels);

/// Mean squared error against a detached target map; errors if the target
/// still carries a graph.
ad::Tensor generator_loss(const ad::Tensor& cmap_generated, const ad::Tensor& cmap_target);

double binary_accuracy(const ad::Tensor& d_out, const std::vector<double>& domain_labels);

/// Assembles the joint objective: classifier loss, generator regression,
/// and the active discriminator losses behind gradient reversal, each
/// scaled by its trade-off weight. Minimizing the result trains the
/// discriminators on their own losses while the upstream networks receive
/// the reversed gradient.
std::pair<ad::Tensor, LossReport> total_objective(TdmdaModels& models, nn::ParamBinder& binder,
                                                  const Batch& batch,
                                                  const ObjectiveConfig& config, nn::Rng& rng);

}  // namespace tdmda::losses
