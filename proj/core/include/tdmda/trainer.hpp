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

#include "tdmda/config.hpp"
#include "tdmda/data.hpp"
#include "tdmda/losses.hpp"

#include <string>
#include <vector>

namespace tdmda::train {

struct Metrics {
    std::size_t step = 0;
    double source_acc = 0.0;
    double target_acc = 0.0;
    double mean_entropy_source = 0.0;  // nats
    double mean_entropy_target = 0.0;
    losses::LossReport loss;
    double wall_ms = 0.0;  // measured, kept out of serialized metrics
};

struct TrainResult {
    losses::TdmdaModels models;
    data::Standardizer standardizer;
    std::vector<Metrics> history;
    std::size_t num_classes = 0;
};

/// Constant -> 1; RampUp(gamma) -> 2/(1+exp(-gamma*progress)) - 1.
double lambda_schedule(ScheduleKind kind, double gamma, double progress);

/// Accuracy from a deterministic argmax pass; mean predictive entropy
/// from T stochastic classifier passes. Inputs must already be
/// standardized and labeled.
std::pair<double, double> evaluate(losses::TdmdaModels& models, const data::DomainDataset& ds,
                                   std::size_t mc_samples, std::uint64_t seed);

/// End-to-end seeded run. Source must be labeled; target labels, when
/// present, are quarantined into the held-out eval split and never seen
/// by the optimization path.
TrainResult train(const TrainConfig& config, const data::DomainDataset& source,
                  const data::DomainDataset& target);

struct AblationRow {
    std::string regime;
    std::uint64_t seed = 0;
    double target_acc = 0.0;
    double source_acc = 0.0;
    double target_entropy = 0.0;
    double source_entropy = 0.0;
};

struct AblationSummary {
    std::string regime;
    double median_target_acc = 0.0;
    double iqr_target_acc = 0.0;
    double median_target_entropy = 0.0;
    double iqr_target_entropy = 0.0;
};

struct AblationResult {
    std::vector<AblationRow> rows;          // |regimes| x |seeds|, fixed order
    std::vector<AblationSummary> summary;   // one per regime
};

/// Runs {source-only, dann, pmda, cmda, tdmda} x seeds.
AblationResult run_ablation(const TrainConfig& base_config, const data::DomainDataset& source,
                            const data::DomainDataset& target,
                            const std::vector<std::uint64_t>& seeds);

double median(std::vector<double> values);
double iqr(std::vector<double> values);

}  // namespace tdmda::train
