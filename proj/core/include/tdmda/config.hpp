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

#include <cstdint>
#include <string>

namespace tdmda {

enum class ScheduleKind { Constant, RampUp };
enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
    double lambda_f = 1.0;
    double lambda_p = 1.0;
    double lambda_c = 1.0;
    std::size_t mc_samples = 8;
    double dropout_rate = 0.5;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t epochs = 300;
    std::size_t batch_size = 64;  // total per step, half source, half target
    std::uint64_t seed = 0;
    bool feature_adapt = true;
    bool prob_adapt = true;
    bool cmap_adapt = true;
    ScheduleKind lambda_schedule = ScheduleKind::RampUp;
    double ramp_gamma = 10.0;
    std::size_t eval_every = 100;
    double eval_fraction = 0.2;
    OptimizerKind optimizer = OptimizerKind::Sgd;

    void validate() const;  // throws on out-of-range values
};

enum class Regime { SourceOnly, Dann, Pmda, Cmda, Tdmda };

Regime regime_from_string(const std::string& s);
std::string to_string(Regime r);
void apply_regime(TrainConfig& cfg, Regime r);

/// Flat key = value text; every key must be present.
TrainConfig parse_config(const std::string& text);
TrainConfig load_config(const std::string& path);
std::string dump_config(const TrainConfig& cfg);

}  // namespace tdmda
