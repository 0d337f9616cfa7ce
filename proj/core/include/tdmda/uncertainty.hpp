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

#include <vector>

namespace tdmda::unc {

/// Floor for masked-out coordinates: large enough in magnitude that a
/// max-subtracted softmax gives them exactly zero weight, small enough
/// not to overflow exp.
inline constexpr double kMaskFloor = -1e30;

/// Probabilities are clamped to [kProbFloor, 1] before any log.
inline constexpr double kProbFloor = 1e-12;

/// Per-sample uncertainty artifacts gathered for export.
struct CertaintyBundle {
    std::size_t n = 0;
    std::size_t mc_samples = 0;
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    std::vector<double> probs_mc;        // n x T x num_classes, row-major
    std::vector<double> entropy;         // n, in nats
    std::vector<double> cmap_target;     // n x feature_dim
    std::vector<double> cmap_generated;  // n x feature_dim
    double mask_floor_b = kMaskFloor;
};

struct McResult {
    std::vector<std::vector<double>> probs_per_pass;  // T entries of n x num_classes
    ad::Tensor entropy;                               // (n), live graph back to f
};

/// T stochastic-dropout classifier passes on fixed features; entropy is
/// the mean over passes of the per-pass entropy, differentiable in f.
McResult mc_entropy(nn::Mlp& classifier, nn::ParamBinder& binder, const ad::Tensor& f,
                    std::size_t mc_samples, nn::Rng& rng);

/// Certainty activation map: mask f * (-dU/df) below zero to the floor,
/// softmax per sample over the feature dimension, shift by 1. Detached.
ad::Tensor certainty_map(const ad::Tensor& f, const ad::Tensor& entropy_u);

/// Generated map 1 + softmax(G(concat(logits, f))); same codomain as the
/// target map, with a live graph into G, the classifier and the extractor.
ad::Tensor generate_cmap(nn::Mlp& gen, nn::ParamBinder& binder, const ad::Tensor& logits,
                         const ad::Tensor& f);

}  // namespace tdmda::unc
