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

#include "tdmda/data.hpp"
#include "tdmda/losses.hpp"
#include "tdmda/trainer.hpp"

#include <string>

namespace tdmda::io {

/// Write-to-temp then rename; no partial file on failure.
void atomic_write(const std::string& path, const std::string& content);

struct Checkpoint {
    losses::TdmdaModels models;
    data::Standardizer standardizer;
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    double dropout_rate = 0.0;
};

/// JSON checkpoint: metadata, standardizer, and a flat list of named
/// parameter arrays with shapes (layout documented in the README).
std::string checkpoint_json(Checkpoint& ckpt);
void save_checkpoint(Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// One JSON object per eval point; wall-clock time is excluded so equal
/// runs serialize to identical bytes.
std::string metrics_jsonl(const std::vector<train::Metrics>& history);

/// Fixed column order: regime, seed, target_acc, source_acc,
/// target_entropy, source_entropy.
std::string ablation_csv(const std::vector<train::AblationRow>& rows);
std::string ablation_summary_csv(const std::vector<train::AblationSummary>& summary);

enum class ExportKind { Features, Probs, Cmaps, Uncertainty };
ExportKind export_kind_from_string(const std::string& s);

/// Per-sample diagnostics as CSV. The dataset is standardized with the
/// checkpoint's source statistics before the forward pass.
std::string export_csv(Checkpoint& ckpt, const data::DomainDataset& ds, ExportKind what,
                       std::size_t mc_samples, std::uint64_t seed);

}  // namespace tdmda::io
