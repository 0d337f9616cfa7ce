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
#include <optional>
#include <string>
#include <vector>

namespace tdmda::data {

enum class Domain { Source, Target };

struct DomainDataset {
    std::vector<double> inputs;  // n x dim, row-major
    std::vector<std::optional<int>> labels;  // one entry per row; nullopt = unlabeled
    Domain domain = Domain::Source;
    std::string name;
    std::size_t n = 0;
    std::size_t dim = 0;

    double at(std::size_t row, std::size_t col) const { return inputs[row * dim + col]; }
    std::size_t num_classes() const;
};

struct SplitSpec {
    double train_fraction = 0.8;
    double eval_fraction = 0.2;
    std::uint64_t seed = 0;
};

/// Shuffled row split into (train, eval) per the spec's fractions.
std::pair<DomainDataset, DomainDataset> split(const DomainDataset& ds, const SplitSpec& spec);

/// Two interleaving half-circles of radius 1, n/2 points per class,
/// isotropic Gaussian noise. Deterministic per seed.
DomainDataset gen_two_moons(std::size_t n, double noise_sigma, std::uint64_t seed);

/// Rotates a 2-d dataset about the origin and marks it as target domain.
DomainDataset rotate(const DomainDataset& ds, double angle_degrees);

DomainDataset gen_gaussian_blobs(std::size_t k_classes, std::size_t n_per_class,
                                 const std::vector<std::vector<double>>& means,
                                 double cov_scale, std::uint64_t seed);

/// Translates all inputs and swaps the empirical cluster centers of the
/// first round(fraction * k) classes pairwise. Marks the result as target.
DomainDataset shift_blobs(const DomainDataset& ds, const std::vector<double>& translation,
                          double class_swap_fraction);

/// Per-dimension standardization fit on the source only.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(const DomainDataset& source);
    DomainDataset apply(const DomainDataset& ds) const;
};

/// CSV with header "x0,...,x{d-1},label,domain"; empty label = unlabeled.
DomainDataset load_csv(const std::string& path);
void save_csv(const DomainDataset& ds, const std::string& path);

/// Dataset manifest as a JSON string (name, n, d, k, domain).
std::string manifest_json(const DomainDataset& ds);

}  // namespace tdmda::data
