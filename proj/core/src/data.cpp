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

#include "tdmda/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tdmda::data {

namespace {

std::string fmt17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::size_t DomainDataset::num_classes() const
{
    int mx = -1;
    for (const auto& l : labels)
        if (l) mx = std::max(mx, *l);
    return static_cast<std::size_t>(mx + 1);
}

std::pair<DomainDataset, DomainDataset> split(const DomainDataset& ds, const SplitSpec& spec)
{
    if (std::abs(spec.train_fraction + spec.eval_fraction - 1.0) > 1e-9)
        throw std::invalid_argument("split: fractions must sum to 1");
    std::vector<std::size_t> idx(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) idx[i] = i;
    std::mt19937_64 rng(spec.seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_train =
        static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(ds.n)));

    auto take = [&](std::size_t begin, std::size_t end, const char* suffix) {
        DomainDataset out;
        out.domain = ds.domain;
        out.name = ds.name + suffix;
        out.dim = ds.dim;
        out.n = end - begin;
        out.inputs.reserve(out.n * ds.dim);
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = idx[i];
            out.inputs.insert(out.inputs.end(), ds.inputs.begin() + static_cast<std::ptrdiff_t>(r * ds.dim),
                              ds.inputs.begin() + static_cast<std::ptrdiff_t>((r + 1) * ds.dim));
            out.labels.push_back(ds.labels[r]);
        }
        return out;
    };
    return {take(0, n_train, "-train"), take(n_train, ds.n, "-eval")};
}

DomainDataset gen_two_moons(std::size_t n, double noise_sigma, std::uint64_t seed)
{
    if (n % 2 != 0) throw std::invalid_argument("gen_two_moons: n must be even");
    const std::size_t half = n / 2;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);

    DomainDataset ds;
    ds.name = "two-moons";
    ds.domain = Domain::Source;
    ds.dim = 2;
    ds.n = n;
    ds.inputs.reserve(2 * n);
    for (std::size_t i = 0; i < half; ++i) {
        const double t = std::numbers::pi * static_cast<double>(i)
                         / static_cast<double>(half > 1 ? half - 1 : 1);
        double x = std::cos(t), y = std::sin(t);
        if (noise_sigma > 0.0) {
            x += noise(rng);
            y += noise(rng);
        }
        ds.inputs.push_back(x);
        ds.inputs.push_back(y);
        ds.labels.emplace_back(0);
    }
    for (std::size_t i = 0; i < half; ++i) {
        const double t = std::numbers::pi * static_cast<double>(i)
                         / static_cast<double>(half > 1 ? half - 1 : 1);
        double x = 1.0 - std::cos(t), y = 0.5 - std::sin(t);
        if (noise_sigma > 0.0) {
            x += noise(rng);
            y += noise(rng);
        }
        ds.inputs.push_back(x);
        ds.inputs.push_back(y);
        ds.labels.emplace_back(1);
    }
    return ds;
}

DomainDataset rotate(const DomainDataset& ds, double angle_degrees)
{
    if (ds.dim != 2) throw std::invalid_argument("rotate: dataset must be 2-d");
    const double a = angle_degrees * std::numbers::pi / 180.0;
    const double c = std::cos(a), s = std::sin(a);
    DomainDataset out = ds;
    out.domain = Domain::Target;
    out.name = ds.name + "-rot" + std::to_string(angle_degrees);
    for (std::size_t i = 0; i < ds.n; ++i) {
        const double x = ds.at(i, 0), y = ds.at(i, 1);
        out.inputs[i * 2] = c * x - s * y;
        out.inputs[i * 2 + 1] = s * x + c * y;
    }
    return out;
}

DomainDataset gen_gaussian_blobs(std::size_t k_classes, std::size_t n_per_class,
                                 const std::vector<std::vector<double>>& means,
                                 double cov_scale, std::uint64_t seed)
{
    if (means.size() != k_classes)
        throw std::invalid_argument("gen_gaussian_blobs: got " + std::to_string(means.size())
                                    + " means for " + std::to_string(k_classes) + " classes");
    if (k_classes == 0 || n_per_class == 0)
        throw std::invalid_argument("gen_gaussian_blobs: empty dataset requested");
    const std::size_t dim = means[0].size();
    for (const auto& m : means)
        if (m.size() != dim)
            throw std::invalid_argument("gen_gaussian_blobs: means have mixed dimensions");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, cov_scale);
    DomainDataset ds;
    ds.name = "blobs";
    ds.domain = Domain::Source;
    ds.dim = dim;
    ds.n = k_classes * n_per_class;
    ds.inputs.reserve(ds.n * dim);
    for (std::size_t k = 0; k < k_classes; ++k)
        for (std::size_t i = 0; i < n_per_class; ++i) {
            for (std::size_t d = 0; d < dim; ++d) ds.inputs.push_back(means[k][d] + noise(rng));
            ds.labels.emplace_back(static_cast<int>(k));
        }
    return ds;
}

DomainDataset shift_blobs(const DomainDataset& ds, const std::vector<double>& translation,
                          double class_swap_fraction)
{
    if (translation.size() != ds.dim)
        throw std::invalid_argument("shift_blobs: translation dimension mismatch");
    if (class_swap_fraction < 0.0 || class_swap_fraction > 1.0)
        throw std::invalid_argument("shift_blobs: swap fraction must be in [0, 1]");

    DomainDataset out = ds;
    out.domain = Domain::Target;
    out.name = ds.name + "-shift";
    for (std::size_t i = 0; i < ds.n; ++i)
        for (std::size_t d = 0; d < ds.dim; ++d) out.inputs[i * ds.dim + d] += translation[d];

    const std::size_t k = ds.num_classes();
    const std::size_t n_swap =
        static_cast<std::size_t>(std::llround(class_swap_fraction * static_cast<double>(k)));
    if (n_swap < 2) return out;

    // Empirical class centers, swapped pairwise among the first n_swap classes.
    std::vector<std::vector<double>> center(k, std::vector<double>(ds.dim, 0.0));
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < ds.n; ++i) {
        if (!ds.labels[i]) continue;
        const auto c = static_cast<std::size_t>(*ds.labels[i]);
        for (std::size_t d = 0; d < ds.dim; ++d) center[c][d] += ds.at(i, d);
        ++count[c];
    }
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t d = 0; d < ds.dim; ++d)
            if (count[c] > 0) center[c][d] /= static_cast<double>(count[c]);

    for (std::size_t pair = 0; pair + 1 < n_swap; pair += 2) {
        const std::size_t a = pair, b = pair + 1;
        for (std::size_t i = 0; i < ds.n; ++i) {
            if (!ds.labels[i]) continue;
            const auto c = static_cast<std::size_t>(*ds.labels[i]);
            if (c != a && c != b) continue;
            const std::size_t other = (c == a) ? b : a;
            for (std::size_t d = 0; d < ds.dim; ++d)
                out.inputs[i * ds.dim + d] += center[other][d] - center[c][d];
        }
    }
    return out;
}

Standardizer Standardizer::fit(const DomainDataset& source)
{
    Standardizer st;
    st.mean.assign(source.dim, 0.0);
    st.stddev.assign(source.dim, 0.0);
    for (std::size_t i = 0; i < source.n; ++i)
        for (std::size_t d = 0; d < source.dim; ++d) st.mean[d] += source.at(i, d);
    for (std::size_t d = 0; d < source.dim; ++d) st.mean[d] /= static_cast<double>(source.n);
    for (std::size_t i = 0; i < source.n; ++i)
        for (std::size_t d = 0; d < source.dim; ++d) {
            const double diff = source.at(i, d) - st.mean[d];
            st.stddev[d] += diff * diff;
        }
    for (std::size_t d = 0; d < source.dim; ++d)
        st.stddev[d] = std::max(std::sqrt(st.stddev[d] / static_cast<double>(source.n)), 1e-12);
    return st;
}

DomainDataset Standardizer::apply(const DomainDataset& ds) const
{
    if (ds.dim != mean.size())
        throw std::invalid_argument("Standardizer: dimension mismatch");
    DomainDataset out = ds;
    for (std::size_t i = 0; i < ds.n; ++i)
        for (std::size_t d = 0; d < ds.dim; ++d)
            out.inputs[i * ds.dim + d] = (ds.at(i, d) - mean[d]) / stddev[d];
    return out;
}

void save_csv(const DomainDataset& ds, const std::string& path)
{
    std::ostringstream os;
    for (std::size_t d = 0; d < ds.dim; ++d) os << 'x' << d << ',';
    os << "label,domain\n";
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t d = 0; d < ds.dim; ++d) os << fmt17(ds.at(i, d)) << ',';
        if (ds.labels[i]) os << *ds.labels[i];
        os << ',' << (ds.domain == Domain::Source ? "source" : "target") << '\n';
    }
    // Write-to-temp then rename so failures leave no partial file.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("save_csv: cannot open " + tmp);
        f << os.str();
        if (!f) throw std::runtime_error("save_csv: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("save_csv: cannot rename " + tmp + " to " + path);
}

DomainDataset load_csv(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("load_csv: empty file " + path);

    auto split_fields = [](const std::string& s) {
        std::vector<std::string> fields;
        std::string cur;
        std::istringstream is(s);
        while (std::getline(is, cur, ',')) fields.push_back(cur);
        if (!s.empty() && s.back() == ',') fields.emplace_back();
        return fields;
    };

    const auto header = split_fields(line);
    if (header.size() < 3)
        throw std::runtime_error("load_csv: malformed header in " + path);
    const std::size_t dim = header.size() - 2;
    for (std::size_t d = 0; d < dim; ++d)
        if (header[d] != "x" + std::to_string(d))
            throw std::runtime_error("load_csv: missing column x" + std::to_string(d) + " in "
                                     + path);
    if (header[dim] != "label")
        throw std::runtime_error("load_csv: missing column label in " + path);
    if (header[dim + 1] != "domain")
        throw std::runtime_error("load_csv: missing column domain in " + path);

    DomainDataset ds;
    ds.dim = dim;
    ds.name = path;
    bool domain_set = false;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != dim + 2)
            throw std::runtime_error("load_csv: line " + std::to_string(line_no) + ": expected "
                                     + std::to_string(dim + 2) + " fields, got "
                                     + std::to_string(fields.size()));
        for (std::size_t d = 0; d < dim; ++d) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(fields[d], &pos);
            } catch (const std::exception&) {
                throw std::runtime_error("load_csv: line " + std::to_string(line_no)
                                         + ": bad number '" + fields[d] + "'");
            }
            if (pos != fields[d].size())
                throw std::runtime_error("load_csv: line " + std::to_string(line_no)
                                         + ": bad number '" + fields[d] + "'");
            ds.inputs.push_back(v);
        }
        if (fields[dim].empty())
            ds.labels.emplace_back(std::nullopt);
        else {
            try {
                ds.labels.emplace_back(std::stoi(fields[dim]));
            } catch (const std::exception&) {
                throw std::runtime_error("load_csv: line " + std::to_string(line_no)
                                         + ": bad label '" + fields[dim] + "'");
            }
        }
        const std::string& dom = fields[dim + 1];
        Domain d = Domain::Source;
        if (dom == "source")
            d = Domain::Source;
        else if (dom == "target")
            d = Domain::Target;
        else
            throw std::runtime_error("load_csv: line " + std::to_string(line_no)
                                     + ": bad domain '" + dom + "'");
        if (!domain_set) {
            ds.domain = d;
            domain_set = true;
        }
        ++ds.n;
    }
    return ds;
}

std::string manifest_json(const DomainDataset& ds)
{
    nlohmann::json j;
    j["name"] = ds.name;
    j["n"] = ds.n;
    j["d"] = ds.dim;
    j["k"] = ds.num_classes();
    j["domain"] = ds.domain == Domain::Source ? "source" : "target";
    return j.dump();
}

}  // namespace tdmda::data
