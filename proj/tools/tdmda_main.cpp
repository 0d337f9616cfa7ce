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

#include "tdmda/config.hpp"
#include "tdmda/data.hpp"
#include "tdmda/io.hpp"
#include "tdmda/trainer.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace {

constexpr const char* kVersion = "tdmda 0.1.0";

// Relative output paths resolve against $TDMDA_OUT_ROOT when it is set.
std::string out_path(const std::string& path)
{
    const char* root = std::getenv("TDMDA_OUT_ROOT");
    if (root == nullptr || path.empty() || std::filesystem::path(path).is_absolute())
        return path;
    return (std::filesystem::path(root) / path).string();
}

std::vector<double> parse_doubles(const std::string& s, char sep = ',')
{
    std::vector<double> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, sep)) out.push_back(std::stod(item));
    return out;
}

std::vector<std::vector<double>> parse_means(const std::string& s)
{
    std::vector<std::vector<double>> out;
    std::istringstream is(s);
    std::string group;
    while (std::getline(is, group, ';')) out.push_back(parse_doubles(group));
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s)
{
    std::vector<std::uint64_t> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) out.push_back(std::stoull(item));
    return out;
}

struct TrainArgs {
    std::string config_path;
    std::string source_path;
    std::string target_path;
    std::string out_dir;
    std::string regime;
    std::int64_t seed = -1;
    bool quiet = false;
};

tdmda::TrainConfig resolve_config(const TrainArgs& args)
{
    tdmda::TrainConfig cfg = tdmda::load_config(args.config_path);
    if (!args.regime.empty()) tdmda::apply_regime(cfg, tdmda::regime_from_string(args.regime));
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    cfg.validate();
    return cfg;
}

int cmd_train(const TrainArgs& args)
{
    const tdmda::TrainConfig cfg = resolve_config(args);
    const auto source = tdmda::data::load_csv(args.source_path);
    const auto target = tdmda::data::load_csv(args.target_path);

    const std::filesystem::path dir(out_path(args.out_dir));
    std::filesystem::create_directories(dir);
    const std::string metrics_path = (dir / "metrics.jsonl").string();
    const std::string ckpt_path = (dir / "checkpoint.json").string();

    // Run manifest first: enough to replay the run exactly.
    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["seed"] = cfg.seed;
    manifest["config"] = tdmda::dump_config(cfg);
    manifest["source"] = nlohmann::json::parse(tdmda::data::manifest_json(source));
    manifest["target"] = nlohmann::json::parse(tdmda::data::manifest_json(target));
    manifest["outputs"] = {{"metrics", metrics_path}, {"checkpoint", ckpt_path}};
    tdmda::io::atomic_write((dir / "manifest.json").string(), manifest.dump(2) + "\n");

    auto result = tdmda::train::train(cfg, source, target);

    tdmda::io::atomic_write(metrics_path, tdmda::io::metrics_jsonl(result.history));
    tdmda::io::Checkpoint ckpt{std::move(result.models), result.standardizer, source.dim,
                               result.num_classes, cfg.dropout_rate};
    tdmda::io::save_checkpoint(ckpt, ckpt_path);

    if (!args.quiet) {
        const auto& m = result.history.back();
        std::cout << "final step " << m.step << ": source_acc=" << m.source_acc
                  << " target_acc=" << m.target_acc
                  << " target_entropy=" << m.mean_entropy_target << " (" << m.wall_ms
                  << " ms)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adversarial domain adaptation lab: feature, probability and certainty-map "
                 "distribution matching on synthetic datasets"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // --- config ---------------------------------------------------------
    auto* config_cmd = app.add_subcommand("config", "Inspect configuration");
    bool dump_defaults = false;
    config_cmd->add_flag("--dump-defaults", dump_defaults, "Print the default configuration");

    // --- gen ------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "Generate or transform datasets");
    gen->require_subcommand(1);

    auto* moons = gen->add_subcommand("two-moons", "Two interleaving half-circles");
    std::size_t moons_n = 1000;
    double moons_noise = 0.1;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    moons->add_option("--n", moons_n, "Total point count (even)");
    moons->add_option("--noise", moons_noise, "Gaussian noise sigma");
    moons->add_option("--seed", gen_seed, "RNG seed");
    moons->add_option("--out", gen_out, "Output CSV")->required();

    auto* blobs = gen->add_subcommand("blobs", "Gaussian class clusters");
    std::size_t blobs_k = 3, blobs_per = 200;
    double blobs_cov = 0.5;
    std::string blobs_means = "0,0;3,0;0,3";
    blobs->add_option("--classes", blobs_k, "Number of classes");
    blobs->add_option("--per-class", blobs_per, "Points per class");
    blobs->add_option("--cov", blobs_cov, "Per-coordinate noise sigma");
    blobs->add_option("--means", blobs_means, "Cluster means, e.g. \"0,0;3,0;0,3\"");
    blobs->add_option("--seed", gen_seed, "RNG seed");
    blobs->add_option("--out", gen_out, "Output CSV")->required();

    auto* rot = gen->add_subcommand("rotate", "Rotate a 2-d dataset into a target domain");
    std::string rot_in;
    double rot_angle = 35.0;
    rot->add_option("--in", rot_in, "Input CSV")->required();
    rot->add_option("--angle", rot_angle, "Rotation angle in degrees");
    rot->add_option("--out", gen_out, "Output CSV")->required();

    auto* shift = gen->add_subcommand("shift", "Translate blobs / swap cluster centers");
    std::string shift_in, shift_translate = "0,0";
    double shift_swap = 0.0;
    shift->add_option("--in", shift_in, "Input CSV")->required();
    shift->add_option("--translate", shift_translate, "Translation vector, e.g. \"1,0\"");
    shift->add_option("--swap-fraction", shift_swap, "Fraction of class centers to swap");
    shift->add_option("--out", gen_out, "Output CSV")->required();

    // --- train ----------------------------------------------------------
    TrainArgs targs;
    auto* train_cmd = app.add_subcommand("train", "Train one regime");
    train_cmd->add_option("--config", targs.config_path, "Config file")->required();
    train_cmd->add_option("--source", targs.source_path, "Labeled source CSV")->required();
    train_cmd->add_option("--target", targs.target_path, "Target CSV")->required();
    train_cmd->add_option("--out", targs.out_dir, "Output directory")->required();
    train_cmd->add_option("--regime", targs.regime,
                          "source-only|dann|pmda|cmda|tdmda (overrides config toggles)");
    train_cmd->add_option("--seed", targs.seed, "Seed override");
    train_cmd->add_flag("--quiet", targs.quiet, "Suppress progress output");

    // --- ablate ---------------------------------------------------------
    TrainArgs aargs;
    std::string ablate_seeds, summary_out;
    auto* ablate_cmd = app.add_subcommand("ablate", "Run all five regimes over seeds");
    ablate_cmd->add_option("--config", aargs.config_path, "Config file")->required();
    ablate_cmd->add_option("--source", aargs.source_path, "Labeled source CSV")->required();
    ablate_cmd->add_option("--target", aargs.target_path, "Target CSV")->required();
    ablate_cmd->add_option("--seeds", ablate_seeds, "Comma-separated seeds")->required();
    ablate_cmd->add_option("--out", aargs.out_dir, "Output CSV (per-run rows)")->required();
    ablate_cmd->add_option("--summary-out", summary_out, "Optional median/IQR summary CSV");
    ablate_cmd->add_flag("--quiet", aargs.quiet, "Suppress progress output");

    // --- export ---------------------------------------------------------
    std::string exp_ckpt, exp_data, exp_what, exp_out;
    std::size_t exp_T = 8;
    std::uint64_t exp_seed = 0;
    auto* export_cmd = app.add_subcommand("export", "Export per-sample diagnostics");
    export_cmd->add_option("--checkpoint", exp_ckpt, "Checkpoint JSON")->required();
    export_cmd->add_option("--data", exp_data, "Dataset CSV")->required();
    export_cmd->add_option("--what", exp_what, "features|probs|cmaps|uncertainty")->required();
    export_cmd->add_option("--out", exp_out, "Output CSV")->required();
    export_cmd->add_option("--mc-samples", exp_T, "MC sample count");
    export_cmd->add_option("--seed", exp_seed, "MC seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (config_cmd->parsed()) {
            if (dump_defaults)
                std::cout << tdmda::dump_config(tdmda::TrainConfig{});
            else
                std::cout << config_cmd->help();
            return 0;
        }
        if (moons->parsed()) {
            tdmda::data::save_csv(tdmda::data::gen_two_moons(moons_n, moons_noise, gen_seed),
                                  out_path(gen_out));
            return 0;
        }
        if (blobs->parsed()) {
            tdmda::data::save_csv(
                tdmda::data::gen_gaussian_blobs(blobs_k, blobs_per, parse_means(blobs_means),
                                                blobs_cov, gen_seed),
                out_path(gen_out));
            return 0;
        }
        if (rot->parsed()) {
            tdmda::data::save_csv(tdmda::data::rotate(tdmda::data::load_csv(rot_in), rot_angle),
                                  out_path(gen_out));
            return 0;
        }
        if (shift->parsed()) {
            tdmda::data::save_csv(
                tdmda::data::shift_blobs(tdmda::data::load_csv(shift_in),
                                         parse_doubles(shift_translate), shift_swap),
                out_path(gen_out));
            return 0;
        }
        if (train_cmd->parsed()) return cmd_train(targs);
        if (ablate_cmd->parsed()) {
            const tdmda::TrainConfig cfg = resolve_config(aargs);
            const auto source = tdmda::data::load_csv(aargs.source_path);
            const auto target = tdmda::data::load_csv(aargs.target_path);
            const auto seeds = parse_seeds(ablate_seeds);
            auto result = tdmda::train::run_ablation(cfg, source, target, seeds);
            tdmda::io::atomic_write(out_path(aargs.out_dir),
                                    tdmda::io::ablation_csv(result.rows));
            if (!summary_out.empty())
                tdmda::io::atomic_write(out_path(summary_out),
                                        tdmda::io::ablation_summary_csv(result.summary));
            if (!aargs.quiet) std::cout << tdmda::io::ablation_summary_csv(result.summary);
            return 0;
        }
        if (export_cmd->parsed()) {
            auto ckpt = tdmda::io::load_checkpoint(exp_ckpt);
            const auto ds = tdmda::data::load_csv(exp_data);
            const auto what = tdmda::io::export_kind_from_string(exp_what);
            tdmda::io::atomic_write(out_path(exp_out),
                                    tdmda::io::export_csv(ckpt, ds, what, exp_T, exp_seed));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
