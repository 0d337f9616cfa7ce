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

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tdmda {

void TrainConfig::validate() const
{
    if (lambda_f < 0.0 || lambda_p < 0.0 || lambda_c < 0.0)
        throw std::invalid_argument("config: lambda weights must be nonnegative");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw std::invalid_argument("config: dropout_rate must be in [0, 1)");
    if (cmap_adapt && mc_samples < 1)
        throw std::invalid_argument("config: mc_samples must be >= 1 when cmap_adapt is on");
    if (mc_samples < 1) throw std::invalid_argument("config: mc_samples must be >= 1");
    if (batch_size < 2) throw std::invalid_argument("config: batch_size must be >= 2");
    if (epochs == 0) throw std::invalid_argument("config: epochs must be >= 1");
    if (eval_every == 0) throw std::invalid_argument("config: eval_every must be >= 1");
    if (eval_fraction <= 0.0 || eval_fraction >= 1.0)
        throw std::invalid_argument("config: eval_fraction must be in (0, 1)");
}

Regime regime_from_string(const std::string& s)
{
    if (s == "source-only") return Regime::SourceOnly;
    if (s == "dann") return Regime::Dann;
    if (s == "pmda") return Regime::Pmda;
    if (s == "cmda") return Regime::Cmda;
    if (s == "tdmda") return Regime::Tdmda;
    throw std::invalid_argument("unknown regime '" + s
                                + "' (expected source-only|dann|pmda|cmda|tdmda)");
}

std::string to_string(Regime r)
{
    switch (r) {
        case Regime::SourceOnly: return "source-only";
        case Regime::Dann: return "dann";
        case Regime::Pmda: return "pmda";
        case Regime::Cmda: return "cmda";
        case Regime::Tdmda: return "tdmda";
    }
    return "?";
}

void apply_regime(TrainConfig& cfg, Regime r)
{
    cfg.feature_adapt = r != Regime::SourceOnly;
    cfg.prob_adapt = r == Regime::Pmda || r == Regime::Tdmda;
    cfg.cmap_adapt = r == Regime::Cmda || r == Regime::Tdmda;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

const char* const kKeys[] = {
    "lambda_f",     "lambda_p",      "lambda_c",   "mc_samples",    "dropout_rate",
    "learning_rate", "momentum",     "epochs",     "batch_size",    "seed",
    "feature_adapt", "prob_adapt",   "cmap_adapt", "lambda_schedule", "ramp_gamma",
    "eval_every",   "eval_fraction", "optimizer",
};

double as_double(const std::map<std::string, std::string>& kv, const std::string& key)
{
    return std::stod(kv.at(key));
}

std::size_t as_size(const std::map<std::string, std::string>& kv, const std::string& key)
{
    return static_cast<std::size_t>(std::stoull(kv.at(key)));
}

bool as_bool(const std::map<std::string, std::string>& kv, const std::string& key)
{
    const auto& v = kv.at(key);
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    throw std::invalid_argument("config: bad boolean '" + v + "' for key " + key);
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

TrainConfig parse_config(const std::string& text)
{
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == '[') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(line_no)
                                        + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        bool known = false;
        for (const char* k : kKeys)
            if (key == k) known = true;
        if (!known) throw std::invalid_argument("config: unknown key '" + key + "'");
        kv[key] = val;
    }
    for (const char* k : kKeys)
        if (!kv.count(k)) throw std::invalid_argument("config: missing key '" + std::string(k) + "'");

    TrainConfig cfg;
    cfg.lambda_f = as_double(kv, "lambda_f");
    cfg.lambda_p = as_double(kv, "lambda_p");
    cfg.lambda_c = as_double(kv, "lambda_c");
    cfg.mc_samples = as_size(kv, "mc_samples");
    cfg.dropout_rate = as_double(kv, "dropout_rate");
    cfg.learning_rate = as_double(kv, "learning_rate");
    cfg.momentum = as_double(kv, "momentum");
    cfg.epochs = as_size(kv, "epochs");
    cfg.batch_size = as_size(kv, "batch_size");
    cfg.seed = std::stoull(kv.at("seed"));
    cfg.feature_adapt = as_bool(kv, "feature_adapt");
    cfg.prob_adapt = as_bool(kv, "prob_adapt");
    cfg.cmap_adapt = as_bool(kv, "cmap_adapt");
    const std::string& sched = kv.at("lambda_schedule");
    if (sched == "constant")
        cfg.lambda_schedule = ScheduleKind::Constant;
    else if (sched == "rampup")
        cfg.lambda_schedule = ScheduleKind::RampUp;
    else
        throw std::invalid_argument("config: bad lambda_schedule '" + sched
                                    + "' (expected constant|rampup)");
    cfg.ramp_gamma = as_double(kv, "ramp_gamma");
    cfg.eval_every = as_size(kv, "eval_every");
    cfg.eval_fraction = as_double(kv, "eval_fraction");
    const std::string& opt = kv.at("optimizer");
    if (opt == "sgd")
        cfg.optimizer = OptimizerKind::Sgd;
    else if (opt == "adam")
        cfg.optimizer = OptimizerKind::Adam;
    else
        throw std::invalid_argument("config: bad optimizer '" + opt + "' (expected sgd|adam)");
    cfg.validate();
    return cfg;
}

TrainConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config(os.str());
}

std::string dump_config(const TrainConfig& cfg)
{
    std::ostringstream os;
    os << "lambda_f = " << fmt(cfg.lambda_f) << '\n';
    os << "lambda_p = " << fmt(cfg.lambda_p) << '\n';
    os << "lambda_c = " << fmt(cfg.lambda_c) << '\n';
    os << "mc_samples = " << cfg.mc_samples << '\n';
    os << "dropout_rate = " << fmt(cfg.dropout_rate) << '\n';
    os << "learning_rate = " << fmt(cfg.learning_rate) << '\n';
    os << "momentum = " << fmt(cfg.momentum) << '\n';
    os << "epochs = " << cfg.epochs << '\n';
    os << "batch_size = " << cfg.batch_size << '\n';
    os << "seed = " << cfg.seed << '\n';
    os << "feature_adapt = " << (cfg.feature_adapt ? "true" : "false") << '\n';
    os << "prob_adapt = " << (cfg.prob_adapt ? "true" : "false") << '\n';
    os << "cmap_adapt = " << (cfg.cmap_adapt ? "true" : "false") << '\n';
    os << "lambda_schedule = "
       << (cfg.lambda_schedule == ScheduleKind::Constant ? "constant" : "rampup") << '\n';
    os << "ramp_gamma = " << fmt(cfg.ramp_gamma) << '\n';
    os << "eval_every = " << cfg.eval_every << '\n';
    os << "eval_fraction = " << fmt(cfg.eval_fraction) << '\n';
    os << "optimizer = " << (cfg.optimizer == OptimizerKind::Sgd ? "sgd" : "adam") << '\n';
    return os.str();
}

}  // namespace tdmda
