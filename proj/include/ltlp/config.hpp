#pragma once

// Run configuration: flat key=value files with per-dataset defaults.
// Unknown keys are rejected so typos fail loudly.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "ltlp/dataset.hpp"
#include "ltlp/encoder.hpp"
#include "ltlp/sem.hpp"
#include "ltlp/trainer.hpp"

namespace ltlp {

struct RunConfig {
    std::string dataset_name = "cora";
    std::string edges_path;    // empty -> synthetic dataset
    std::string features_path; // empty -> one-hot fallback
    SplitConfig split;
    TrainConfig train;
    FilterConfig filter;
    bool tau_auto = true; // tau from validation Youden sweep unless fixed
    EncoderConfig encoder;
    SbmConfig sbm;
    std::vector<std::size_t> hits_ks{50};
    HardNegativeConfig hardneg;
    std::vector<double> sparsity_ratios{0.1, 0.3, 0.5, 0.7, 0.9};
    std::string out_dir = "out";
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds; // sweep seeds; empty -> {seed}

    std::vector<std::uint64_t> sweep_seeds() const {
        return seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds;
    }

    void validate() const {
        split.validate();
        train.validate();
        filter.validate();
        if (edges_path.empty()) sbm.validate();
        if (encoder.layers < 1 || encoder.hidden < 1)
            throw std::invalid_argument("config: encoder needs layers >= 1 and hidden >= 1");
        if (!(hardneg.discard_fraction >= 0.0 && hardneg.discard_fraction < 1.0))
            throw std::invalid_argument("config: hardneg.discard_fraction must be in [0,1)");
        for (double r : sparsity_ratios)
            if (!(r > 0.0 && r <= 1.0))
                throw std::invalid_argument("config: sparsity ratios must be in (0,1]");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

template <typename T>
inline std::vector<T> parse_list(const std::string& v, const std::string& key) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        try {
            if constexpr (std::is_floating_point_v<T>)
                out.push_back(static_cast<T>(std::stod(cell)));
            else
                out.push_back(static_cast<T>(std::stoull(cell)));
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad list entry for " + key + ": " + cell);
        }
    }
    return out;
}

// Per-dataset defaults: k_percent, varphi, phase epochs, batch size.
// Unknown names fall back to the cora profile.
inline void apply_dataset_profile(RunConfig& cfg, const std::string& name) {
    struct Profile {
        double k, varphi;
        int e1, e2, batch;
    };
    static const std::map<std::string, Profile> profiles = {
        {"cora", {0.6, 0.7, 120, 50, 1024}},
        {"citeseer", {0.4, 0.6, 120, 70, 1024}},
        {"pubmed", {0.8, 0.2, 60, 60, 1024}},
        {"ogb-collab", {0.6, 0.6, 100, 30, 1024}},
        {"ogb-ppa", {0.4, 0.2, 100, 50, 1024}},
    };
    auto it = profiles.find(name);
    const Profile& p = it != profiles.end() ? it->second : profiles.at("cora");
    cfg.filter.k_percent = p.k;
    cfg.train.varphi = p.varphi;
    cfg.train.epochs_pretrain = p.e1;
    cfg.train.epochs_continue = p.e2;
    cfg.train.batch_size = p.batch;
}

} // namespace detail

inline void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
    using detail::parse_bool;
    using detail::parse_list;
    auto to_d = [&](const std::string& v) {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad number for " + key + ": " + v);
        }
    };
    auto to_i = [&](const std::string& v) {
        try {
            return std::stoll(v);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: bad integer for " + key + ": " + v);
        }
    };
    if (key == "dataset.name") {
        cfg.dataset_name = value;
        detail::apply_dataset_profile(cfg, value);
    } else if (key == "dataset.edges") cfg.edges_path = value;
    else if (key == "dataset.features") cfg.features_path = value;
    else if (key == "split.train_frac") cfg.split.train_frac = to_d(value);
    else if (key == "split.val_frac") cfg.split.val_frac = to_d(value);
    else if (key == "split.neg_ratio") cfg.split.neg_ratio = to_d(value);
    else if (key == "train.epochs_pretrain") cfg.train.epochs_pretrain = int(to_i(value));
    else if (key == "train.epochs_continue") cfg.train.epochs_continue = int(to_i(value));
    else if (key == "train.varphi") cfg.train.varphi = to_d(value);
    else if (key == "train.lr") cfg.train.lr = to_d(value);
    else if (key == "train.batch_size") cfg.train.batch_size = int(to_i(value));
    else if (key == "train.center_mode") {
        if (value == "joint") cfg.train.center_mode = CenterMode::joint;
        else if (value == "ema") cfg.train.center_mode = CenterMode::ema;
        else throw std::invalid_argument("config: train.center_mode must be joint|ema");
    } else if (key == "train.center_ema_decay") cfg.train.center_ema_decay = to_d(value);
    else if (key == "filter.tau") {
        if (value == "auto") cfg.tau_auto = true;
        else {
            cfg.tau_auto = false;
            cfg.filter.tau = to_d(value);
        }
    } else if (key == "filter.k_percent") cfg.filter.k_percent = to_d(value);
    else if (key == "filter.tail_only") cfg.filter.tail_only = parse_bool(value, key);
    else if (key == "encoder.layers") cfg.encoder.layers = int(to_i(value));
    else if (key == "encoder.hidden") cfg.encoder.hidden = int(to_i(value));
    else if (key == "encoder.decoder") {
        if (value == "hadamard") cfg.encoder.decoder = DecoderKind::hadamard_linear;
        else if (value == "inner") cfg.encoder.decoder = DecoderKind::inner_product;
        else throw std::invalid_argument("config: encoder.decoder must be hadamard|inner");
    } else if (key == "eval.hits_k") cfg.hits_ks = parse_list<std::size_t>(value, key);
    else if (key == "sbm.blocks") cfg.sbm.num_blocks = std::size_t(to_i(value));
    else if (key == "sbm.block_size") cfg.sbm.block_size = std::size_t(to_i(value));
    else if (key == "sbm.p_in") cfg.sbm.p_in = to_d(value);
    else if (key == "sbm.p_out") cfg.sbm.p_out = to_d(value);
    else if (key == "sbm.feature_dim") cfg.sbm.feature_dim = std::size_t(to_i(value));
    else if (key == "sbm.noise") cfg.sbm.feature_noise = to_d(value);
    else if (key == "hardneg.levels") cfg.hardneg.levels = parse_list<std::size_t>(value, key);
    else if (key == "hardneg.discard_fraction") cfg.hardneg.discard_fraction = to_d(value);
    else if (key == "hardneg.direction") {
        if (value == "highest") cfg.hardneg.direction = VarianceDiscard::highest;
        else if (value == "lowest") cfg.hardneg.direction = VarianceDiscard::lowest;
        else throw std::invalid_argument("config: hardneg.direction must be highest|lowest");
    } else if (key == "sparsity.ratios") cfg.sparsity_ratios = parse_list<double>(value, key);
    else if (key == "out.dir") cfg.out_dir = value;
    else if (key == "seed") cfg.seed = std::uint64_t(to_i(value));
    else if (key == "seeds") cfg.seeds = parse_list<std::uint64_t>(value, key);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

inline RunConfig parse_config_text(std::istream& in, const std::string& origin = "<config>") {
    RunConfig cfg;
    detail::apply_dataset_profile(cfg, cfg.dataset_name);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: missing '=' at " + origin + ":" +
                                        std::to_string(lineno));
        apply_config_entry(cfg, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open " + path);
    return parse_config_text(in, path);
}

} // namespace ltlp
