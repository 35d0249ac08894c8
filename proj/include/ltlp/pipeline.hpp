#pragma once

// Orchestration of the full training pipeline (pretrain -> candidate
// generation -> score/variance filter -> augment -> continue-train ->
// evaluate) plus the analysis, hard-negative and sparsity experiment drivers
// behind the CLI. Every randomized stage derives its seed from the run seed
// by stage name, so stages rerun in isolation reproduce the full run.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltlp/config.hpp"
#include "ltlp/dataset.hpp"
#include "ltlp/encoder.hpp"
#include "ltlp/eval.hpp"
#include "ltlp/io.hpp"
#include "ltlp/sem.hpp"
#include "ltlp/trainer.hpp"

namespace ltlp {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct PreparedData {
    Dataset ds;
    std::vector<std::string> node_names;  // empty when synthetic
    std::vector<std::uint32_t> blocks;    // SBM ground truth when synthetic
};

// A dataset path means a real edge list (features optional, one-hot
// fallback); otherwise the SBM generator provides a synthetic dataset.
inline PreparedData prepare_dataset(const RunConfig& cfg, std::uint64_t seed) {
    PreparedData out;
    if (cfg.edges_path.empty()) {
        SbmConfig sbm = cfg.sbm;
        sbm.seed = seed;
        sbm.split = cfg.split;
        SbmDataset s = generate_sbm(sbm);
        out.ds = std::move(s.data);
        out.blocks = std::move(s.block);
        return out;
    }
    EdgeListData edges = load_edge_list(cfg.edges_path);
    SparseMatrix features;
    if (!cfg.features_path.empty())
        features = to_sparse(load_features(cfg.features_path, edges.num_nodes));
    else
        features = one_hot_features(edges.num_nodes);
    SplitConfig split = cfg.split;
    split.seed = seed;
    out.ds = split_dataset(std::move(edges.edges), edges.num_nodes, std::move(features), split);
    out.node_names = std::move(edges.node_names);
    return out;
}

// ------------------------------------------------------------------
// artifact helpers

namespace detail {

inline void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << '\n';
}

inline void write_split_manifest(const fs::path& path, const RunConfig& cfg, std::uint64_t seed,
                                 const PreparedData& data) {
    json j;
    j["seed"] = seed;
    j["train_frac"] = cfg.split.train_frac;
    j["val_frac"] = cfg.split.val_frac;
    j["neg_ratio"] = cfg.split.neg_ratio;
    j["num_nodes"] = data.ds.full_graph.num_nodes();
    j["num_edges"] = data.ds.full_graph.num_edges();
    j["train_pairs"] = data.ds.train.size();
    j["val_pairs"] = data.ds.val.size();
    j["test_pairs"] = data.ds.test.size();
    if (!cfg.edges_path.empty()) j["edges_digest"] = file_digest(cfg.edges_path);
    if (!cfg.features_path.empty()) j["features_digest"] = file_digest(cfg.features_path);
    write_json(path, j);
}

inline void write_node_ids(const fs::path& path, const std::vector<std::string>& names) {
    if (names.empty()) return;
    std::ofstream ids(path);
    for (std::size_t i = 0; i < names.size(); ++i) ids << i << ' ' << names[i] << '\n';
}

inline json bucket_table_to_json(const BucketTable& table) {
    json rows = json::array();
    for (std::size_t b = 0; b < table.buckets.size(); ++b) {
        const Bucket& bk = table.buckets[b];
        json row;
        row["bucket"] = b;
        row["lo"] = bk.lo;
        row["hi"] = bk.hi;
        row["count"] = bk.count;
        row["accuracy"] = bk.accuracy;
        rows.push_back(row);
    }
    json j;
    j["measure"] = table.measure == BucketMeasure::degree_pair ? "degree_pair" : "common_neighbors";
    j["buckets"] = rows;
    return j;
}

inline json report_to_json(const MetricsReport& r) {
    json j;
    j["auc"] = r.auc;
    j["acc_head"] = r.acc_head;
    j["acc_tail"] = r.acc_tail;
    j["acc_mean"] = r.acc_mean;
    j["acc_overall"] = r.acc_overall;
    j["bias"] = r.bias;
    j["head_count"] = r.head_count;
    j["tail_count"] = r.tail_count;
    json hits = json::object();
    for (const auto& [k, v] : r.hits_at_k) hits[std::to_string(k)] = v;
    j["hits_at_k"] = hits;
    return j;
}

} // namespace detail

// Test-set scores for a parameter state: message passing over message_graph,
// metrics structure over the original training graph.
inline std::vector<double> score_pairs(const ModelParams& params, const Graph& message_graph,
                                       const Dataset& ds, const std::vector<LabeledPair>& pairs) {
    const GraphContext ctx = make_context(message_graph, ds.features);
    const Matrix h = forward(params, ctx).embeddings();
    std::vector<double> scores(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        scores[i] = pair_forward(params, h, pairs[i].pair).score;
    return scores;
}

struct AugmentationStats {
    double tau = 0.0;
    double youden_j = 0.0;
    bool tau_auto = true;
    double tau_svf = 0.0;
    double k_percent = 0.0;
    std::size_t candidates = 0; // |E_o|
    std::size_t score_pass = 0; // |E_s|
    std::size_t kept = 0;       // |E_f|
    std::size_t added = 0;
    std::size_t dropped_leaks = 0;

    json to_json() const {
        json j;
        j["tau"] = tau;
        j["tau_auto"] = tau_auto;
        j["youden_j"] = youden_j;
        j["tau_svf"] = tau_svf;
        j["k_percent"] = k_percent;
        j["candidates"] = candidates;
        j["score_pass"] = score_pass;
        j["kept"] = kept;
        j["added"] = added;
        j["dropped_leaks"] = dropped_leaks;
        return j;
    }
};

struct SemOutcome {
    Dataset augmented;
    AugmentationStats stats;
};

// Candidate generation + scoring + filtering + edge-set expansion, given the
// pretraining snapshots. tau comes from the validation Youden sweep of the
// final pretrained model unless fixed in the config.
inline SemOutcome run_sem(const RunConfig& cfg, const Dataset& ds, const SnapshotSet& snapshots) {
    SemOutcome out;
    FilterConfig fcfg = cfg.filter;
    TauResult tau_res;
    if (cfg.tau_auto) {
        std::vector<double> val_scores =
            score_pairs(snapshots.final_params(), ds.graph, ds, ds.val);
        std::vector<int> val_labels(ds.val.size());
        for (std::size_t i = 0; i < ds.val.size(); ++i) val_labels[i] = ds.val[i].label;
        tau_res = select_tau(val_scores, val_labels);
        fcfg.tau = tau_res.tau;
        if (tau_res.youden_j <= 0.0)
            std::fprintf(stderr,
                         "warning: best validation Youden J is %.4f (<= 0); the score "
                         "threshold %.4f is unreliable\n",
                         tau_res.youden_j, tau_res.tau);
    } else {
        tau_res.tau = fcfg.tau;
    }
    const std::vector<NodePair> candidates =
        generate_candidates(ds.graph, ds.train, fcfg.tail_only);
    const std::vector<CandidateEdge> scored = score_candidates(snapshots, ds, candidates);
    const FilterResult filtered = filter_candidates(scored, fcfg);
    AugmentResult aug = augment(ds, filtered.kept);

    out.stats.tau = fcfg.tau;
    out.stats.tau_auto = cfg.tau_auto;
    out.stats.youden_j = tau_res.youden_j;
    out.stats.tau_svf = filtered.tau_svf;
    out.stats.k_percent = fcfg.k_percent;
    out.stats.candidates = candidates.size();
    out.stats.score_pass = filtered.score_pass;
    out.stats.kept = filtered.kept.size();
    out.stats.added = aug.added;
    out.stats.dropped_leaks = aug.dropped_leaks;
    out.augmented = std::move(aug.dataset);
    return out;
}

struct PipelineResult {
    MetricsReport baseline;
    MetricsReport ltlp;
    AugmentationStats augmentation;
    CnDistribution migration;
    std::vector<EpochLog> pretrain_logs;
    std::vector<EpochLog> continue_logs;
    Graph original_graph;
    Graph augmented_graph;
    double seconds_pretrain = 0.0;
    double seconds_sem = 0.0;
    double seconds_continue = 0.0;
};

// Full pipeline run with every intermediate artifact persisted under out_dir.
// The pretrained model is evaluated on the same test set as the baseline for
// the head/tail comparison.
inline PipelineResult run_pipeline(const RunConfig& cfg, std::uint64_t seed,
                                   const fs::path& out_dir) {
    fs::create_directories(out_dir);
    PipelineResult result;
    auto clock = [] { return std::chrono::steady_clock::now(); };
    auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };

    auto stage = [&](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            throw std::runtime_error("pipeline stage '" + std::string(name) +
                                     "' failed: " + e.what());
        }
    };

    PreparedData data;
    stage("dataset", [&] {
        data = prepare_dataset(cfg, seed);
        detail::write_split_manifest(out_dir / "split_manifest.json", cfg, seed, data);
        detail::write_node_ids(out_dir / "node_ids.txt", data.node_names);
    });
    const Dataset& ds = data.ds;
    result.original_graph = ds.graph;

    TrainConfig tcfg = cfg.train;
    tcfg.seed = seed;

    PretrainResult pre;
    stage("pretrain", [&] {
        const auto t0 = clock();
        std::ofstream log(out_dir / "pretrain_log.jsonl");
        pre = pretrain(ds, tcfg, cfg.encoder, &log);
        result.seconds_pretrain = secs(t0, clock());
        result.pretrain_logs = pre.logs;
        save_tensors((out_dir / "pretrained.ckpt").string(), params_to_tensors(pre.params));
        save_tensors((out_dir / "snapshots.ckpt").string(), snapshots_to_tensors(pre.snapshots));
    });

    stage("baseline-eval", [&] {
        const std::vector<double> scores = score_pairs(pre.params, ds.graph, ds, ds.test);
        result.baseline = compute_metrics(ds.test, scores, ds.graph, cfg.hits_ks);
    });

    SemOutcome sem;
    stage("sem", [&] {
        const auto t0 = clock();
        sem = run_sem(cfg, ds, pre.snapshots);
        result.seconds_sem = secs(t0, clock());
        result.augmentation = sem.stats;
        result.augmented_graph = sem.augmented.graph;
        save_edge_list((out_dir / "augmented_edges.txt").string(),
                       sem.augmented.graph.edge_list());
        detail::write_json(out_dir / "augmentation.json", sem.stats.to_json());
    });

    TrainResult cont;
    stage("continue-train", [&] {
        const auto t0 = clock();
        std::ofstream log(out_dir / "continue_log.jsonl");
        cont = continue_train(sem.augmented, pre.params, tcfg, &log);
        result.seconds_continue = secs(t0, clock());
        result.continue_logs = cont.logs;
        save_tensors((out_dir / "final.ckpt").string(), params_to_tensors(cont.params));
    });

    stage("ltlp-eval", [&] {
        const std::vector<double> scores =
            score_pairs(cont.params, sem.augmented.graph, ds, ds.test);
        result.ltlp = compute_metrics(ds.test, scores, ds.graph, cfg.hits_ks);
        result.migration = cn_distribution(ds.test, ds.graph, sem.augmented.graph);
    });

    stage("report", [&] {
        json j;
        j["dataset"] = cfg.dataset_name;
        j["seed"] = seed;
        j["baseline"] = detail::report_to_json(result.baseline);
        j["ltlp"] = detail::report_to_json(result.ltlp);
        j["augmentation"] = result.augmentation.to_json();
        json mig;
        mig["migrated_tail_to_head"] = result.migration.migrated_tail_to_head;
        std::size_t with_cn_before = 0, with_cn_after = 0;
        for (const auto& [cn, n] : result.migration.before)
            if (cn >= 1) with_cn_before += n;
        for (const auto& [cn, n] : result.migration.after)
            if (cn >= 1) with_cn_after += n;
        mig["test_pairs_with_cn_before"] = with_cn_before;
        mig["test_pairs_with_cn_after"] = with_cn_after;
        j["cn_migration"] = mig;
        detail::write_json(out_dir / "report.json", j);

        json t;
        t["seconds_pretrain"] = result.seconds_pretrain;
        t["seconds_sem"] = result.seconds_sem;
        t["seconds_continue"] = result.seconds_continue;
        detail::write_json(out_dir / "timings.json", t);
    });

    return result;
}

// ------------------------------------------------------------------
// staged commands: each stage persists what the next one loads, and the
// dataset is re-derived from (config, seed) so split state never needs to
// travel between invocations.

inline void cmd_pretrain(const RunConfig& cfg, std::uint64_t seed, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    PreparedData data = prepare_dataset(cfg, seed);
    detail::write_split_manifest(out_dir / "split_manifest.json", cfg, seed, data);
    detail::write_node_ids(out_dir / "node_ids.txt", data.node_names);
    TrainConfig tcfg = cfg.train;
    tcfg.seed = seed;
    std::ofstream log(out_dir / "pretrain_log.jsonl");
    PretrainResult pre = pretrain(data.ds, tcfg, cfg.encoder, &log);
    save_tensors((out_dir / "pretrained.ckpt").string(), params_to_tensors(pre.params));
    save_tensors((out_dir / "snapshots.ckpt").string(), snapshots_to_tensors(pre.snapshots));
}

inline void cmd_augment(const RunConfig& cfg, std::uint64_t seed, const fs::path& out_dir) {
    PreparedData data = prepare_dataset(cfg, seed);
    SnapshotSet snapshots =
        snapshots_from_tensors(load_tensors((out_dir / "snapshots.ckpt").string()));
    SemOutcome sem = run_sem(cfg, data.ds, snapshots);
    save_edge_list((out_dir / "augmented_edges.txt").string(), sem.augmented.graph.edge_list());
    detail::write_json(out_dir / "augmentation.json", sem.stats.to_json());
}

inline void cmd_train(const RunConfig& cfg, std::uint64_t seed, const fs::path& out_dir) {
    PreparedData data = prepare_dataset(cfg, seed);
    ModelParams params = params_from_tensors(load_tensors((out_dir / "pretrained.ckpt").string()));
    Dataset ds_aug = data.ds;
    const fs::path edges = out_dir / "augmented_edges.txt";
    if (fs::exists(edges))
        ds_aug.graph = build_graph(
            load_edge_list_dense(edges.string(), data.ds.graph.num_nodes()),
            data.ds.graph.num_nodes());
    TrainConfig tcfg = cfg.train;
    tcfg.seed = seed;
    std::ofstream log(out_dir / "continue_log.jsonl");
    TrainResult cont = continue_train(ds_aug, std::move(params), tcfg, &log);
    save_tensors((out_dir / "final.ckpt").string(), params_to_tensors(cont.params));
}

inline MetricsReport cmd_eval(const RunConfig& cfg, std::uint64_t seed, const fs::path& out_dir,
                              const std::string& checkpoint = "final.ckpt") {
    PreparedData data = prepare_dataset(cfg, seed);
    ModelParams params = params_from_tensors(load_tensors((out_dir / checkpoint).string()));
    Graph message_graph = data.ds.graph;
    const fs::path edges = out_dir / "augmented_edges.txt";
    if (checkpoint == "final.ckpt" && fs::exists(edges))
        message_graph = build_graph(
            load_edge_list_dense(edges.string(), data.ds.graph.num_nodes()),
            data.ds.graph.num_nodes());
    const std::vector<double> scores = score_pairs(params, message_graph, data.ds, data.ds.test);
    MetricsReport r = compute_metrics(data.ds.test, scores, data.ds.graph, cfg.hits_ks);
    json j;
    j["dataset"] = cfg.dataset_name;
    j["seed"] = seed;
    j["checkpoint"] = checkpoint;
    j["metrics"] = detail::report_to_json(r);
    detail::write_json(out_dir / "eval_report.json", j);
    return r;
}

// ------------------------------------------------------------------
// analyze: baseline training + ten-bucket tables + CN distribution

inline void write_bucket_csv(const fs::path& path, const BucketTable& table) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "bucket,lo,hi,count,accuracy\n";
    char buf[128];
    for (std::size_t b = 0; b < table.buckets.size(); ++b) {
        const Bucket& bk = table.buckets[b];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%zu,%.17g\n", b, bk.lo, bk.hi, bk.count,
                      bk.accuracy);
        out << buf;
    }
}

struct AnalyzeResult {
    BucketTable degree_buckets;
    BucketTable cn_buckets;
    CnDistribution distribution;
};

inline AnalyzeResult run_analyze(const RunConfig& cfg, std::uint64_t seed,
                                 const fs::path& out_dir) {
    fs::create_directories(out_dir);
    PreparedData data = prepare_dataset(cfg, seed);
    const Dataset& ds = data.ds;
    if (ds.test.size() < 10)
        throw std::runtime_error("analyze: need at least 10 test pairs, have " +
                                 std::to_string(ds.test.size()));
    detail::write_node_ids(out_dir / "node_ids.txt", data.node_names);
    TrainConfig tcfg = cfg.train;
    tcfg.seed = seed;
    std::ofstream log(out_dir / "pretrain_log.jsonl");
    PretrainResult pre = pretrain(ds, tcfg, cfg.encoder, &log);
    const std::vector<double> scores = score_pairs(pre.params, ds.graph, ds, ds.test);

    AnalyzeResult out;
    out.degree_buckets = bucket_analysis(ds.test, scores, ds.graph, BucketMeasure::degree_pair);
    out.cn_buckets = bucket_analysis(ds.test, scores, ds.graph, BucketMeasure::common_neighbors);
    out.distribution = cn_distribution(ds.test, ds.graph, ds.graph);
    write_bucket_csv(out_dir / "buckets_degree.csv", out.degree_buckets);
    write_bucket_csv(out_dir / "buckets_cn.csv", out.cn_buckets);

    json j;
    j["dataset"] = cfg.dataset_name;
    j["seed"] = seed;
    j["test_auc"] = auc(scores, [&] {
        std::vector<int> labels(ds.test.size());
        for (std::size_t i = 0; i < ds.test.size(); ++i) labels[i] = ds.test[i].label;
        return labels;
    }());
    j["degree_buckets"] = detail::bucket_table_to_json(out.degree_buckets);
    j["cn_buckets"] = detail::bucket_table_to_json(out.cn_buckets);
    json hist = json::object();
    for (const auto& [cn, n] : out.distribution.before) hist[std::to_string(cn)] = n;
    j["cn_histogram"] = hist;
    detail::write_json(out_dir / "analyze_report.json", j);
    return out;
}

// ------------------------------------------------------------------
// hard-negative experiment CSVs

inline std::vector<HardNegativeRow> run_hard_negatives(const RunConfig& cfg, std::uint64_t seed,
                                                       const fs::path& out_dir) {
    fs::create_directories(out_dir);
    PreparedData data = prepare_dataset(cfg, seed);
    const Dataset& ds = data.ds;
    TrainConfig tcfg = cfg.train;
    tcfg.seed = seed;
    std::ofstream log(out_dir / "pretrain_log.jsonl");
    PretrainResult pre = pretrain(ds, tcfg, cfg.encoder, &log, /*record_all=*/true);

    HardNegativeConfig hcfg = cfg.hardneg;
    hcfg.seed = derive_seed(seed, "hardneg-root");
    if (cfg.tau_auto) {
        std::vector<double> val_scores = score_pairs(pre.params, ds.graph, ds, ds.val);
        std::vector<int> val_labels(ds.val.size());
        for (std::size_t i = 0; i < ds.val.size(); ++i) val_labels[i] = ds.val[i].label;
        hcfg.tau = select_tau(val_scores, val_labels).tau;
    } else {
        hcfg.tau = cfg.filter.tau;
    }

    std::vector<HardNegativeRow> rows =
        hard_negative_experiment(ds, pre.history, pre.snapshots, hcfg);

    for (std::size_t level : hcfg.levels) {
        std::ofstream csv(out_dir / ("hardneg_s" + std::to_string(level) + ".csv"));
        csv << "epoch,difficulty,r_ler_raw,r_ler_after_variance_filter\n";
        char buf[128];
        for (const HardNegativeRow& r : rows) {
            if (r.difficulty != level) continue;
            std::snprintf(buf, sizeof(buf), "%d,%zu,%.17g,%.17g\n", r.epoch, r.difficulty,
                          r.r_ler_raw, r.r_ler_filtered);
            csv << buf;
        }
    }
    return rows;
}

// ------------------------------------------------------------------
// sparsity sweep

struct SparsityRow {
    double ratio = 0.0;
    double baseline_auc = 0.0;
    double baseline_tail_acc = 0.0;
    double ltlp_auc = 0.0;
    double ltlp_tail_acc = 0.0;
};

inline std::vector<SparsityRow> run_sparsity(const RunConfig& cfg, std::uint64_t seed,
                                             const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::vector<SparsityRow> rows;
    for (double ratio : cfg.sparsity_ratios) {
        if (!(ratio > 0.0 && ratio <= 1.0))
            throw std::invalid_argument("sparsity: ratio out of (0,1]");
        PreparedData data = prepare_dataset(cfg, seed);
        Dataset ds = downsample_edges(data.ds, ratio, derive_seed(seed, "sparsity"));
        TrainConfig tcfg = cfg.train;
        tcfg.seed = seed;
        PretrainResult pre = pretrain(ds, tcfg, cfg.encoder, nullptr);
        const std::vector<double> base_scores = score_pairs(pre.params, ds.graph, ds, ds.test);
        const MetricsReport base = compute_metrics(ds.test, base_scores, ds.graph, {});
        SemOutcome sem = run_sem(cfg, ds, pre.snapshots);
        TrainResult cont = continue_train(sem.augmented, pre.params, tcfg, nullptr);
        const std::vector<double> ltlp_scores =
            score_pairs(cont.params, sem.augmented.graph, ds, ds.test);
        const MetricsReport ltlp = compute_metrics(ds.test, ltlp_scores, ds.graph, {});
        rows.push_back({ratio, base.auc, base.acc_tail, ltlp.auc, ltlp.acc_tail});
    }
    std::ofstream csv(out_dir / "sparsity.csv");
    csv << "ratio,baseline_auc,baseline_tail_acc,ltlp_auc,ltlp_tail_acc\n";
    char buf[160];
    for (const SparsityRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.ratio,
                      r.baseline_auc, r.baseline_tail_acc, r.ltlp_auc, r.ltlp_tail_acc);
        csv << buf;
    }
    return rows;
}

} // namespace ltlp
