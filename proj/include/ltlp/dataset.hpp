#pragma once

// Dataset assembly: reproducible train/val/test splits with negative
// sampling, sparsity downsampling, and the stochastic-block-model generator
// used as a synthetic oracle harness.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "ltlp/graph.hpp"
#include "ltlp/linalg.hpp"
#include "ltlp/rng.hpp"

namespace ltlp {

struct LabeledPair {
    NodePair pair;
    int label = 0; // 1 = edge, 0 = non-edge
};

struct SplitConfig {
    double train_frac = 0.85;
    double val_frac = 0.05;
    double neg_ratio = 1.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (train_frac <= 0 || val_frac <= 0)
            throw std::invalid_argument("SplitConfig: fractions must be positive");
        if (train_frac + val_frac > 1.0)
            throw std::invalid_argument("SplitConfig: train+val exceeds 1");
        if (neg_ratio <= 0) throw std::invalid_argument("SplitConfig: neg_ratio must be positive");
    }
};

struct Dataset {
    Graph graph;         // training message-passing graph (train positives only)
    Graph full_graph;    // all original edges; negatives are non-edges of this
    SparseMatrix features;
    std::vector<LabeledPair> train;
    std::vector<LabeledPair> val;
    std::vector<LabeledPair> test;
};

// Identity-like one-hot fallback for datasets without a feature file: node v
// gets e_{v mod dim}, dim = min(N, 1433).
inline SparseMatrix one_hot_features(NodeId num_nodes, std::size_t dim = 0) {
    if (dim == 0) dim = std::min<std::size_t>(num_nodes, 1433);
    SparseMatrix f;
    f.rows = num_nodes;
    f.cols = dim;
    f.offsets.assign(1, 0);
    for (NodeId v = 0; v < num_nodes; ++v) {
        f.col_index.push_back(static_cast<std::uint32_t>(v % dim));
        f.values.push_back(1.0);
        f.offsets.push_back(f.col_index.size());
    }
    return f;
}

namespace detail {

// Uniform non-edges of `g`, distinct from each other and from `used`.
// Small graphs are enumerated so near-complete graphs terminate; large ones
// use rejection sampling.
inline std::vector<NodePair> sample_non_edges(const Graph& g, std::size_t count, Rng& rng,
                                              std::unordered_set<NodePair, NodePairHash>& used) {
    const std::uint64_t n = g.num_nodes();
    const std::uint64_t total_pairs = n * (n - 1) / 2;
    if (total_pairs < g.num_edges() + used.size() + count)
        throw std::runtime_error("sample_non_edges: not enough non-edges (" +
                                 std::to_string(count) + " requested)");
    std::vector<NodePair> out;
    out.reserve(count);
    if (total_pairs <= (1u << 21)) {
        std::vector<NodePair> pool;
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v) {
                NodePair p(u, v);
                if (!g.has_edge(p) && !used.count(p)) pool.push_back(p);
            }
        if (pool.size() < count)
            throw std::runtime_error("sample_non_edges: not enough non-edges");
        // partial Fisher-Yates: the first `count` entries are a uniform sample
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
            used.insert(pool[i]);
        }
        return out;
    }
    while (out.size() < count) {
        NodeId u = static_cast<NodeId>(rng.uniform_index(n));
        NodeId v = static_cast<NodeId>(rng.uniform_index(n));
        if (u == v) continue;
        NodePair p(u, v);
        if (g.has_edge(p) || used.count(p)) continue;
        used.insert(p);
        out.push_back(p);
    }
    return out;
}

} // namespace detail

// Fresh training negatives for one epoch: uniform non-edges of the full
// graph, matched 1:1 to the positive count, independent across epochs.
inline std::vector<NodePair> sample_training_negatives(const Dataset& ds, std::size_t count,
                                                       std::uint64_t seed) {
    Rng rng(seed);
    std::unordered_set<NodePair, NodePairHash> used;
    return detail::sample_non_edges(ds.full_graph, count, rng, used);
}

// Shuffle edges by seed; first ⌊train_frac·|E|⌋ become the train positives
// and the message-passing graph, next ⌊val_frac·|E|⌋ the validation
// positives, remainder test. Negatives per split are uniform non-edges of the
// full graph, globally without replacement.
inline Dataset split_dataset(std::vector<NodePair> edges, NodeId num_nodes,
                             SparseMatrix features, const SplitConfig& cfg) {
    cfg.validate();
    if (features.rows != num_nodes)
        throw std::invalid_argument("split_dataset: feature rows != num_nodes");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Dataset ds;
    ds.full_graph = build_graph(edges, num_nodes);
    ds.features = std::move(features);

    Rng rng(derive_seed(cfg.seed, "split"));
    rng.shuffle(edges);
    // floor with a small guard so 0.85*100 does not land on 84.999...
    auto floor_count = [&](double frac) {
        return static_cast<std::size_t>(std::floor(frac * static_cast<double>(edges.size()) + 1e-9));
    };
    const std::size_t n_train = floor_count(cfg.train_frac);
    const std::size_t n_val = floor_count(cfg.val_frac);
    if (n_train == 0 || n_val == 0 || n_train + n_val >= edges.size())
        throw std::runtime_error("split_dataset: too few edges for a non-empty split");

    std::vector<NodePair> train_pos(edges.begin(), edges.begin() + n_train);
    std::vector<NodePair> val_pos(edges.begin() + n_train, edges.begin() + n_train + n_val);
    std::vector<NodePair> test_pos(edges.begin() + n_train + n_val, edges.end());
    ds.graph = build_graph(train_pos, num_nodes);

    std::unordered_set<NodePair, NodePairHash> used;
    Rng neg_rng(derive_seed(cfg.seed, "split-negatives"));
    auto fill = [&](std::vector<LabeledPair>& out, const std::vector<NodePair>& pos) {
        const std::size_t n_neg = static_cast<std::size_t>(cfg.neg_ratio * pos.size());
        auto negs = detail::sample_non_edges(ds.full_graph, n_neg, neg_rng, used);
        out.reserve(pos.size() + negs.size());
        for (const NodePair& p : pos) out.push_back({p, 1});
        for (const NodePair& p : negs) out.push_back({p, 0});
    };
    fill(ds.train, train_pos);
    fill(ds.val, val_pos);
    fill(ds.test, test_pos);
    return ds;
}

// Sparsity harness: retain ⌈S·|train positives|⌉ train positives uniformly at
// random and rebuild the training graph; val/test are untouched.
inline Dataset downsample_edges(const Dataset& ds, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw std::invalid_argument("downsample_edges: ratio must be in (0,1]");
    if (ratio == 1.0) return ds;
    std::vector<NodePair> pos, neg;
    for (const LabeledPair& lp : ds.train)
        (lp.label ? pos : neg).push_back(lp.pair);
    const std::size_t keep =
        static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(pos.size()) - 1e-9));
    Rng rng(derive_seed(seed, "downsample"));
    rng.shuffle(pos);
    pos.resize(keep);
    if (neg.size() > keep) {
        rng.shuffle(neg);
        neg.resize(keep);
    }
    Dataset out = ds;
    out.graph = build_graph(pos, ds.full_graph.num_nodes());
    out.train.clear();
    for (const NodePair& p : pos) out.train.push_back({p, 1});
    for (const NodePair& p : neg) out.train.push_back({p, 0});
    return out;
}

// ------------------------------------------------------------------
// stochastic block model

struct SbmConfig {
    std::size_t num_blocks = 8;
    std::size_t block_size = 64;
    double p_in = 0.2;
    double p_out = 0.005;
    std::size_t feature_dim = 0; // 0 -> num_blocks
    double feature_noise = 0.1;
    std::uint64_t seed = 1;
    SplitConfig split;

    void validate() const {
        if (num_blocks < 1 || block_size < 2)
            throw std::invalid_argument("SbmConfig: degenerate sizes");
        if (!(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0))
            throw std::invalid_argument("SbmConfig: need 0 <= p_out <= p_in <= 1");
    }
};

struct SbmDataset {
    Dataset data;
    std::vector<std::uint32_t> block; // ground-truth block of each node

    // oracle for filter-quality experiments: an edge is "plausible" iff it
    // joins two nodes of the same block
    bool same_block(const NodePair& p) const { return block[p.u] == block[p.v]; }
};

// Planted-partition graph with block-one-hot features plus seeded noise.
// Block ids are folded mod feature_dim, so feature_dim < num_blocks yields
// deliberately ambiguous features that only the structure disambiguates.
inline SbmDataset generate_sbm(const SbmConfig& cfg) {
    cfg.validate();
    const NodeId n = static_cast<NodeId>(cfg.num_blocks * cfg.block_size);
    SbmDataset out;
    out.block.resize(n);
    for (NodeId v = 0; v < n; ++v) out.block[v] = static_cast<std::uint32_t>(v / cfg.block_size);

    Rng rng(derive_seed(cfg.seed, "sbm-edges"));
    std::vector<NodePair> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) {
            const double p = out.block[u] == out.block[v] ? cfg.p_in : cfg.p_out;
            if (p > 0.0 && rng.bernoulli(p)) edges.push_back(NodePair(u, v));
        }

    const std::size_t dim = cfg.feature_dim ? cfg.feature_dim : cfg.num_blocks;
    Rng frng(derive_seed(cfg.seed, "sbm-features"));
    Matrix feats(n, dim);
    for (NodeId v = 0; v < n; ++v) {
        feats(v, out.block[v] % dim) = 1.0;
        for (std::size_t j = 0; j < dim; ++j)
            feats(v, j) += frng.uniform(-cfg.feature_noise, cfg.feature_noise);
    }

    SplitConfig split = cfg.split;
    split.seed = cfg.seed;
    out.data = split_dataset(std::move(edges), n, to_sparse(feats), split);
    return out;
}

} // namespace ltlp
