#pragma once

// Structure Enhancement Module: candidate edges from 1-hop neighborhoods,
// scoring under the five pretraining snapshots, score-threshold plus
// normalized-variance filtering, and the edge-set expansion. Also the
// hard-negative label-error-rate experiment used to study the filters.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "ltlp/dataset.hpp"
#include "ltlp/encoder.hpp"
#include "ltlp/eval.hpp"
#include "ltlp/graph.hpp"
#include "ltlp/trainer.hpp"

namespace ltlp {

struct CandidateEdge {
    NodePair pair;
    std::array<double, 5> scores{}; // one per snapshot, oldest first
    double mean = 0.0;
    double norm_variance = 0.0;
    double final_score = 0.0; // last snapshot = final pretrained model
};

struct FilterConfig {
    double tau = 0.5;        // score threshold
    double k_percent = 0.6;  // fraction of E_s kept by smallest variance
    bool tail_only = false;  // restrict candidate sources to zero-CN samples

    void validate() const {
        if (!(tau > 0.0 && tau <= 1.0)) // tau = 1.0 disables augmentation outright
            throw std::invalid_argument("FilterConfig: tau must be in (0,1]");
        if (!(k_percent > 0.0 && k_percent <= 1.0))
            throw std::invalid_argument("FilterConfig: k_percent must be in (0,1]");
    }
};

// E_o = ⋃ over samples (u,v) of {(u,i): i ∈ N_v} ∪ {(v,j): j ∈ N_u}, minus
// self-loops and existing edges, deduplicated canonically. With tail_only,
// only samples with zero common neighbors contribute.
inline std::vector<NodePair> generate_candidates(const Graph& g,
                                                 const std::vector<LabeledPair>& samples,
                                                 bool tail_only = false) {
    std::unordered_set<NodePair, NodePairHash> seen;
    for (const LabeledPair& lp : samples) {
        const NodePair& s = lp.pair;
        g.check_node(s.u);
        g.check_node(s.v);
        if (tail_only && common_neighbor_count(g, s) != 0) continue;
        for (NodeId i : g.neighbors(s.v)) {
            if (i == s.u) continue;
            NodePair cand(s.u, i);
            if (!g.has_edge(cand)) seen.insert(cand);
        }
        for (NodeId j : g.neighbors(s.u)) {
            if (j == s.v) continue;
            NodePair cand(s.v, j);
            if (!g.has_edge(cand)) seen.insert(cand);
        }
    }
    std::vector<NodePair> out(seen.begin(), seen.end());
    std::sort(out.begin(), out.end());
    return out;
}

// V = (1/mean) * sqrt((1/5) * Σ (p_i - mean)^2), population form. A constant
// series is exactly zero (the mean of n equal values rounds off otherwise).
inline double normalized_variance(std::span<const double> scores) {
    double mean = 0.0, lo = scores.front(), hi = scores.front();
    for (double p : scores) {
        mean += p;
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    mean /= double(scores.size());
    if (!(mean > 0.0)) throw std::invalid_argument("normalized_variance: mean must be positive");
    if (lo == hi) return 0.0;
    double ss = 0.0;
    for (double p : scores) ss += (p - mean) * (p - mean);
    return std::sqrt(ss / double(scores.size())) / mean;
}

// Scores every candidate under each snapshot's parameters, message passing on
// the ORIGINAL (pre-augmentation) graph.
inline std::vector<CandidateEdge> score_candidates(const SnapshotSet& snapshots,
                                                   const Dataset& ds,
                                                   const std::vector<NodePair>& candidates) {
    snapshots.validate();
    const GraphContext ctx = make_context(ds.graph, ds.features);
    std::vector<CandidateEdge> out(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i].pair = candidates[i];
    for (std::size_t s = 0; s < snapshots.snapshots.size(); ++s) {
        const ModelParams& params = snapshots.snapshots[s].params;
        const Matrix h = forward(params, ctx).embeddings();
        for (CandidateEdge& c : out) c.scores[s] = pair_forward(params, h, c.pair).score;
    }
    for (CandidateEdge& c : out) {
        double mean = 0.0;
        for (double p : c.scores) mean += p;
        c.mean = mean / double(c.scores.size());
        c.norm_variance = normalized_variance(c.scores);
        c.final_score = c.scores.back();
    }
    return out;
}

// Threshold maximizing Youden's J = TPR - FPR over the distinct validation
// scores (classification rule: score >= tau). Ties break toward the higher,
// stricter threshold.
struct TauResult {
    double tau = 0.5;
    double youden_j = 0.0;
};

inline TauResult select_tau(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("select_tau: bad input sizes");
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y != 0);
    const std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("select_tau: validation set needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    TauResult best;
    best.tau = scores[order[0]];
    best.youden_j = -2.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double t = scores[order[i]];
        // include every sample tied at this score: rule is score >= t
        while (i < order.size() && scores[order[i]] == t) {
            if (labels[order[i]] != 0) ++tp;
            else ++fp;
            ++i;
        }
        const double j = double(tp) / double(n_pos) - double(fp) / double(n_neg);
        if (j > best.youden_j) { // strict: first (highest) threshold wins ties
            best.youden_j = j;
            best.tau = t;
        }
    }
    return best;
}

struct FilterResult {
    std::vector<CandidateEdge> kept; // E_f, ordered by (variance, -mean, pair)
    std::size_t score_pass = 0;      // |E_s|
    double tau_svf = 0.0;            // induced variance cut (largest kept V)
};

// E_s = {final score >= tau}; E_f = the ⌈k·|E_s|⌉ members with the SMALLEST
// normalized variance. Ties break by higher mean score, then canonical pair
// order, so equal inputs always produce equal outputs.
inline FilterResult filter_candidates(const std::vector<CandidateEdge>& candidates,
                                      const FilterConfig& cfg) {
    cfg.validate();
    FilterResult r;
    std::vector<CandidateEdge> pass;
    for (const CandidateEdge& c : candidates)
        if (c.final_score >= cfg.tau) pass.push_back(c);
    r.score_pass = pass.size();
    if (pass.empty()) return r;
    const std::size_t keep = static_cast<std::size_t>(
        std::ceil(cfg.k_percent * double(pass.size()) - 1e-9));
    std::sort(pass.begin(), pass.end(), [](const CandidateEdge& a, const CandidateEdge& b) {
        if (a.norm_variance != b.norm_variance) return a.norm_variance < b.norm_variance;
        if (a.mean != b.mean) return a.mean > b.mean;
        return a.pair < b.pair;
    });
    pass.resize(std::min(keep, pass.size()));
    r.tau_svf = pass.empty() ? 0.0 : pass.back().norm_variance;
    r.kept = std::move(pass);
    return r;
}

struct AugmentResult {
    Dataset dataset;            // training graph replaced by the merged one
    std::size_t added = 0;      // edges actually merged
    std::size_t dropped_leaks = 0; // filtered edges equal to a val/test positive
};

// E_new = E ∪ E_f. Any filtered edge that coincides with a validation or test
// positive is dropped (and counted) instead of being injected into message
// passing. Labels in O_train are never touched.
inline AugmentResult augment(const Dataset& ds, const std::vector<CandidateEdge>& kept) {
    std::unordered_set<NodePair, NodePairHash> eval_positives;
    for (const LabeledPair& lp : ds.val)
        if (lp.label) eval_positives.insert(lp.pair);
    for (const LabeledPair& lp : ds.test)
        if (lp.label) eval_positives.insert(lp.pair);
    AugmentResult out;
    std::vector<NodePair> extra;
    for (const CandidateEdge& c : kept) {
        if (eval_positives.count(c.pair)) {
            ++out.dropped_leaks;
            continue;
        }
        extra.push_back(c.pair);
    }
    out.added = extra.size();
    out.dataset = ds;
    out.dataset.graph = merge_edges(ds.graph, extra);
    return out;
}

// ------------------------------------------------------------------
// hard-negative label-error-rate experiment

// Within an all-negative probe set the normalized variance anti-correlates
// with the mean score (the 1/mean factor dominates), so the confidently wrong
// members sit at the LOW-variance end; discarding that end is what reduces
// the leakage rate. Note this is the opposite end from the E_s filter, whose
// population is conditioned on clearing tau first.
enum class VarianceDiscard {
    lowest,  // drop the lowest-variance fraction (default)
    highest, // drop the highest-variance fraction
};

struct HardNegativeRow {
    int epoch = 0;
    std::size_t difficulty = 0;
    double r_ler_raw = 0.0;      // fraction of Neg_s scoring >= tau
    double r_ler_filtered = 0.0; // same rate over the variance-surviving subset
};

struct HardNegativeConfig {
    std::vector<std::size_t> levels{1, 2, 4, 8};
    double tau = 0.5;
    double discard_fraction = 0.6;
    VarianceDiscard direction = VarianceDiscard::lowest;
    std::uint64_t seed = 1;
};

// Builds Neg_s per difficulty level: for each training positive (u,v), draw s
// random non-neighbors j of u and keep the (u,j) the final pretrained model
// scores highest. R_ler is tracked per recorded epoch; the filtered variant
// applies the variance ranking within Neg_s.
inline std::vector<HardNegativeRow> hard_negative_experiment(
    const Dataset& ds, const std::vector<Snapshot>& history, const SnapshotSet& last5,
    const HardNegativeConfig& cfg) {
    if (history.empty()) throw std::invalid_argument("hard_negative_experiment: no snapshots");
    last5.validate();
    const GraphContext ctx = make_context(ds.graph, ds.features);
    const ModelParams& final_params = history.back().params;
    const Matrix h_final = forward(final_params, ctx).embeddings();

    std::vector<NodePair> positives;
    for (const LabeledPair& lp : ds.train)
        if (lp.label) positives.push_back(lp.pair);

    const NodeId n = ds.graph.num_nodes();
    std::vector<HardNegativeRow> rows;
    for (std::size_t s : cfg.levels) {
        if (s == 0) throw std::invalid_argument("hard_negative_experiment: level must be >= 1");
        Rng rng(derive_seed(cfg.seed, "hardneg", s));
        std::vector<NodePair> neg_set;
        for (const NodePair& pos : positives) {
            const NodeId u = pos.u;
            if (ds.graph.degree(u) + 1 >= n)
                throw std::runtime_error("hard_negative_experiment: node has no non-neighbors");
            NodePair best_pair(u, u == 0 ? 1 : 0);
            double best_score = -1.0;
            for (std::size_t k = 0; k < s; ++k) {
                NodeId j;
                do {
                    j = static_cast<NodeId>(rng.uniform_index(n));
                } while (j == u || ds.graph.has_edge(u, j));
                const NodePair cand(u, j);
                const double score = pair_forward(final_params, h_final, cand).score;
                if (score > best_score) {
                    best_score = score;
                    best_pair = cand;
                }
            }
            neg_set.push_back(best_pair);
        }

        // variance of each member over the last-5 snapshot scores
        std::vector<CandidateEdge> scored = score_candidates(last5, ds, neg_set);
        std::vector<std::size_t> rank(scored.size());
        std::iota(rank.begin(), rank.end(), 0);
        std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
            if (scored[a].norm_variance != scored[b].norm_variance)
                return scored[a].norm_variance < scored[b].norm_variance;
            return scored[a].pair < scored[b].pair;
        });
        const std::size_t drop =
            static_cast<std::size_t>(cfg.discard_fraction * double(scored.size()));
        std::vector<char> surviving(scored.size(), 1);
        for (std::size_t i = 0; i < drop; ++i) {
            const std::size_t idx = cfg.direction == VarianceDiscard::lowest
                                        ? rank[i]
                                        : rank[scored.size() - 1 - i];
            surviving[idx] = 0;
        }

        for (const Snapshot& snap : history) {
            const Matrix h = forward(snap.params, ctx).embeddings();
            std::size_t above = 0, kept_above = 0, kept_total = 0;
            for (std::size_t i = 0; i < neg_set.size(); ++i) {
                const double p = pair_forward(snap.params, h, neg_set[i]).score;
                if (p >= cfg.tau) ++above;
                if (surviving[i]) {
                    ++kept_total;
                    if (p >= cfg.tau) ++kept_above;
                }
            }
            HardNegativeRow row;
            row.epoch = snap.epoch;
            row.difficulty = s;
            row.r_ler_raw = neg_set.empty() ? 0.0 : double(above) / double(neg_set.size());
            row.r_ler_filtered = kept_total == 0 ? 0.0 : double(kept_above) / double(kept_total);
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace ltlp
