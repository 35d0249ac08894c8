#pragma once

// Evaluation: AUC, Hits@K, accuracy, the head/tail decomposition by common
// neighbors, bias, ten-bucket correlation tables and CN-distribution reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ltlp/dataset.hpp"
#include "ltlp/graph.hpp"

namespace ltlp {

// Probability that a random positive outscores a random negative, ties
// counted 1/2. Rank-statistic (Mann-Whitney) formulation with average ranks.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("auc: bad input sizes");
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y != 0);
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auc: needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * double(i + 1 + j); // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] != 0) pos_rank_sum += avg_rank;
        i = j;
    }
    return (pos_rank_sum - 0.5 * double(n_pos) * double(n_pos + 1)) /
           (double(n_pos) * double(n_neg));
}

// Fraction of positives scoring strictly above the K-th highest negative.
inline double hits_at_k(std::vector<double> pos_scores, std::vector<double> neg_scores,
                        std::size_t k) {
    if (k == 0 || neg_scores.size() < k)
        throw std::invalid_argument("hits_at_k: need at least K negatives");
    std::nth_element(neg_scores.begin(), neg_scores.begin() + (k - 1), neg_scores.end(),
                     std::greater<double>());
    const double cutoff = neg_scores[k - 1];
    std::size_t hits = 0;
    for (double s : pos_scores) hits += (s > cutoff);
    return pos_scores.empty() ? 0.0 : double(hits) / double(pos_scores.size());
}

// Head iff the pair has one or more common neighbors in the given graph
// (the ORIGINAL training graph — callers must not pass the augmented one,
// or the metric's denominator shifts between baseline and LTLP).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> head_tail_split(
    const std::vector<LabeledPair>& pairs, const Graph& g) {
    std::vector<std::size_t> head, tail;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (common_neighbor_count(g, pairs[i].pair) >= 1)
            head.push_back(i);
        else
            tail.push_back(i);
    }
    return {head, tail};
}

inline double accuracy(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold = 0.5) {
    if (scores.empty() || scores.size() != labels.size())
        throw std::invalid_argument("accuracy: bad input sizes");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        correct += ((scores[i] >= threshold) == (labels[i] != 0));
    return double(correct) / double(scores.size());
}

// B = Var(Acc_h, Acc_t), population form: ((a-b)/2)^2.
inline double bias(double acc_h, double acc_t) {
    const double d = 0.5 * (acc_h - acc_t);
    return d * d;
}

struct MetricsReport {
    double auc = 0.0;
    std::map<std::size_t, double> hits_at_k;
    double acc_head = 0.0;
    double acc_tail = 0.0;
    double acc_mean = 0.0;
    double bias = 0.0;
    std::size_t head_count = 0;
    std::size_t tail_count = 0;
    double acc_overall = 0.0;
};

// Assemble the full report from per-pair test scores. head/tail membership
// comes from `structure_graph` (the pre-augmentation training graph).
inline MetricsReport compute_metrics(const std::vector<LabeledPair>& test,
                                     const std::vector<double>& scores,
                                     const Graph& structure_graph,
                                     const std::vector<std::size_t>& hits_ks = {}) {
    if (test.size() != scores.size()) throw std::invalid_argument("compute_metrics: size mismatch");
    std::vector<int> labels(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) labels[i] = test[i].label;

    MetricsReport r;
    r.auc = auc(scores, labels);
    r.acc_overall = accuracy(scores, labels);

    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < test.size(); ++i)
        (labels[i] ? pos : neg).push_back(scores[i]);
    for (std::size_t k : hits_ks)
        if (k > 0 && neg.size() >= k) r.hits_at_k[k] = hits_at_k(pos, neg, k);

    auto [head, tail] = head_tail_split(test, structure_graph);
    r.head_count = head.size();
    r.tail_count = tail.size();
    auto group_acc = [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) return 0.0;
        std::vector<double> s;
        std::vector<int> y;
        for (std::size_t i : idx) {
            s.push_back(scores[i]);
            y.push_back(labels[i]);
        }
        return accuracy(s, y);
    };
    r.acc_head = group_acc(head);
    r.acc_tail = group_acc(tail);
    r.acc_mean = 0.5 * (r.acc_head + r.acc_tail);
    r.bias = bias(r.acc_head, r.acc_tail);
    return r;
}

// ------------------------------------------------------------------
// ten-bucket analysis

enum class BucketMeasure { degree_pair, common_neighbors };

struct Bucket {
    double lo = 0.0, hi = 0.0; // measure range within the bucket
    std::size_t count = 0;
    double accuracy = 0.0;
};

struct BucketTable {
    BucketMeasure measure = BucketMeasure::degree_pair;
    std::vector<Bucket> buckets; // exactly 10
};

// Sort test pairs ascending by the measure and cut into 10 equal-count
// buckets; the remainder goes to the highest buckets. Stable on ties
// (canonical pair order breaks them).
inline BucketTable bucket_analysis(const std::vector<LabeledPair>& pairs,
                                   const std::vector<double>& scores, const Graph& g,
                                   BucketMeasure measure) {
    if (pairs.size() < 10) throw std::invalid_argument("bucket_analysis: need at least 10 pairs");
    if (pairs.size() != scores.size())
        throw std::invalid_argument("bucket_analysis: size mismatch");
    std::vector<std::size_t> m(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i)
        m[i] = measure == BucketMeasure::degree_pair ? degree_pair(g, pairs[i].pair)
                                                     : common_neighbor_count(g, pairs[i].pair);
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (m[a] != m[b]) return m[a] < m[b];
        return pairs[a].pair < pairs[b].pair;
    });

    BucketTable table;
    table.measure = measure;
    const std::size_t q = pairs.size() / 10, rem = pairs.size() % 10;
    std::size_t at = 0;
    for (std::size_t b = 0; b < 10; ++b) {
        const std::size_t size = q + (b >= 10 - rem ? 1 : 0);
        Bucket bk;
        bk.count = size;
        bk.lo = double(m[order[at]]);
        bk.hi = double(m[order[at + size - 1]]);
        std::size_t correct = 0;
        for (std::size_t i = at; i < at + size; ++i) {
            const std::size_t idx = order[i];
            correct += ((scores[idx] >= 0.5) == (pairs[idx].label != 0));
        }
        bk.accuracy = double(correct) / double(size);
        table.buckets.push_back(bk);
        at += size;
    }
    return table;
}

// ------------------------------------------------------------------
// CN distribution shift

struct CnDistribution {
    std::map<std::size_t, std::size_t> before; // CN count -> pairs
    std::map<std::size_t, std::size_t> after;
    std::size_t migrated_tail_to_head = 0; // pairs moving from CN=0 to CN>=1
};

inline CnDistribution cn_distribution(const std::vector<LabeledPair>& pairs,
                                      const Graph& g_before, const Graph& g_after) {
    if (g_before.num_nodes() != g_after.num_nodes())
        throw std::invalid_argument("cn_distribution: node sets differ");
    CnDistribution d;
    for (const LabeledPair& lp : pairs) {
        const std::size_t b = common_neighbor_count(g_before, lp.pair);
        const std::size_t a = common_neighbor_count(g_after, lp.pair);
        ++d.before[b];
        ++d.after[a];
        if (b == 0 && a >= 1) ++d.migrated_tail_to_head;
    }
    return d;
}

} // namespace ltlp
