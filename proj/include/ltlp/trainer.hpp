#pragma once

// Loss functions (cross-entropy, representation-enhancement, combined), the
// pretraining phase that memorizes the last five epoch states, and the
// continued-training phase on the augmented graph. Message passing is
// full-batch; pair losses are mini-batched; training negatives are resampled
// every epoch from the full graph's non-edges.

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ltlp/dataset.hpp"
#include "ltlp/encoder.hpp"
#include "ltlp/eval.hpp"

namespace ltlp {

enum class CenterMode {
    joint, // centers are parameters trained through the -2(z-c) gradient
    ema,   // centers track the exponential moving average of class means
};

struct TrainConfig {
    int epochs_pretrain = 120;
    int epochs_continue = 50;
    double varphi = 0.7; // weight between L_ce and L_re
    double lr = 0.01;
    int batch_size = 1024;
    std::uint64_t seed = 1;
    CenterMode center_mode = CenterMode::joint;
    double center_ema_decay = 0.9;

    void validate() const {
        if (epochs_pretrain < 5)
            throw std::invalid_argument("TrainConfig: epochs_pretrain must be >= 5");
        if (epochs_continue < 0) throw std::invalid_argument("TrainConfig: negative epochs");
        if (!(varphi >= 0.0 && varphi <= 1.0))
            throw std::invalid_argument("TrainConfig: varphi must be in [0,1]");
        if (batch_size < 1 || lr <= 0) throw std::invalid_argument("TrainConfig: bad lr/batch");
    }
};

// ------------------------------------------------------------------
// losses

inline double ce_loss(double p, int y) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("ce_loss: p outside (0,1)");
    return y ? -std::log(p) : -std::log(1.0 - p);
}

// d ce / dp
inline double ce_loss_grad(double p, int y) {
    return y ? -1.0 / p : 1.0 / (1.0 - p);
}

// ||z - c_y||^2
inline double re_loss(std::span<const double> z, std::span<const double> c) {
    if (z.size() != c.size()) throw std::invalid_argument("re_loss: shape mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double d = z[j] - c[j];
        s += d * d;
    }
    return s;
}

struct LossValue {
    double total = 0.0;
    double ce = 0.0; // batch mean of the cross-entropy terms
    double re = 0.0; // batch mean of the center distances
};

// phi*L_ce + (1-phi)*L_re over one batch of pairs, means over the batch.
// Shares the exact forward path with the gradient route below, so finite
// differences of this function are the oracle for that route.
inline LossValue batch_loss(const ModelParams& params, const GraphContext& ctx,
                            std::span<const LabeledPair> batch, double varphi) {
    if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
    const ForwardCache cache = forward(params, ctx);
    const Matrix& h = cache.embeddings();
    double ce_sum = 0.0, re_sum = 0.0;
    for (const LabeledPair& lp : batch) {
        const PairEmbedding pe = pair_forward(params, h, lp.pair);
        ce_sum += ce_loss(pe.score, lp.label);
        re_sum += re_loss(pe.z, params.center(lp.label));
    }
    const double inv_b = 1.0 / double(batch.size());
    LossValue out;
    out.ce = ce_sum * inv_b;
    out.re = re_sum * inv_b;
    out.total = varphi * out.ce + (1.0 - varphi) * out.re;
    return out;
}

// Same quantity plus exact gradients for every parameter, centers included.
inline std::pair<LossValue, Gradients> batch_loss_and_gradients(const ModelParams& params,
                                                                const GraphContext& ctx,
                                                                std::span<const LabeledPair> batch,
                                                                double varphi) {
    if (batch.empty()) throw std::invalid_argument("batch_loss_and_gradients: empty batch");
    const ForwardCache cache = forward(params, ctx);
    const Matrix& h = cache.embeddings();
    const std::size_t m = params.hidden();
    Matrix embedding_grad(h.rows(), h.cols());
    Gradients grads = zero_gradients(params);
    const double inv_b = 1.0 / double(batch.size());
    double ce_sum = 0.0, re_sum = 0.0;
    for (const LabeledPair& lp : batch) {
        const PairEmbedding pe = pair_forward(params, h, lp.pair);
        ce_sum += ce_loss(pe.score, lp.label);
        const std::vector<double>& c = params.center(lp.label);
        re_sum += re_loss(pe.z, c);

        // d(ce∘clamp∘sigmoid)/dlogit collapses to (p - y) while unclamped and
        // to 0 in the clamped region, matching the piecewise-constant loss.
        const double dce_dlogit = pe.clamped ? 0.0 : pe.raw - double(lp.label);
        const double a = varphi * dce_dlogit * inv_b;
        if (params.decoder == DecoderKind::hadamard_linear) {
            for (std::size_t j = 0; j < m; ++j) grads.decoder_w[j] += a * pe.z[j];
            grads.decoder_b += a;
        }
        auto hu = h.row(lp.pair.u);
        auto hv = h.row(lp.pair.v);
        double* gu = embedding_grad.row(lp.pair.u).data();
        double* gv = embedding_grad.row(lp.pair.v).data();
        std::vector<double>& gc = grads.center(lp.label);
        for (std::size_t j = 0; j < m; ++j) {
            const double r = (1.0 - varphi) * 2.0 * (pe.z[j] - c[j]) * inv_b;
            const double dz = a * params.decoder_w[j] + r;
            gc[j] -= r;
            gu[j] += dz * hv[j];
            gv[j] += dz * hu[j];
        }
    }
    backward(params, ctx, cache, std::move(embedding_grad), grads);
    LossValue out;
    out.ce = ce_sum * inv_b;
    out.re = re_sum * inv_b;
    out.total = varphi * out.ce + (1.0 - varphi) * out.re;
    return {out, std::move(grads)};
}

// ------------------------------------------------------------------
// training phases

struct Snapshot {
    ModelParams params;
    int epoch = 0; // 1-based
};

// The five parameter states memorized at the end of pretraining; the last one
// is the final pretrained model.
struct SnapshotSet {
    std::vector<Snapshot> snapshots;

    void validate() const {
        if (snapshots.size() != 5)
            throw std::invalid_argument("SnapshotSet: expected exactly 5 snapshots");
        for (std::size_t i = 1; i < snapshots.size(); ++i)
            if (snapshots[i].epoch <= snapshots[i - 1].epoch)
                throw std::invalid_argument("SnapshotSet: epochs not strictly increasing");
    }
    const ModelParams& final_params() const { return snapshots.back().params; }
};

struct EpochLog {
    int epoch = 0;
    double l_ce = 0.0;
    double l_re = 0.0;
    double val_auc = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<Snapshot> history; // last five epochs, or all when requested
    std::vector<EpochLog> logs;
};

namespace detail {

inline void write_log_line(std::ostream* os, const EpochLog& e) {
    if (!os) return;
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "{\"epoch\":%d,\"l_ce\":%.17g,\"l_re\":%.17g,\"val_auc\":%.17g}", e.epoch,
                  e.l_ce, e.l_re, e.val_auc);
    (*os) << buf << '\n';
}

inline double validation_auc(const ModelParams& params, const GraphContext& ctx,
                             const std::vector<LabeledPair>& val) {
    if (val.empty()) return 0.0;
    const Matrix h = forward(params, ctx).embeddings();
    std::vector<double> scores(val.size());
    std::vector<int> labels(val.size());
    for (std::size_t i = 0; i < val.size(); ++i) {
        scores[i] = pair_forward(params, h, val[i].pair).score;
        labels[i] = val[i].label;
    }
    return auc(scores, labels);
}

} // namespace detail

// One training phase over `message_graph`. Epoch numbering continues from
// epoch_base so a continued phase draws the same per-epoch negative streams
// a plain run of the same length would.
inline TrainResult train_phase(const Dataset& ds, const Graph& message_graph, ModelParams params,
                               int epochs, double varphi, const TrainConfig& cfg, int epoch_base,
                               bool record_all = false, std::ostream* log_stream = nullptr) {
    cfg.validate();
    const GraphContext ctx = make_context(message_graph, ds.features);
    AdamState adam = init_adam(params);

    std::vector<NodePair> positives;
    for (const LabeledPair& lp : ds.train)
        if (lp.label) positives.push_back(lp.pair);
    std::size_t neg_count = ds.train.size() - positives.size();
    if (positives.empty()) throw std::runtime_error("train_phase: no training positives");

    TrainResult result;
    result.params = std::move(params);
    for (int e = 1; e <= epochs; ++e) {
        const int epoch = epoch_base + e;
        std::vector<LabeledPair> pairs;
        pairs.reserve(positives.size() + neg_count);
        for (const NodePair& p : positives) pairs.push_back({p, 1});
        for (const NodePair& p : sample_training_negatives(
                 ds, neg_count, derive_seed(cfg.seed, "train-negatives", std::uint64_t(epoch))))
            pairs.push_back({p, 0});
        Rng order_rng(derive_seed(cfg.seed, "batch-order", std::uint64_t(epoch)));
        order_rng.shuffle(pairs);

        double ce_sum = 0.0, re_sum = 0.0;
        for (std::size_t at = 0; at < pairs.size(); at += std::size_t(cfg.batch_size)) {
            const std::size_t len = std::min<std::size_t>(cfg.batch_size, pairs.size() - at);
            std::span<const LabeledPair> batch(pairs.data() + at, len);
            auto [loss, grads] = batch_loss_and_gradients(result.params, ctx, batch, varphi);
            ce_sum += loss.ce * double(len);
            re_sum += loss.re * double(len);
            adam_step(result.params, grads, adam, cfg.lr,
                      cfg.center_mode == CenterMode::joint);
            if (cfg.center_mode == CenterMode::ema && varphi < 1.0) {
                // pull each center toward its class mean in this batch
                const Matrix h = forward(result.params, ctx).embeddings();
                const std::size_t m = result.params.hidden();
                std::vector<double> mean0(m, 0.0), mean1(m, 0.0);
                std::size_t n0 = 0, n1 = 0;
                for (const LabeledPair& lp : batch) {
                    const PairEmbedding pe = pair_forward(result.params, h, lp.pair);
                    auto& mean = lp.label ? mean1 : mean0;
                    for (std::size_t j = 0; j < m; ++j) mean[j] += pe.z[j];
                    ++(lp.label ? n1 : n0);
                }
                auto ema = [&](std::vector<double>& c, const std::vector<double>& mean,
                               std::size_t n) {
                    if (!n) return;
                    for (std::size_t j = 0; j < c.size(); ++j)
                        c[j] = cfg.center_ema_decay * c[j] +
                               (1.0 - cfg.center_ema_decay) * mean[j] / double(n);
                };
                ema(result.params.center_neg, mean0, n0);
                ema(result.params.center_pos, mean1, n1);
            }
        }
        EpochLog log;
        log.epoch = epoch;
        log.l_ce = ce_sum / double(pairs.size());
        log.l_re = re_sum / double(pairs.size());
        if (!std::isfinite(log.l_ce) || !std::isfinite(log.l_re))
            throw std::runtime_error("train_phase: loss diverged at epoch " +
                                     std::to_string(epoch));
        log.val_auc = detail::validation_auc(result.params, ctx, ds.val);
        detail::write_log_line(log_stream, log);
        result.logs.push_back(log);
        if (record_all || e > epochs - 5) result.history.push_back({result.params, epoch});
    }
    return result;
}

struct PretrainResult {
    ModelParams params;
    SnapshotSet snapshots;
    std::vector<EpochLog> logs;
    std::vector<Snapshot> history; // every epoch when record_all, else the last five
};

// Pretraining phase: train with cross-entropy only on the original graph and
// memorize the last five epoch states.
inline PretrainResult pretrain(const Dataset& ds, const TrainConfig& cfg,
                               const EncoderConfig& encoder_cfg,
                               std::ostream* log_stream = nullptr, bool record_all = false) {
    cfg.validate();
    EncoderConfig ecfg = encoder_cfg;
    ecfg.feature_dim = ds.features.cols;
    ecfg.seed = derive_seed(cfg.seed, "init");
    TrainResult r = train_phase(ds, ds.graph, init_params(ecfg), cfg.epochs_pretrain,
                                /*varphi=*/1.0, cfg, /*epoch_base=*/0, record_all, log_stream);
    PretrainResult out;
    out.params = std::move(r.params);
    out.logs = std::move(r.logs);
    out.snapshots.snapshots.assign(r.history.end() - 5, r.history.end());
    out.snapshots.validate();
    out.history = std::move(r.history);
    return out;
}

// Continued phase: train on the (usually augmented) graph with
// the combined loss. The training pair set is unchanged; only message passing
// sees the new edges. Optimizer state starts fresh at the phase boundary.
inline TrainResult continue_train(const Dataset& ds_aug, ModelParams init, const TrainConfig& cfg,
                                  std::ostream* log_stream = nullptr) {
    cfg.validate();
    if (cfg.epochs_continue == 0) {
        TrainResult r;
        r.params = std::move(init);
        return r;
    }
    return train_phase(ds_aug, ds_aug.graph, std::move(init), cfg.epochs_continue, cfg.varphi,
                       cfg, /*epoch_base=*/cfg.epochs_pretrain, /*record_all=*/false, log_stream);
}

// ------------------------------------------------------------------
// snapshot persistence

inline std::vector<NamedTensor> snapshots_to_tensors(const SnapshotSet& set) {
    set.validate();
    std::vector<NamedTensor> out;
    NamedTensor epochs{"snapshots/epochs", {set.snapshots.size()}, {}};
    for (const Snapshot& s : set.snapshots) epochs.data.push_back(double(s.epoch));
    out.push_back(std::move(epochs));
    for (std::size_t i = 0; i < set.snapshots.size(); ++i) {
        auto t = params_to_tensors(set.snapshots[i].params, "snap" + std::to_string(i) + "/");
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

inline SnapshotSet snapshots_from_tensors(const std::vector<NamedTensor>& tensors) {
    SnapshotSet set;
    const NamedTensor* epochs = nullptr;
    for (const NamedTensor& t : tensors)
        if (t.name == "snapshots/epochs") epochs = &t;
    if (!epochs) throw std::runtime_error("snapshots_from_tensors: missing epoch tensor");
    for (std::size_t i = 0; i < epochs->data.size(); ++i) {
        Snapshot s;
        s.params = params_from_tensors(tensors, "snap" + std::to_string(i) + "/");
        s.epoch = int(epochs->data[i]);
        set.snapshots.push_back(std::move(s));
    }
    set.validate();
    return set;
}

} // namespace ltlp
