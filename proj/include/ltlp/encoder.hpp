#pragma once

// Minimal L-layer GCN encoder with a Hadamard pair decoder: symmetric
// normalized adjacency with self-loops, ReLU between layers, linear last
// layer, logistic score over the elementwise product of the endpoint
// embeddings. Forward, analytic backward and Adam updates, all in double
// precision. Class centers for the representation regularizer live in the
// parameter set so one optimizer step covers everything.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ltlp/graph.hpp"
#include "ltlp/io.hpp"
#include "ltlp/linalg.hpp"
#include "ltlp/rng.hpp"

namespace ltlp {

enum class DecoderKind {
    hadamard_linear, // p = sigmoid(w · (h_u ⊙ h_v) + b), w and b trained
    inner_product,   // p = sigmoid(h_u · h_v), decoder fixed
};

struct EncoderConfig {
    int layers = 3;
    int hidden = 256;
    std::size_t feature_dim = 0; // set from the dataset
    DecoderKind decoder = DecoderKind::hadamard_linear;
    std::uint64_t seed = 1;
};

constexpr double kScoreClamp = 1e-7; // keeps log() and the variance mean-division safe

struct ModelParams {
    std::vector<Matrix> layer_weights; // f×m, then m×m
    std::vector<double> decoder_w;     // length m
    double decoder_b = 0.0;
    std::vector<double> center_neg; // c0
    std::vector<double> center_pos; // c1
    DecoderKind decoder = DecoderKind::hadamard_linear;

    std::size_t hidden() const { return decoder_w.size(); }
    std::size_t layers() const { return layer_weights.size(); }

    const std::vector<double>& center(int label) const { return label ? center_pos : center_neg; }
    std::vector<double>& center(int label) { return label ? center_pos : center_neg; }
};

// Glorot-style uniform init, seeded.
inline ModelParams init_params(const EncoderConfig& cfg) {
    if (cfg.layers < 1) throw std::invalid_argument("init_params: need at least one layer");
    if (cfg.hidden < 1 || cfg.feature_dim == 0)
        throw std::invalid_argument("init_params: bad dimensions");
    ModelParams p;
    p.decoder = cfg.decoder;
    Rng rng(derive_seed(cfg.seed, "init"));
    std::size_t in_dim = cfg.feature_dim;
    for (int l = 0; l < cfg.layers; ++l) {
        const std::size_t out_dim = static_cast<std::size_t>(cfg.hidden);
        Matrix w(in_dim, out_dim);
        const double s = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
        for (double& x : w.data()) x = rng.uniform(-s, s);
        p.layer_weights.push_back(std::move(w));
        in_dim = out_dim;
    }
    const std::size_t m = static_cast<std::size_t>(cfg.hidden);
    p.decoder_w.assign(m, 1.0);
    if (cfg.decoder == DecoderKind::hadamard_linear) {
        const double s = std::sqrt(6.0 / static_cast<double>(m + 1));
        for (double& x : p.decoder_w) x = rng.uniform(-s, s);
    }
    p.decoder_b = 0.0;
    p.center_neg.assign(m, 0.0);
    p.center_pos.assign(m, 0.0);
    return p;
}

// Â = D̃^{-1/2} (A + I) D̃^{-1/2} with D̃ the degree of A + I. Isolated nodes
// end up with a lone self-loop coefficient of 1.
inline SparseMatrix normalize_adjacency(const Graph& g) {
    const NodeId n = g.num_nodes();
    std::vector<double> inv_sqrt(n);
    for (NodeId v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(double(g.degree(v)) + 1.0);
    SparseMatrix a;
    a.rows = a.cols = n;
    a.offsets.assign(1, 0);
    for (NodeId v = 0; v < n; ++v) {
        auto ns = g.neighbors(v);
        std::size_t i = 0;
        bool self_done = false;
        auto push = [&](NodeId u) {
            a.col_index.push_back(u);
            a.values.push_back(inv_sqrt[v] * inv_sqrt[u]);
        };
        for (; i < ns.size(); ++i) {
            if (!self_done && ns[i] > v) {
                push(v);
                self_done = true;
            }
            push(ns[i]);
        }
        if (!self_done) push(v);
        a.offsets.push_back(a.col_index.size());
    }
    return a;
}

// Everything that depends only on (graph, features); built once per phase and
// shared across epochs. ax = Â·X is cached because the first layer reuses it
// every forward.
struct GraphContext {
    SparseMatrix norm_adj;
    SparseMatrix features;
    SparseMatrix ax;
};

inline GraphContext make_context(const Graph& g, SparseMatrix features) {
    if (features.rows != g.num_nodes())
        throw std::invalid_argument("make_context: feature rows != num_nodes");
    GraphContext ctx;
    ctx.norm_adj = normalize_adjacency(g);
    ctx.features = std::move(features);
    ctx.ax = spsp(ctx.norm_adj, ctx.features);
    return ctx;
}

// Per-layer pre-activations S_l and aggregated inputs P_l = Â·H_{l-1}; both
// are needed by backward. P_1 is ctx.ax and is not duplicated here.
struct ForwardCache {
    std::vector<Matrix> pre; // S_l, l = 1..L; H_L = pre.back() (linear last layer)
    std::vector<Matrix> agg; // P_l for l >= 2

    const Matrix& embeddings() const { return pre.back(); }
};

inline ForwardCache forward(const ModelParams& params, const GraphContext& ctx) {
    ForwardCache cache;
    const std::size_t L = params.layers();
    Matrix h; // H_l after activation
    for (std::size_t l = 0; l < L; ++l) {
        Matrix s;
        if (l == 0) {
            s = spmm(ctx.ax, params.layer_weights[0]);
        } else {
            Matrix p = spmm(ctx.norm_adj, h);
            s = matmul(p, params.layer_weights[l]);
            cache.agg.push_back(std::move(p));
        }
        if (l + 1 < L) {
            h = s;
            for (double& x : h.data())
                if (x < 0.0) x = 0.0;
        }
        cache.pre.push_back(std::move(s));
    }
    if (!cache.pre.back().all_finite())
        throw std::runtime_error("forward: non-finite embeddings (training diverged?)");
    return cache;
}

struct PairEmbedding {
    std::vector<double> z; // h_u ⊙ h_v
    double score = 0.0;    // clamped probability
    double raw = 0.0;      // sigmoid output before clamping
    bool clamped = false;
};

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Symmetric in (u,v) by construction: z = h_u ⊙ h_v.
inline PairEmbedding pair_forward(const ModelParams& params, const Matrix& embeddings,
                                  const NodePair& p) {
    PairEmbedding out;
    auto hu = embeddings.row(p.u);
    auto hv = embeddings.row(p.v);
    out.z.resize(params.hidden());
    for (std::size_t j = 0; j < out.z.size(); ++j) out.z[j] = hu[j] * hv[j];
    const double logit = dot(out.z, params.decoder_w) + params.decoder_b;
    out.raw = sigmoid(logit);
    out.score = std::min(1.0 - kScoreClamp, std::max(kScoreClamp, out.raw));
    out.clamped = out.score != out.raw;
    return out;
}

struct Gradients {
    std::vector<Matrix> layer_weights;
    std::vector<double> decoder_w;
    double decoder_b = 0.0;
    std::vector<double> center_neg;
    std::vector<double> center_pos;

    std::vector<double>& center(int label) { return label ? center_pos : center_neg; }
};

inline Gradients zero_gradients(const ModelParams& p) {
    Gradients g;
    for (const Matrix& w : p.layer_weights) g.layer_weights.emplace_back(w.rows(), w.cols());
    g.decoder_w.assign(p.decoder_w.size(), 0.0);
    g.center_neg.assign(p.center_neg.size(), 0.0);
    g.center_pos.assign(p.center_pos.size(), 0.0);
    return g;
}

// Chains dL/dH_L back through the GCN layers, accumulating dL/dW_l.
// embedding_grad is consumed in place.
inline void backward(const ModelParams& params, const GraphContext& ctx,
                     const ForwardCache& cache, Matrix embedding_grad, Gradients& out) {
    const std::size_t L = params.layers();
    Matrix d = std::move(embedding_grad); // dL/dS_l, starting at l = L (linear layer)
    for (std::size_t l = L; l-- > 0;) {
        if (l + 1 < L) {
            // through the ReLU of layer l+1's input H_l
            const Matrix& s = cache.pre[l];
            for (std::size_t i = 0; i < d.data().size(); ++i)
                if (s.data()[i] <= 0.0) d.data()[i] = 0.0;
        }
        if (l == 0) {
            Matrix dw = spmm_transposed(ctx.ax, d);
            for (std::size_t i = 0; i < dw.data().size(); ++i)
                out.layer_weights[0].data()[i] += dw.data()[i];
        } else {
            Matrix dw = matmul_tn(cache.agg[l - 1], d);
            for (std::size_t i = 0; i < dw.data().size(); ++i)
                out.layer_weights[l].data()[i] += dw.data()[i];
            // dL/dH_{l-1} = Â · (dS_l · W_lᵀ); Â is symmetric
            d = spmm(ctx.norm_adj, matmul_nt(d, params.layer_weights[l]));
        }
    }
}

// ------------------------------------------------------------------
// Adam

struct AdamState {
    std::vector<Matrix> m_layers, v_layers;
    std::vector<double> m_dec, v_dec;
    double m_b = 0.0, v_b = 0.0;
    std::vector<double> m_c0, v_c0, m_c1, v_c1;
    std::int64_t t = 0;
};

inline AdamState init_adam(const ModelParams& p) {
    AdamState s;
    for (const Matrix& w : p.layer_weights) {
        s.m_layers.emplace_back(w.rows(), w.cols());
        s.v_layers.emplace_back(w.rows(), w.cols());
    }
    s.m_dec.assign(p.decoder_w.size(), 0.0);
    s.v_dec.assign(p.decoder_w.size(), 0.0);
    s.m_c0.assign(p.center_neg.size(), 0.0);
    s.v_c0.assign(p.center_neg.size(), 0.0);
    s.m_c1.assign(p.center_pos.size(), 0.0);
    s.v_c1.assign(p.center_pos.size(), 0.0);
    return s;
}

namespace detail {

inline void adam_update(double* theta, const double* g, double* m, double* v, std::size_t n,
                        double lr, double bc1, double bc2) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(g[i])) throw std::runtime_error("adam_step: non-finite gradient");
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
}

} // namespace detail

inline void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr,
                      bool update_centers = true) {
    ++state.t;
    const double bc1 = 1.0 - std::pow(0.9, double(state.t));
    const double bc2 = 1.0 - std::pow(0.999, double(state.t));
    for (std::size_t l = 0; l < params.layer_weights.size(); ++l)
        detail::adam_update(params.layer_weights[l].data().data(),
                            grads.layer_weights[l].data().data(),
                            state.m_layers[l].data().data(), state.v_layers[l].data().data(),
                            params.layer_weights[l].data().size(), lr, bc1, bc2);
    if (params.decoder == DecoderKind::hadamard_linear) {
        detail::adam_update(params.decoder_w.data(), grads.decoder_w.data(), state.m_dec.data(),
                            state.v_dec.data(), params.decoder_w.size(), lr, bc1, bc2);
        detail::adam_update(&params.decoder_b, &grads.decoder_b, &state.m_b, &state.v_b, 1, lr,
                            bc1, bc2);
    }
    if (update_centers) {
        detail::adam_update(params.center_neg.data(), grads.center_neg.data(), state.m_c0.data(),
                            state.v_c0.data(), params.center_neg.size(), lr, bc1, bc2);
        detail::adam_update(params.center_pos.data(), grads.center_pos.data(), state.m_c1.data(),
                            state.v_c1.data(), params.center_pos.size(), lr, bc1, bc2);
    }
}

// ------------------------------------------------------------------
// checkpoint conversion

inline std::vector<NamedTensor> params_to_tensors(const ModelParams& p, const std::string& prefix = "") {
    std::vector<NamedTensor> out;
    for (std::size_t l = 0; l < p.layer_weights.size(); ++l) {
        const Matrix& w = p.layer_weights[l];
        out.push_back({prefix + "layer/" + std::to_string(l), {w.rows(), w.cols()}, w.data()});
    }
    out.push_back({prefix + "decoder/w", {p.decoder_w.size()}, p.decoder_w});
    out.push_back({prefix + "decoder/b", {1}, {p.decoder_b}});
    out.push_back({prefix + "center/neg", {p.center_neg.size()}, p.center_neg});
    out.push_back({prefix + "center/pos", {p.center_pos.size()}, p.center_pos});
    out.push_back({prefix + "decoder/kind", {1}, {p.decoder == DecoderKind::inner_product ? 1.0 : 0.0}});
    return out;
}

inline ModelParams params_from_tensors(const std::vector<NamedTensor>& tensors,
                                       const std::string& prefix = "") {
    ModelParams p;
    std::vector<const NamedTensor*> layers;
    for (const NamedTensor& t : tensors) {
        if (t.name.rfind(prefix, 0) != 0) continue;
        const std::string name = t.name.substr(prefix.size());
        if (name.rfind("layer/", 0) == 0)
            layers.push_back(&t);
        else if (name == "decoder/w")
            p.decoder_w = t.data;
        else if (name == "decoder/b")
            p.decoder_b = t.data.at(0);
        else if (name == "center/neg")
            p.center_neg = t.data;
        else if (name == "center/pos")
            p.center_pos = t.data;
        else if (name == "decoder/kind")
            p.decoder = t.data.at(0) != 0.0 ? DecoderKind::inner_product
                                            : DecoderKind::hadamard_linear;
    }
    std::sort(layers.begin(), layers.end(), [&](const NamedTensor* a, const NamedTensor* b) {
        return std::stoi(a->name.substr(prefix.size() + 6)) <
               std::stoi(b->name.substr(prefix.size() + 6));
    });
    for (const NamedTensor* t : layers) {
        Matrix w(t->shape.at(0), t->shape.at(1));
        w.data() = t->data;
        p.layer_weights.push_back(std::move(w));
    }
    if (p.layer_weights.empty() || p.decoder_w.empty())
        throw std::runtime_error("params_from_tensors: incomplete checkpoint");
    return p;
}

} // namespace ltlp
