#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ltlp/dataset.hpp"
#include "ltlp/encoder.hpp"
#include "ltlp/trainer.hpp"
#include "oracles.hpp"

using namespace ltlp;

namespace {

// random small instance: graph + sparse features + params
struct Instance {
    Graph graph;
    SparseMatrix features;
    GraphContext ctx;
    ModelParams params;
};

Instance random_instance(Rng& rng, NodeId n, std::size_t f, int layers, int hidden,
                         DecoderKind decoder = DecoderKind::hadamard_linear) {
    Instance inst;
    auto edges = oracle::random_edges(rng, n, 0.3);
    inst.graph = build_graph(edges, n);
    Matrix feats(n, f);
    for (double& x : feats.data()) x = rng.uniform(-1.0, 1.0);
    inst.features = to_sparse(feats);
    inst.ctx = make_context(inst.graph, inst.features);
    EncoderConfig cfg;
    cfg.layers = layers;
    cfg.hidden = hidden;
    cfg.feature_dim = f;
    cfg.decoder = decoder;
    cfg.seed = rng.next_u64();
    inst.params = init_params(cfg);
    return inst;
}

} // namespace

TEST_CASE("normalize_adjacency: isolated node and single edge") {
    Graph lonely = build_graph({}, 1);
    SparseMatrix a = normalize_adjacency(lonely);
    REQUIRE(a.nnz() == 1);
    CHECK(a.values[0] == doctest::Approx(1.0));

    Graph pair = build_graph({NodePair(0, 1)}, 2);
    SparseMatrix b = normalize_adjacency(pair);
    Matrix dense = to_dense(b);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(dense(i, j) == doctest::Approx(0.5));
}

TEST_CASE("normalize_adjacency matches the dense oracle and is symmetric") {
    Rng rng(500);
    for (int trial = 0; trial < 40; ++trial) {
        const NodeId n = 2 + NodeId(rng.uniform_index(31));
        auto edges = oracle::random_edges(rng, n, 0.25);
        Graph g = build_graph(edges, n);
        oracle::DenseGraph dg(n, edges);
        Matrix want = oracle::dense_normalized_adjacency(dg);
        Matrix got = to_dense(normalize_adjacency(g));
        REQUIRE(got.rows() == want.rows());
        for (std::size_t i = 0; i < got.rows(); ++i)
            for (std::size_t j = 0; j < got.cols(); ++j) {
                CHECK(got(i, j) == doctest::Approx(want(i, j)).epsilon(1e-12));
                CHECK(std::fabs(got(i, j) - got(j, i)) < 1e-12);
            }
    }
}

TEST_CASE("forward: all-zero weights give zero embeddings") {
    Rng rng(501);
    Instance inst = random_instance(rng, 12, 6, 3, 4);
    for (Matrix& w : inst.params.layer_weights) w.fill(0.0);
    Matrix h = forward(inst.params, inst.ctx).embeddings();
    for (double x : h.data()) CHECK(x == 0.0);
}

TEST_CASE("sparse forward equals the dense-matrix oracle") {
    Rng rng(502);
    for (int trial = 0; trial < 25; ++trial) {
        const NodeId n = 5 + NodeId(rng.uniform_index(28));
        const int layers = 1 + int(rng.uniform_index(3));
        Instance inst = random_instance(rng, n, 5, layers, 6);
        Matrix got = forward(inst.params, inst.ctx).embeddings();
        oracle::DenseGraph dg(n, inst.graph.edge_list());
        Matrix want = oracle::dense_forward(inst.params, oracle::dense_normalized_adjacency(dg),
                                            to_dense(inst.features));
        REQUIRE(got.rows() == want.rows());
        for (std::size_t i = 0; i < got.data().size(); ++i)
            CHECK(std::fabs(got.data()[i] - want.data()[i]) < 1e-10);
    }
}

TEST_CASE("forward is equivariant under node relabeling") {
    Rng rng(503);
    const NodeId n = 14;
    Instance inst = random_instance(rng, n, 6, 2, 5);

    // permute nodes, features, and edges consistently
    std::vector<NodeId> perm(n);
    for (NodeId v = 0; v < n; ++v) perm[v] = v;
    rng.shuffle(perm);
    std::vector<NodePair> perm_edges;
    for (const NodePair& e : inst.graph.edge_list())
        perm_edges.push_back(NodePair(perm[e.u], perm[e.v]));
    Matrix feats = to_dense(inst.features);
    Matrix perm_feats(n, feats.cols());
    for (NodeId v = 0; v < n; ++v)
        for (std::size_t j = 0; j < feats.cols(); ++j) perm_feats(perm[v], j) = feats(v, j);
    GraphContext perm_ctx = make_context(build_graph(perm_edges, n), to_sparse(perm_feats));

    Matrix h = forward(inst.params, inst.ctx).embeddings();
    Matrix hp = forward(inst.params, perm_ctx).embeddings();
    for (NodeId v = 0; v < n; ++v)
        for (std::size_t j = 0; j < h.cols(); ++j)
            CHECK(hp(perm[v], j) == doctest::Approx(h(v, j)).epsilon(1e-12));
}

TEST_CASE("pair_forward: zero embeddings score 0.5, orientation-invariant") {
    Rng rng(504);
    Instance inst = random_instance(rng, 10, 4, 2, 4);
    for (Matrix& w : inst.params.layer_weights) w.fill(0.0);
    inst.params.decoder_b = 0.0;
    Matrix h = forward(inst.params, inst.ctx).embeddings();
    CHECK(pair_forward(inst.params, h, NodePair(0, 1)).score == doctest::Approx(0.5));

    Instance live = random_instance(rng, 10, 4, 2, 4);
    Matrix hl = forward(live.params, live.ctx).embeddings();
    for (NodeId u = 0; u < 10; ++u)
        for (NodeId v = u + 1; v < 10; ++v) {
            const PairEmbedding a = pair_forward(live.params, hl, NodePair(u, v));
            const PairEmbedding b = pair_forward(live.params, hl, NodePair(v, u));
            CHECK(a.score == b.score);
            CHECK(a.z == b.z);
            CHECK(a.score > 0.0);
            CHECK(a.score < 1.0);
        }
}

TEST_CASE("pair_forward matches a scalar-by-scalar oracle") {
    Rng rng(505);
    Instance inst = random_instance(rng, 9, 5, 2, 6);
    Matrix h = forward(inst.params, inst.ctx).embeddings();
    const NodePair p(2, 7);
    const PairEmbedding pe = pair_forward(inst.params, h, p);
    double logit = inst.params.decoder_b;
    for (std::size_t j = 0; j < inst.params.hidden(); ++j) {
        const double z = h(p.u, j) * h(p.v, j);
        CHECK(pe.z[j] == doctest::Approx(z).epsilon(1e-14));
        logit += z * inst.params.decoder_w[j];
    }
    CHECK(pe.raw == doctest::Approx(1.0 / (1.0 + std::exp(-logit))).epsilon(1e-12));
}

TEST_CASE("backward: zero upstream gradient gives zero parameter gradients") {
    Rng rng(506);
    Instance inst = random_instance(rng, 11, 5, 3, 4);
    ForwardCache cache = forward(inst.params, inst.ctx);
    Gradients grads = zero_gradients(inst.params);
    backward(inst.params, inst.ctx, cache, Matrix(11, 4), grads);
    for (const Matrix& g : grads.layer_weights)
        for (double x : g.data()) CHECK(x == 0.0);
}

TEST_CASE("gradients: swapped pair orientation gives identical gradients") {
    Rng rng(507);
    Instance inst = random_instance(rng, 10, 4, 2, 5);
    std::vector<LabeledPair> fwd{{NodePair(1, 6), 1}, {NodePair(2, 8), 0}};
    std::vector<LabeledPair> rev{{NodePair(6, 1), 1}, {NodePair(8, 2), 0}};
    auto [la, ga] = batch_loss_and_gradients(inst.params, inst.ctx, fwd, 0.6);
    auto [lb, gb] = batch_loss_and_gradients(inst.params, inst.ctx, rev, 0.6);
    CHECK(la.total == lb.total);
    for (std::size_t l = 0; l < ga.layer_weights.size(); ++l)
        CHECK(ga.layer_weights[l].data() == gb.layer_weights[l].data());
    CHECK(ga.decoder_w == gb.decoder_w);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(508);
    int configs = 0;
    for (int trial = 0; configs < 12; ++trial) {
        const NodeId n = 5 + NodeId(rng.uniform_index(16));
        const int layers = 1 + int(trial % 3);
        const int hidden = trial % 2 ? 4 : 8;
        Instance inst = random_instance(rng, n, 4, layers, hidden);
        if (inst.graph.num_edges() < 4) continue;
        std::vector<LabeledPair> batch;
        for (int b = 0; b < 6; ++b) {
            NodeId u = NodeId(rng.uniform_index(n));
            NodeId v = NodeId(rng.uniform_index(n));
            if (u == v) continue;
            batch.push_back({NodePair(u, v), int(rng.uniform_index(2))});
        }
        if (batch.size() < 3) continue;
        const double varphi = trial % 4 == 0 ? 1.0 : rng.uniform(0.1, 0.9);
        auto checks = oracle::gradient_check(inst.params, inst.ctx, batch, varphi);
        for (const auto& c : checks) {
            INFO(c.name, " rel_l2=", c.rel_l2, " max_elem=", c.max_elem_rel);
            CHECK(c.rel_l2 < 1e-5);
            CHECK(c.max_elem_rel < 1e-5);
        }
        ++configs;
    }
}

TEST_CASE("gradcheck also holds for the inner-product decoder") {
    Rng rng(509);
    Instance inst = random_instance(rng, 12, 4, 2, 6, DecoderKind::inner_product);
    std::vector<LabeledPair> batch{{NodePair(0, 3), 1}, {NodePair(4, 9), 0}, {NodePair(2, 6), 1}};
    auto checks = oracle::gradient_check(inst.params, inst.ctx, batch, 0.5);
    for (const auto& c : checks) {
        INFO(c.name);
        CHECK(c.rel_l2 < 1e-5);
    }
}

TEST_CASE("adam: zero gradients leave parameters untouched") {
    Rng rng(510);
    Instance inst = random_instance(rng, 8, 4, 2, 4);
    ModelParams before = inst.params;
    AdamState state = init_adam(inst.params);
    Gradients g = zero_gradients(inst.params);
    adam_step(inst.params, g, state, 0.05);
    for (std::size_t l = 0; l < before.layer_weights.size(); ++l)
        CHECK(inst.params.layer_weights[l].data() == before.layer_weights[l].data());
    CHECK(inst.params.decoder_w == before.decoder_w);
}

TEST_CASE("adam: single unit-gradient step moves a scalar by about lr") {
    // bias-corrected first step: m_hat=1, v_hat=1 -> delta = lr/(1+eps)
    EncoderConfig cfg;
    cfg.layers = 1;
    cfg.hidden = 1;
    cfg.feature_dim = 1;
    cfg.seed = 3;
    ModelParams p = init_params(cfg);
    const double before = p.layer_weights[0](0, 0);
    Gradients g = zero_gradients(p);
    g.layer_weights[0](0, 0) = 1.0;
    AdamState state = init_adam(p);
    adam_step(p, g, state, 0.01);
    CHECK(p.layer_weights[0](0, 0) == doctest::Approx(before - 0.01).epsilon(1e-6));
}

TEST_CASE("adam: convex quadratic descends after warmup") {
    // minimize (x-3)^2 with adam; loss is monotone non-increasing after the
    // first few steps and ends far closer than it started
    double x = -4.0, m = 0.0, v = 0.0;
    double prev = (x - 3) * (x - 3);
    bool monotone_after_warmup = true;
    for (int t = 1; t <= 400; ++t) {
        const double g = 2 * (x - 3);
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1 - std::pow(0.9, t));
        const double vh = v / (1 - std::pow(0.999, t));
        x -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
        const double loss = (x - 3) * (x - 3);
        if (t > 20 && loss > prev + 1e-9) monotone_after_warmup = false;
        prev = loss;
    }
    CHECK(monotone_after_warmup);
    CHECK(std::fabs(x - 3) < 0.5);
}

TEST_CASE("adam rejects non-finite gradients") {
    EncoderConfig cfg;
    cfg.layers = 1;
    cfg.hidden = 2;
    cfg.feature_dim = 2;
    cfg.seed = 5;
    ModelParams p = init_params(cfg);
    Gradients g = zero_gradients(p);
    g.layer_weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    AdamState state = init_adam(p);
    CHECK_THROWS_AS(adam_step(p, g, state, 0.01), std::runtime_error);
}
