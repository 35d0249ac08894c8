#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "ltlp/dataset.hpp"
#include "ltlp/encoder.hpp"
#include "ltlp/io.hpp"
#include "ltlp/rng.hpp"
#include "oracles.hpp"

using namespace ltlp;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    auto dir = fs::temp_directory_path() / "ltlp_test";
    fs::create_directories(dir);
    return dir / name;
}

void check_dataset_invariants(const Dataset& ds) {
    // no val/test positive leaks into the training graph
    for (const auto& split : {ds.val, ds.test})
        for (const LabeledPair& lp : split)
            if (lp.label) CHECK_FALSE(ds.graph.has_edge(lp.pair));
    // negatives are non-edges of the full graph; splits are class-balanced
    for (const auto* split : {&ds.train, &ds.val, &ds.test}) {
        std::size_t pos = 0, neg = 0;
        for (const LabeledPair& lp : *split) {
            if (lp.label) {
                ++pos;
                CHECK(ds.full_graph.has_edge(lp.pair));
            } else {
                ++neg;
                CHECK_FALSE(ds.full_graph.has_edge(lp.pair));
            }
        }
        CHECK(pos == neg);
        CHECK(pos > 0);
    }
    CHECK(ds.features.rows == ds.graph.num_nodes());
}

} // namespace

TEST_CASE("edge list loader maps tokens in first-seen order") {
    auto path = temp_file("edges_basic.txt");
    std::ofstream(path) << "a b\nb c\n";
    auto data = load_edge_list(path.string());
    CHECK(data.num_nodes == 3);
    REQUIRE(data.edges.size() == 2);
    CHECK(data.edges[0] == NodePair(0, 1));
    CHECK(data.edges[1] == NodePair(1, 2));
    CHECK(data.node_names == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("edge list loader: empty file, comments, malformed lines") {
    auto empty = temp_file("edges_empty.txt");
    std::ofstream(empty) << "";
    auto data = load_edge_list(empty.string());
    CHECK(data.num_nodes == 0);
    CHECK(data.edges.empty());

    auto commented = temp_file("edges_comment.txt");
    std::ofstream(commented) << "# header\nx y\n";
    CHECK(load_edge_list(commented.string()).edges.size() == 1);

    auto bad = temp_file("edges_bad.txt");
    std::ofstream(bad) << "a b\nc\n";
    CHECK_THROWS_WITH_AS(load_edge_list(bad.string()), doctest::Contains("line 2"),
                         std::runtime_error);
    CHECK_THROWS_AS(load_edge_list("/nonexistent/file.txt"), std::runtime_error);

    auto loops = temp_file("edges_loop.txt");
    std::ofstream(loops) << "a a\n";
    CHECK_THROWS_AS(load_edge_list(loops.string()), std::runtime_error);
}

TEST_CASE("feature loader parses csv rows and validates shape") {
    auto path = temp_file("features.txt");
    std::ofstream(path) << "1.0,0.5\n0.0,2.0\n-1.5,0.25\n";
    Matrix f = load_features(path.string(), 3);
    CHECK(f.rows() == 3);
    CHECK(f.cols() == 2);
    CHECK(f(2, 0) == -1.5);
    CHECK_THROWS_AS(load_features(path.string(), 4), std::runtime_error);

    auto ragged = temp_file("features_ragged.txt");
    std::ofstream(ragged) << "1,2\n3\n";
    CHECK_THROWS_AS(load_features(ragged.string(), 2), std::runtime_error);
}

TEST_CASE("split sizes follow floor arithmetic (Cora-scale counts)") {
    // 5278 edges -> 4486 / 263 / 529
    Rng rng(5);
    const NodeId n = 600;
    std::vector<NodePair> edges;
    std::unordered_set<NodePair, NodePairHash> seen;
    while (edges.size() < 5278) {
        NodeId u = NodeId(rng.uniform_index(n));
        NodeId v = NodeId(rng.uniform_index(n));
        if (u == v) continue;
        NodePair p(u, v);
        if (seen.insert(p).second) edges.push_back(p);
    }
    SplitConfig cfg;
    cfg.seed = 3;
    Dataset ds = split_dataset(edges, n, one_hot_features(n, 16), cfg);
    std::size_t train_pos = 0, val_pos = 0, test_pos = 0;
    for (const auto& lp : ds.train) train_pos += lp.label;
    for (const auto& lp : ds.val) val_pos += lp.label;
    for (const auto& lp : ds.test) test_pos += lp.label;
    CHECK(train_pos == 4486);
    CHECK(val_pos == 263);
    CHECK(test_pos == 529);
    CHECK(ds.graph.num_edges() == 4486);
    check_dataset_invariants(ds);
}

TEST_CASE("same seed yields identical splits; different seed differs") {
    Rng rng(9);
    auto edges = oracle::random_edges(rng, 40, 0.2);
    SplitConfig cfg;
    cfg.seed = 11;
    Dataset a = split_dataset(edges, 40, one_hot_features(40), cfg);
    Dataset b = split_dataset(edges, 40, one_hot_features(40), cfg);
    CHECK(a.graph.edge_list() == b.graph.edge_list());
    REQUIRE(a.test.size() == b.test.size());
    for (std::size_t i = 0; i < a.test.size(); ++i) {
        CHECK(a.test[i].pair == b.test[i].pair);
        CHECK(a.test[i].label == b.test[i].label);
    }
    cfg.seed = 12;
    Dataset c = split_dataset(edges, 40, one_hot_features(40), cfg);
    CHECK(a.graph.edge_list() != c.graph.edge_list());
}

TEST_CASE("small random splits satisfy every dataset invariant") {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        const NodeId n = 10 + NodeId(rng.uniform_index(30));
        auto edges = oracle::random_edges(rng, n, 0.3);
        if (edges.size() < 25) continue;
        SplitConfig cfg;
        cfg.seed = 1000 + trial;
        Dataset ds = split_dataset(edges, n, one_hot_features(n), cfg);
        check_dataset_invariants(ds);
    }
}

TEST_CASE("split errors: insufficient non-edges, degenerate fractions") {
    // K4 has 6 edges and zero non-edges
    std::vector<NodePair> k4;
    for (NodeId u = 0; u < 4; ++u)
        for (NodeId v = u + 1; v < 4; ++v) k4.push_back(NodePair(u, v));
    SplitConfig cfg;
    CHECK_THROWS_AS(split_dataset(k4, 4, one_hot_features(4), cfg), std::runtime_error);

    SplitConfig bad;
    bad.train_frac = 0.99;
    bad.val_frac = 0.1;
    CHECK_THROWS_AS(split_dataset(k4, 4, one_hot_features(4), bad), std::invalid_argument);
}

TEST_CASE("downsample retains the right count and leaves val/test untouched") {
    Rng rng(42);
    auto edges = oracle::random_edges(rng, 60, 0.25);
    SplitConfig cfg;
    cfg.seed = 4;
    Dataset ds = split_dataset(edges, 60, one_hot_features(60), cfg);
    std::size_t train_pos = 0;
    for (const auto& lp : ds.train) train_pos += lp.label;

    Dataset half = downsample_edges(ds, 0.5, 99);
    std::size_t kept = 0;
    for (const auto& lp : half.train) kept += lp.label;
    CHECK(kept == (train_pos + 1) / 2);
    CHECK(half.graph.num_edges() == kept);
    REQUIRE(half.test.size() == ds.test.size());
    for (std::size_t i = 0; i < ds.test.size(); ++i) CHECK(half.test[i].pair == ds.test[i].pair);

    // identity at S=1, errors outside (0,1]
    Dataset same = downsample_edges(ds, 1.0, 99);
    CHECK(same.graph.edge_list() == ds.graph.edge_list());
    CHECK_THROWS_AS(downsample_edges(ds, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(downsample_edges(ds, 1.5, 1), std::invalid_argument);

    // retained positives are a subset of the originals
    std::unordered_set<NodePair, NodePairHash> orig;
    for (const auto& lp : ds.train)
        if (lp.label) orig.insert(lp.pair);
    for (const auto& lp : half.train)
        if (lp.label) CHECK(orig.count(lp.pair) == 1);
}

TEST_CASE("sbm: extreme parameters give two disjoint triangles") {
    SbmConfig cfg;
    cfg.num_blocks = 2;
    cfg.block_size = 3;
    cfg.p_in = 1.0;
    cfg.p_out = 0.0;
    cfg.seed = 7;
    // 6 edges cannot feed the default 85/5/10 split, so use a split-friendly
    // config and inspect the generated full graph
    cfg.split.train_frac = 0.5;
    cfg.split.val_frac = 0.17;
    SbmDataset s = generate_sbm(cfg);
    CHECK(s.data.full_graph.num_edges() == 6);
    for (NodeId u = 0; u < 6; ++u)
        for (NodeId v = u + 1; v < 6; ++v)
            CHECK(s.data.full_graph.has_edge(u, v) == (s.block[u] == s.block[v]));
}

TEST_CASE("sbm: p_in == p_out gives uniform density within tolerance") {
    // Monte-Carlo estimate over 100 seeds
    double intra = 0.0, cross = 0.0;
    std::size_t intra_pairs = 0, cross_pairs = 0;
    for (int seed = 0; seed < 100; ++seed) {
        SbmConfig cfg;
        cfg.num_blocks = 4;
        cfg.block_size = 8;
        cfg.p_in = 0.3;
        cfg.p_out = 0.3;
        cfg.seed = 9000 + seed;
        cfg.split.train_frac = 0.7;
        cfg.split.val_frac = 0.1;
        SbmDataset s = generate_sbm(cfg);
        for (NodeId u = 0; u < 32; ++u)
            for (NodeId v = u + 1; v < 32; ++v) {
                const bool same = s.block[u] == s.block[v];
                (same ? intra_pairs : cross_pairs) += 1;
                (same ? intra : cross) += s.data.full_graph.has_edge(u, v);
            }
    }
    const double d_in = intra / double(intra_pairs);
    const double d_out = cross / double(cross_pairs);
    CHECK(d_in == doctest::Approx(0.3).epsilon(0.05));
    CHECK(d_out == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("sbm: default config satisfies dataset invariants, rejects degenerate input") {
    SbmConfig cfg;
    cfg.num_blocks = 6;
    cfg.block_size = 20;
    cfg.p_in = 0.3;
    cfg.p_out = 0.01;
    cfg.seed = 21;
    SbmDataset s = generate_sbm(cfg);
    check_dataset_invariants(s.data);
    CHECK(s.data.features.cols == 6);

    SbmConfig bad = cfg;
    bad.block_size = 1;
    CHECK_THROWS_AS(generate_sbm(bad), std::invalid_argument);
    bad = cfg;
    bad.p_out = 0.5; // > p_in
    CHECK_THROWS_AS(generate_sbm(bad), std::invalid_argument);
}

TEST_CASE("checkpoint: params round-trip bit-exactly") {
    EncoderConfig ecfg;
    ecfg.layers = 2;
    ecfg.hidden = 5;
    ecfg.feature_dim = 7;
    ecfg.seed = 33;
    ModelParams p = init_params(ecfg);
    p.decoder_b = 0.125;
    p.center_pos[2] = -3.5;
    auto path = temp_file("params.ckpt");
    save_tensors(path.string(), params_to_tensors(p));
    ModelParams q = params_from_tensors(load_tensors(path.string()));
    REQUIRE(q.layer_weights.size() == p.layer_weights.size());
    for (std::size_t l = 0; l < p.layer_weights.size(); ++l)
        CHECK(q.layer_weights[l].data() == p.layer_weights[l].data());
    CHECK(q.decoder_w == p.decoder_w);
    CHECK(q.decoder_b == p.decoder_b);
    CHECK(q.center_neg == p.center_neg);
    CHECK(q.center_pos == p.center_pos);
    CHECK(q.decoder == p.decoder);
}

TEST_CASE("checkpoint: graph round-trip preserves the edge set") {
    Rng rng(64);
    auto edges = oracle::random_edges(rng, 50, 0.15);
    Graph g = build_graph(edges, 50);
    auto path = temp_file("graph.ckpt");
    save_graph(path.string(), g);
    Graph h = load_graph(path.string());
    CHECK(h.edge_list() == g.edge_list());
    CHECK(h.num_nodes() == g.num_nodes());
}

TEST_CASE("checkpoint: truncation and corruption are detected") {
    EncoderConfig ecfg;
    ecfg.layers = 1;
    ecfg.hidden = 4;
    ecfg.feature_dim = 4;
    ecfg.seed = 1;
    auto path = temp_file("trunc.ckpt");
    save_tensors(path.string(), params_to_tensors(init_params(ecfg)));

    const auto size = fs::file_size(path);
    fs::resize_file(path, size - 9);
    CHECK_THROWS_AS(load_tensors(path.string()), std::runtime_error);

    auto garbage = temp_file("garbage.ckpt");
    std::ofstream(garbage) << "not a checkpoint at all";
    CHECK_THROWS_AS(load_tensors(garbage.string()), std::runtime_error);
}

TEST_CASE("training negative resampling is seeded and avoids full-graph edges") {
    Rng rng(31);
    auto edges = oracle::random_edges(rng, 40, 0.25);
    SplitConfig cfg;
    cfg.seed = 2;
    Dataset ds = split_dataset(edges, 40, one_hot_features(40), cfg);
    auto a = sample_training_negatives(ds, 30, 555);
    auto b = sample_training_negatives(ds, 30, 555);
    auto c = sample_training_negatives(ds, 30, 556);
    CHECK(a == b);
    CHECK(a != c);
    for (const NodePair& p : a) CHECK_FALSE(ds.full_graph.has_edge(p));
}
