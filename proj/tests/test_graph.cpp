#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "ltlp/graph.hpp"
#include "ltlp/rng.hpp"
#include "oracles.hpp"

using namespace ltlp;

namespace {

void check_invariants(const Graph& g) {
    // offsets monotone, last = 2|E|
    REQUIRE(g.offsets().size() == g.num_nodes() + 1u);
    for (std::size_t i = 0; i + 1 < g.offsets().size(); ++i)
        CHECK(g.offsets()[i] <= g.offsets()[i + 1]);
    CHECK(g.offsets().back() == 2 * g.num_edges());
    std::size_t total = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        auto ns = g.neighbors(v);
        total += ns.size();
        for (std::size_t i = 0; i + 1 < ns.size(); ++i) CHECK(ns[i] < ns[i + 1]); // sorted, unique
        for (NodeId u : ns) {
            CHECK(u != v); // no self-loops
            CHECK(g.has_edge(u, v));
        }
    }
    CHECK(total == 2 * g.num_edges());
}

} // namespace

TEST_CASE("build_graph collapses duplicates and reversed pairs") {
    Graph g = build_graph({NodePair(0, 1), NodePair(1, 0), NodePair(1, 2)}, 3);
    CHECK(g.num_edges() == 2);
    auto n1 = g.neighbors(1);
    REQUIRE(n1.size() == 2);
    CHECK(n1[0] == 0);
    CHECK(n1[1] == 2);
}

TEST_CASE("empty graph") {
    Graph g = build_graph({}, 4);
    CHECK(g.num_nodes() == 4);
    CHECK(g.num_edges() == 0);
    for (NodeId v = 0; v < 4; ++v) CHECK(g.degree(v) == 0);
}

TEST_CASE("build_graph rejects bad input") {
    CHECK_THROWS_AS(build_graph({NodePair(0, 5)}, 3), std::out_of_range);
    CHECK_THROWS_AS(NodePair(2, 2), std::invalid_argument);
    Graph g = build_graph({NodePair(0, 1)}, 2);
    CHECK_THROWS_AS(g.neighbors(2), std::out_of_range);
    CHECK_THROWS_AS((void)common_neighbors(g, NodePair(0, 7)), std::out_of_range);
}

TEST_CASE("common neighbors on trivial graphs") {
    // K3: (0,1) share exactly {2}
    Graph k3 = build_graph({NodePair(0, 1), NodePair(1, 2), NodePair(0, 2)}, 3);
    auto cn = common_neighbors(k3, NodePair(0, 1));
    REQUIRE(cn.size() == 1);
    CHECK(cn[0] == 2);
    // path 0-1-2: adjacent endpoints share nothing
    Graph path = build_graph({NodePair(0, 1), NodePair(1, 2)}, 3);
    CHECK(common_neighbors(path, NodePair(0, 1)).empty());
}

TEST_CASE("degree_pair on trivial graphs") {
    Graph path = build_graph({NodePair(0, 1), NodePair(1, 2)}, 3);
    CHECK(degree_pair(path, NodePair(0, 2)) == 2);
    Graph k3 = build_graph({NodePair(0, 1), NodePair(1, 2), NodePair(0, 2)}, 3);
    CHECK(degree_pair(k3, NodePair(0, 1)) == 4);
    CHECK(degree_pair(k3, NodePair(1, 2)) == 4);
}

TEST_CASE("merge_edges closes a path into a triangle and is identity on empty") {
    Graph path = build_graph({NodePair(0, 1), NodePair(1, 2)}, 3);
    Graph k3 = merge_edges(path, {NodePair(0, 2)});
    CHECK(k3.num_edges() == 3);
    CHECK(k3.has_edge(0, 2));
    CHECK(path.num_edges() == 2); // original untouched

    Graph same = merge_edges(path, {});
    CHECK(same.edge_list() == path.edge_list());
}

TEST_CASE("200 random graphs match the dense oracle") {
    Rng rng(20240901);
    for (int trial = 0; trial < 200; ++trial) {
        const NodeId n = 2 + NodeId(rng.uniform_index(63));
        const double density = rng.uniform(0.02, 0.4);
        auto edges = oracle::random_edges(rng, n, density);
        // inject duplicates and reversed copies; they must collapse
        if (!edges.empty()) {
            edges.push_back(edges.front());
            edges.push_back(NodePair(edges.front().v, edges.front().u));
        }
        Graph g = build_graph(edges, n);
        oracle::DenseGraph dense(n, edges);
        check_invariants(g);

        std::size_t expected_edges = 0;
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v) {
                expected_edges += dense.adj[u][v];
                CHECK(g.has_edge(u, v) == bool(dense.adj[u][v]));
            }
        CHECK(g.num_edges() == expected_edges);

        for (NodeId u = 0; u < n; ++u) {
            CHECK(g.degree(u) == dense.degree(u));
            for (NodeId v = u + 1; v < n; ++v) {
                NodePair p(u, v);
                auto got = common_neighbors(g, p);
                std::set<NodeId> got_set(got.begin(), got.end());
                auto want = dense.common_neighbors(u, v);
                CHECK(got_set == want);
                CHECK(common_neighbor_count(g, p) == want.size());
                CHECK(degree_pair(g, p) == dense.degree(u) + dense.degree(v));
                // |CN| <= min degree, symmetry
                CHECK(want.size() <= std::min(g.degree(u), g.degree(v)));
                CHECK(common_neighbors(g, NodePair(v, u)) == got);
            }
        }
    }
}

TEST_CASE("merge_edges equals rebuild from the union edge list") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const NodeId n = 4 + NodeId(rng.uniform_index(28));
        auto base = oracle::random_edges(rng, n, 0.15);
        auto extra = oracle::random_edges(rng, n, 0.05);
        if (base.empty()) continue;
        Graph g = build_graph(base, n);
        Graph merged = merge_edges(g, extra);
        auto all = base;
        all.insert(all.end(), extra.begin(), extra.end());
        Graph rebuilt = build_graph(all, n);
        CHECK(merged.edge_list() == rebuilt.edge_list());
        CHECK(merged.num_edges() <= g.num_edges() + extra.size());
        check_invariants(merged);

        // idempotent when extra ⊆ E
        std::vector<NodePair> subset(base.begin(), base.begin() + base.size() / 2);
        Graph again = merge_edges(g, subset);
        CHECK(again.edge_list() == g.edge_list());
    }
}
