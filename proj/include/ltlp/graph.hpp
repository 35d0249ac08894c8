#pragma once

// Immutable undirected graph in compressed-sparse-row form, plus the
// structural queries (neighbors, degree, common neighbors) the rest of the
// toolkit is built on. Neighbor lists are sorted, deduplicated and symmetric;
// self-loops are rejected at construction.

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltlp {

using NodeId = std::uint32_t;

// Unordered node pair, stored canonically with the smaller id first.
struct NodePair {
    NodeId u = 0;
    NodeId v = 0;

    NodePair() = default;
    NodePair(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {
        if (a == b)
            throw std::invalid_argument("NodePair: self-loop at node " + std::to_string(a));
    }

    friend bool operator==(const NodePair&, const NodePair&) = default;
    friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

struct NodePairHash {
    std::size_t operator()(const NodePair& p) const {
        std::uint64_t z = (std::uint64_t(p.u) << 32) | p.v;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return static_cast<std::size_t>(z ^ (z >> 31));
    }
};

class Graph {
public:
    Graph() = default;

    NodeId num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return num_edges_; }

    std::span<const NodeId> neighbors(NodeId v) const {
        check_node(v);
        return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
    }

    std::size_t degree(NodeId v) const {
        check_node(v);
        return offsets_[v + 1] - offsets_[v];
    }

    bool has_edge(NodeId a, NodeId b) const {
        check_node(a);
        check_node(b);
        if (degree(a) > degree(b)) std::swap(a, b);
        auto ns = neighbors(a);
        return std::binary_search(ns.begin(), ns.end(), b);
    }

    bool has_edge(const NodePair& p) const { return has_edge(p.u, p.v); }

    // Canonical pairs in ascending order, one per undirected edge.
    std::vector<NodePair> edge_list() const {
        std::vector<NodePair> out;
        out.reserve(num_edges_);
        for (NodeId u = 0; u < num_nodes_; ++u)
            for (NodeId v : neighbors(u))
                if (u < v) out.push_back(NodePair(u, v));
        return out;
    }

    const std::vector<std::size_t>& offsets() const { return offsets_; }
    const std::vector<NodeId>& neighbor_array() const { return neighbors_; }

    void check_node(NodeId v) const {
        if (v >= num_nodes_)
            throw std::out_of_range("Graph: node id " + std::to_string(v) +
                                    " out of range (N=" + std::to_string(num_nodes_) + ")");
    }

private:
    friend Graph build_graph(std::vector<NodePair> edges, NodeId num_nodes);

    NodeId num_nodes_ = 0;
    std::size_t num_edges_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<NodeId> neighbors_;
};

// Builds the canonical graph from an edge list that may contain duplicates or
// reversed pairs; they collapse to a single undirected edge.
inline Graph build_graph(std::vector<NodePair> edges, NodeId num_nodes) {
    for (const NodePair& e : edges) {
        if (e.v >= num_nodes)
            throw std::out_of_range("build_graph: node id " + std::to_string(e.v) +
                                    " out of range (N=" + std::to_string(num_nodes) + ")");
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Graph g;
    g.num_nodes_ = num_nodes;
    g.num_edges_ = edges.size();
    std::vector<std::size_t> deg(num_nodes, 0);
    for (const NodePair& e : edges) {
        ++deg[e.u];
        ++deg[e.v];
    }
    g.offsets_.assign(num_nodes + 1, 0);
    for (NodeId v = 0; v < num_nodes; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
    g.neighbors_.resize(2 * edges.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const NodePair& e : edges) {
        g.neighbors_[cursor[e.u]++] = e.v;
        g.neighbors_[cursor[e.v]++] = e.u;
    }
    // canonical pair order fills each list ascending already for the v side,
    // but not for the u side; sort each list once.
    for (NodeId v = 0; v < num_nodes; ++v)
        std::sort(g.neighbors_.begin() + g.offsets_[v], g.neighbors_.begin() + g.offsets_[v + 1]);
    return g;
}

// C_{u,v} = N_u ∩ N_v, by linear merge over the two sorted lists.
inline std::vector<NodeId> common_neighbors(const Graph& g, const NodePair& p) {
    auto a = g.neighbors(p.u);
    auto b = g.neighbors(p.v);
    std::vector<NodeId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline std::size_t common_neighbor_count(const Graph& g, const NodePair& p) {
    auto a = g.neighbors(p.u);
    auto b = g.neighbors(p.v);
    std::size_t n = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++n; ++i; ++j; }
    }
    return n;
}

// d_{u,v} = d_u + d_v
inline std::size_t degree_pair(const Graph& g, const NodePair& p) {
    return g.degree(p.u) + g.degree(p.v);
}

// New graph over E ∪ extra; the input graph is unchanged.
inline Graph merge_edges(const Graph& g, const std::vector<NodePair>& extra) {
    std::vector<NodePair> edges = g.edge_list();
    edges.insert(edges.end(), extra.begin(), extra.end());
    return build_graph(std::move(edges), g.num_nodes());
}

} // namespace ltlp
