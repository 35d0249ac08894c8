#pragma once

// File formats: edge-list and feature text loaders, and the versioned binary
// checkpoint container (magic header + named f64 tensors, little-endian).

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ltlp/graph.hpp"
#include "ltlp/linalg.hpp"

namespace ltlp {

struct EdgeListData {
    std::vector<NodePair> edges;
    NodeId num_nodes = 0;
    std::vector<std::string> node_names; // dense id -> original token, first-seen order
};

// One edge per line, two whitespace-separated tokens; '#' lines are comments.
// Tokens are mapped to dense ids in first-seen order.
inline EdgeListData load_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_edge_list: cannot open " + path);
    EdgeListData out;
    std::unordered_map<std::string, NodeId> ids;
    auto intern = [&](const std::string& tok) {
        auto [it, inserted] = ids.try_emplace(tok, static_cast<NodeId>(out.node_names.size()));
        if (inserted) out.node_names.push_back(tok);
        return it->second;
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string a, b, rest;
        if (!(ls >> a)) continue; // blank line
        if (a[0] == '#') continue;
        if (!(ls >> b) || (ls >> rest))
            throw std::runtime_error("load_edge_list: malformed line " + std::to_string(lineno) +
                                     " in " + path + " (expected two tokens)");
        NodeId u = intern(a);
        NodeId v = intern(b);
        if (u == v)
            throw std::runtime_error("load_edge_list: self-loop at line " +
                                     std::to_string(lineno) + " in " + path);
        out.edges.push_back(NodePair(u, v));
    }
    out.num_nodes = static_cast<NodeId>(out.node_names.size());
    return out;
}

inline void save_edge_list(const std::string& path, const std::vector<NodePair>& edges,
                           const std::vector<std::string>* node_names = nullptr) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_edge_list: cannot open " + path);
    for (const NodePair& e : edges) {
        if (node_names)
            out << (*node_names)[e.u] << ' ' << (*node_names)[e.v] << '\n';
        else
            out << e.u << ' ' << e.v << '\n';
    }
    if (!out) throw std::runtime_error("save_edge_list: write failed for " + path);
}

// Edge list whose tokens are already dense ids (the format this toolkit
// writes for augmented graphs); no interning, ids validated against N.
inline std::vector<NodePair> load_edge_list_dense(const std::string& path, NodeId num_nodes) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_edge_list_dense: cannot open " + path);
    std::vector<NodePair> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string a, b;
        if (!(ls >> a)) continue;
        if (a[0] == '#') continue;
        if (!(ls >> b))
            throw std::runtime_error("load_edge_list_dense: malformed line " +
                                     std::to_string(lineno) + " in " + path);
        unsigned long u = 0, v = 0;
        try {
            u = std::stoul(a);
            v = std::stoul(b);
        } catch (const std::exception&) {
            throw std::runtime_error("load_edge_list_dense: non-numeric id at line " +
                                     std::to_string(lineno) + " in " + path);
        }
        if (u >= num_nodes || v >= num_nodes)
            throw std::runtime_error("load_edge_list_dense: id out of range at line " +
                                     std::to_string(lineno) + " in " + path);
        edges.push_back(NodePair(static_cast<NodeId>(u), static_cast<NodeId>(v)));
    }
    return edges;
}

// One node per line, comma-separated reals, row order = node id order.
inline Matrix load_features(const std::string& path, NodeId num_nodes) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_features: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("load_features: bad value at line " +
                                         std::to_string(lineno) + " in " + path);
            }
        }
        if (row.empty())
            throw std::runtime_error("load_features: empty row at line " + std::to_string(lineno));
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw std::runtime_error("load_features: ragged row at line " + std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    if (rows.size() != num_nodes)
        throw std::runtime_error("load_features: " + std::to_string(rows.size()) +
                                 " rows for " + std::to_string(num_nodes) + " nodes");
    Matrix f(rows.size(), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) f(i, j) = rows[i][j];
    return f;
}

// ------------------------------------------------------------------
// checkpoint container

struct NamedTensor {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::vector<double> data;

    std::uint64_t elements() const {
        std::uint64_t n = 1;
        for (auto d : shape) n *= d;
        return n;
    }
};

namespace detail {

constexpr std::array<char, 8> kCkptMagic = {'L', 'T', 'L', 'P', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;
constexpr std::uint32_t kCkptFooter = 0x4b504c54; // "TLPK"

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& v, const std::string& what) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated or corrupt file (" + what + ")");
}

} // namespace detail

inline void save_tensors(const std::string& path, const std::vector<NamedTensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_tensors: cannot open " + path);
    out.write(detail::kCkptMagic.data(), detail::kCkptMagic.size());
    detail::write_raw(out, detail::kCkptVersion);
    detail::write_raw(out, static_cast<std::uint32_t>(tensors.size()));
    for (const NamedTensor& t : tensors) {
        detail::write_raw(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        detail::write_raw(out, static_cast<std::uint32_t>(t.shape.size()));
        for (std::uint64_t d : t.shape) detail::write_raw(out, d);
        if (t.data.size() != t.elements())
            throw std::runtime_error("save_tensors: shape/data mismatch for " + t.name);
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
    detail::write_raw(out, detail::kCkptFooter);
    if (!out) throw std::runtime_error("save_tensors: write failed for " + path);
}

inline std::vector<NamedTensor> load_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_tensors: cannot open " + path);
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != detail::kCkptMagic)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    std::uint32_t version = 0;
    detail::read_raw(in, version, "version");
    if (version != detail::kCkptVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version) +
                                 " in " + path);
    std::uint32_t count = 0;
    detail::read_raw(in, count, "tensor count");
    std::vector<NamedTensor> tensors(count);
    for (NamedTensor& t : tensors) {
        std::uint32_t name_len = 0;
        detail::read_raw(in, name_len, "name length");
        t.name.resize(name_len);
        in.read(t.name.data(), name_len);
        if (!in) throw std::runtime_error("checkpoint: truncated name in " + path);
        std::uint32_t ndim = 0;
        detail::read_raw(in, ndim, "rank");
        t.shape.resize(ndim);
        for (auto& d : t.shape) detail::read_raw(in, d, "shape");
        t.data.resize(t.elements());
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        if (!in) throw std::runtime_error("checkpoint: truncated payload for " + t.name);
    }
    std::uint32_t footer = 0;
    detail::read_raw(in, footer, "footer");
    if (footer != detail::kCkptFooter)
        throw std::runtime_error("checkpoint: bad footer in " + path);
    return tensors;
}

// Graphs ride the same container; node ids are exact in f64 well past any
// graph size this toolkit handles.
inline void save_graph(const std::string& path, const Graph& g) {
    NamedTensor meta{"graph/num_nodes", {1}, {static_cast<double>(g.num_nodes())}};
    NamedTensor edges{"graph/edges", {g.num_edges(), 2}, {}};
    edges.data.reserve(2 * g.num_edges());
    for (const NodePair& e : g.edge_list()) {
        edges.data.push_back(static_cast<double>(e.u));
        edges.data.push_back(static_cast<double>(e.v));
    }
    save_tensors(path, {meta, edges});
}

inline Graph load_graph(const std::string& path) {
    auto tensors = load_tensors(path);
    const NamedTensor* meta = nullptr;
    const NamedTensor* edges = nullptr;
    for (const auto& t : tensors) {
        if (t.name == "graph/num_nodes") meta = &t;
        if (t.name == "graph/edges") edges = &t;
    }
    if (!meta || !edges) throw std::runtime_error("load_graph: missing tensors in " + path);
    std::vector<NodePair> pairs;
    pairs.reserve(edges->data.size() / 2);
    for (std::size_t i = 0; i + 1 < edges->data.size(); i += 2)
        pairs.push_back(NodePair(static_cast<NodeId>(edges->data[i]),
                                 static_cast<NodeId>(edges->data[i + 1])));
    return build_graph(std::move(pairs), static_cast<NodeId>(meta->data.at(0)));
}

// FNV-1a content digest used in split manifests.
inline std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file_digest: cannot open " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

} // namespace ltlp
