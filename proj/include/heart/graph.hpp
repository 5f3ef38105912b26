#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "heart/error.hpp"
#include "heart/rng.hpp"

namespace heart {

using NodeId = std::uint32_t;

struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge canonical(Edge e) { return e.u <= e.v ? e : Edge{e.v, e.u}; }

inline std::uint64_t pair_key(NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return (std::uint64_t{a} << 32) | b;
}

// Membership set over unordered node pairs.
class PairSet {
public:
    PairSet() = default;
    explicit PairSet(std::span<const Edge> edges) {
        keys_.reserve(edges.size() * 2);
        for (const auto& e : edges) insert(e);
    }

    void insert(Edge e) { keys_.insert(pair_key(e.u, e.v)); }
    bool contains(NodeId a, NodeId b) const { return keys_.count(pair_key(a, b)) != 0; }
    bool contains(Edge e) const { return contains(e.u, e.v); }
    std::size_t size() const { return keys_.size(); }

private:
    std::unordered_set<std::uint64_t> keys_;
};

struct BuildStats {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_dropped = 0;
};

// Immutable undirected simple graph in CSR form. Neighbor lists are sorted.
class Graph {
public:
    Graph() : offsets_(1, 0) {}

    static Graph from_edges(NodeId num_nodes, std::span<const Edge> edges, BuildStats* stats = nullptr) {
        BuildStats local;
        std::vector<Edge> arcs;
        arcs.reserve(edges.size() * 2);
        for (const auto& e : edges) {
            if (e.u >= num_nodes || e.v >= num_nodes) {
                throw Error(ErrorKind::Range, "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                                  ") outside " + std::to_string(num_nodes) + " nodes");
            }
            if (e.u == e.v) {
                ++local.self_loops_dropped;
                continue;
            }
            arcs.push_back({e.u, e.v});
            arcs.push_back({e.v, e.u});
        }
        std::sort(arcs.begin(), arcs.end());
        const auto before = arcs.size();
        arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
        local.duplicates_dropped = (before - arcs.size()) / 2;

        Graph g;
        g.num_nodes_ = num_nodes;
        g.offsets_.assign(std::size_t{num_nodes} + 1, 0);
        for (const auto& a : arcs) ++g.offsets_[a.u + 1];
        for (std::size_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] += g.offsets_[i];
        g.targets_.reserve(arcs.size());
        for (const auto& a : arcs) g.targets_.push_back(a.v);
        if (stats) *stats = local;
        return g;
    }

    NodeId num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return targets_.size() / 2; }
    std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }
    std::span<const NodeId> neighbors(NodeId u) const {
        return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
    }
    std::span<const std::size_t> offsets() const { return offsets_; }
    std::span<const NodeId> targets() const { return targets_; }

    bool has_edge(NodeId u, NodeId v) const {
        const auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    std::size_t max_degree() const {
        std::size_t best = 0;
        for (NodeId u = 0; u < num_nodes_; ++u) best = std::max(best, degree(u));
        return best;
    }

    void check_node(NodeId u) const {
        if (u >= num_nodes_) {
            throw Error(ErrorKind::Range, "node " + std::to_string(u) + " >= " + std::to_string(num_nodes_));
        }
    }

    // Unordered edge list with u < v, sorted.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(num_edges());
        for (NodeId u = 0; u < num_nodes_; ++u)
            for (NodeId v : neighbors(u))
                if (u < v) out.push_back({u, v});
        return out;
    }

    // Symmetric, loop-free, sorted strictly ascending.
    bool is_valid() const {
        for (NodeId u = 0; u < num_nodes_; ++u) {
            const auto nb = neighbors(u);
            for (std::size_t i = 0; i < nb.size(); ++i) {
                if (nb[i] >= num_nodes_ || nb[i] == u) return false;
                if (i > 0 && nb[i - 1] >= nb[i]) return false;
                if (!has_edge(nb[i], u)) return false;
            }
        }
        return true;
    }

private:
    NodeId num_nodes_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> targets_;
};

class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t dim, std::vector<double> values)
        : rows_(rows), dim_(dim), values_(std::move(values)) {
        if (values_.size() != rows_ * dim_) throw Error(ErrorKind::Validation, "feature matrix size mismatch");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw Error(ErrorKind::Validation,
                            "non-finite feature at row " + std::to_string(i / std::max<std::size_t>(dim_, 1)));
            }
        }
    }

    std::size_t num_nodes() const { return rows_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    double at(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

// Edges with an optional parallel list of integer timestamps (years).
struct EdgeList {
    std::vector<Edge> edges;
    std::vector<std::int64_t> years;

    bool timed() const { return !years.empty(); }
    std::size_t size() const { return edges.size(); }
};

struct EdgeSplit {
    EdgeList train;
    EdgeList valid;
    EdgeList test;
    bool dynamic = false;

    NodeId min_num_nodes() const {
        NodeId n = 0;
        for (const auto* list : {&train, &valid, &test})
            for (const auto& e : list->edges) n = std::max(n, std::max(e.u, e.v) + 1);
        return n;
    }

    // Pairwise disjointness of the three lists as unordered pairs; a dynamic
    // split may repeat a pair across lists.
    void validate(NodeId num_nodes) const {
        for (const auto* list : {&train, &valid, &test}) {
            for (const auto& e : list->edges) {
                if (e.u >= num_nodes || e.v >= num_nodes)
                    throw Error(ErrorKind::Range, "split edge endpoint outside " + std::to_string(num_nodes) + " nodes");
            }
            if (list->timed() && list->years.size() != list->edges.size())
                throw Error(ErrorKind::Validation, "timestamp count does not match edge count");
        }
        if (dynamic) return;
        const PairSet tr(train.edges), va(valid.edges);
        for (const auto& e : valid.edges)
            if (tr.contains(e)) throw Error(ErrorKind::Validation, "valid edge also in train");
        for (const auto& e : test.edges)
            if (tr.contains(e) || va.contains(e)) throw Error(ErrorKind::Validation, "test edge also in train/valid");
    }
};

enum class Stage { Valid, Test };

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename Int>
bool parse_int(std::string_view tok, Int& out) {
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

inline bool parse_double(std::string_view tok, double& out) {
    tok = trim(tok);
    if (tok.empty()) return false;
    if (tok.front() == '+') tok.remove_prefix(1);
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return (ec == std::errc{} || ec == std::errc::result_out_of_range) && ptr == end;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
    return in;
}

// Parses one "u v [year]" line; returns false for blank/comment lines.
inline bool parse_edge_line(std::string_view line, std::size_t line_no, Edge& edge,
                            std::optional<std::int64_t>& year) {
    line = trim(line);
    if (line.empty() || line.front() == '#') return false;
    const auto toks = split_ws(line);
    if (toks.size() < 2 || toks.size() > 3 || !parse_int(toks[0], edge.u) || !parse_int(toks[1], edge.v)) {
        throw Error(ErrorKind::Parse, "malformed edge at line " + std::to_string(line_no) + ": '" +
                                          std::string(line) + "'");
    }
    year.reset();
    if (toks.size() == 3) {
        std::int64_t y = 0;
        if (!parse_int(toks[2], y))
            throw Error(ErrorKind::Parse, "malformed timestamp at line " + std::to_string(line_no));
        year = y;
    }
    return true;
}

inline void append_edge(EdgeList& list, Edge e, std::optional<std::int64_t> year, std::size_t line_no) {
    if (year) {
        if (list.years.size() != list.edges.size())
            throw Error(ErrorKind::Parse, "mixed timed/untimed edges at line " + std::to_string(line_no));
        list.years.push_back(*year);
    } else if (list.timed()) {
        throw Error(ErrorKind::Parse, "mixed timed/untimed edges at line " + std::to_string(line_no));
    }
    list.edges.push_back(e);
}

}  // namespace detail

/// Reads "u v" / "u v year" lines (0-based ids, '#' comments) as written.
inline EdgeList read_edges(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    EdgeList list;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        Edge e;
        std::optional<std::int64_t> year;
        if (detail::parse_edge_line(line, line_no, e, year)) detail::append_edge(list, e, year, line_no);
    }
    return list;
}

/// Builds a graph from an edge-list file. Edges are symmetrized and
/// deduplicated; self-loops are dropped and counted. With num_nodes unset
/// the node count is one past the largest id.
inline Graph load_edge_list(const std::filesystem::path& path, std::optional<NodeId> num_nodes = std::nullopt,
                            BuildStats* stats = nullptr) {
    auto in = detail::open_input(path);
    std::vector<Edge> edges;
    NodeId n_seen = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        Edge e;
        std::optional<std::int64_t> year;
        if (!detail::parse_edge_line(line, line_no, e, year)) continue;
        if (num_nodes && (e.u >= *num_nodes || e.v >= *num_nodes)) {
            throw Error(ErrorKind::Range, "node id >= " + std::to_string(*num_nodes) + " at line " +
                                              std::to_string(line_no));
        }
        n_seen = std::max(n_seen, std::max(e.u, e.v) + 1);
        edges.push_back(e);
    }
    BuildStats local;
    Graph g = Graph::from_edges(num_nodes.value_or(n_seen), edges, &local);
    if (local.self_loops_dropped > 0)
        log::warn(path.string() + ": dropped " + std::to_string(local.self_loops_dropped) + " self-loops");
    if (local.duplicates_dropped > 0)
        log::warn(path.string() + ": merged " + std::to_string(local.duplicates_dropped) + " duplicate edges");
    if (stats) *stats = local;
    return g;
}

/// Dense features from CSV, one row per node.
inline FeatureMatrix load_features(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::vector<double> values;
    std::size_t rows = 0, dim = 0;
    std::string line;
    while (std::getline(in, line)) {
        const auto view = detail::trim(line);
        if (view.empty()) continue;
        std::size_t cols = 0;
        std::size_t start = 0;
        for (;;) {
            const auto comma = view.find(',', start);
            const auto tok = view.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            double x = 0;
            if (!detail::parse_double(tok, x)) {
                throw Error(ErrorKind::Parse, "bad feature value '" + std::string(tok) + "' at row " + std::to_string(rows));
            }
            if (!std::isfinite(x)) throw Error(ErrorKind::Validation, "non-finite feature at row " + std::to_string(rows));
            values.push_back(x);
            ++cols;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows == 0) {
            dim = cols;
        } else if (cols != dim) {
            throw Error(ErrorKind::Parse, "row " + std::to_string(rows) + " has " + std::to_string(cols) +
                                              " columns, expected " + std::to_string(dim));
        }
        ++rows;
    }
    return FeatureMatrix(rows, dim, std::move(values));
}

struct SplitRatios {
    double train = 0.85;
    double valid = 0.05;
    double test = 0.10;
};

/// Seeded shuffle then partition. Valid and test sizes are floored; train
/// takes the remainder. The 1e-9 slack absorbs representation error in the
/// products (0.29 * 100 is 28.999...).
inline EdgeSplit make_split(const EdgeList& edges, SplitRatios ratios, std::uint64_t seed) {
    if (edges.edges.empty()) throw Error(ErrorKind::Validation, "cannot split an empty edge list");
    for (double r : {ratios.train, ratios.valid, ratios.test})
        if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorKind::Config, "split ratios must lie in [0, 1]");
    if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9)
        throw Error(ErrorKind::Config, "split ratios must sum to 1");

    const std::size_t n = edges.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(std::span(order));

    const auto n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.valid + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.test + 1e-9));
    const std::size_t n_train = n - n_valid - n_test;

    EdgeSplit split;
    auto take = [&](EdgeList& dst, std::size_t from, std::size_t count) {
        for (std::size_t i = from; i < from + count; ++i) {
            dst.edges.push_back(edges.edges[order[i]]);
            if (edges.timed()) dst.years.push_back(edges.years[order[i]]);
        }
    };
    take(split.train, 0, n_train);
    take(split.valid, n_train, n_valid);
    take(split.test, n_train + n_valid, n_test);
    return split;
}

/// Graph the heuristics see: train edges, plus valid edges when requested.
inline Graph training_graph(const EdgeSplit& split, bool include_valid, NodeId num_nodes) {
    std::vector<Edge> edges = split.train.edges;
    if (include_valid) edges.insert(edges.end(), split.valid.edges.begin(), split.valid.edges.end());
    if (edges.empty()) log::warn("training graph has no edges");
    return Graph::from_edges(num_nodes, edges);
}

inline Graph training_graph(const EdgeSplit& split, bool include_valid) {
    return training_graph(split, include_valid, split.min_num_nodes());
}

inline const EdgeList& stage_edges(const EdgeSplit& split, Stage stage) {
    return stage == Stage::Valid ? split.valid : split.test;
}

namespace detail {
inline void write_edge_list(std::ostream& out, const EdgeList& list) {
    for (std::size_t i = 0; i < list.size(); ++i) {
        out << list.edges[i].u << ' ' << list.edges[i].v;
        if (list.timed()) out << ' ' << list.years[i];
        out << '\n';
    }
}
}  // namespace detail

inline std::string format_split(const EdgeSplit& split) {
    std::ostringstream out;
    if (split.dynamic) out << "#dynamic\n";
    out << "#train\n";
    detail::write_edge_list(out, split.train);
    out << "#valid\n";
    detail::write_edge_list(out, split.valid);
    out << "#test\n";
    detail::write_edge_list(out, split.test);
    return out.str();
}

inline void save_split(const std::filesystem::path& path, const EdgeSplit& split) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Validation, "cannot write " + path.string());
    out << format_split(split);
}

/// Three sections (#train, #valid, #test) in edge-list syntax. A leading
/// #dynamic line marks a split whose pairs may recur across sections.
inline EdgeSplit load_split(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    EdgeSplit split;
    EdgeList* current = nullptr;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = detail::trim(line);
        if (view == "#train") { current = &split.train; continue; }
        if (view == "#valid") { current = &split.valid; continue; }
        if (view == "#test") { current = &split.test; continue; }
        if (view == "#dynamic") { split.dynamic = true; continue; }
        Edge e;
        std::optional<std::int64_t> year;
        if (!detail::parse_edge_line(view, line_no, e, year)) continue;
        if (!current) throw Error(ErrorKind::Parse, "edge before any section header at line " + std::to_string(line_no));
        detail::append_edge(*current, e, year, line_no);
    }
    return split;
}

}  // namespace heart
