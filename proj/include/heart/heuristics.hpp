#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "heart/error.hpp"
#include "heart/graph.hpp"
#include "heart/parallel.hpp"

namespace heart {

enum class Heuristic { CN, AA, RA, ShortestPath, Katz, PPR, FeatureCosine };

// Which endpoint seeds the push when PPR scores a pair (u, v).
enum class PprDirection { FromFirst, FromSecond };

struct HeuristicKind {
    Heuristic tag = Heuristic::RA;
    double beta = 0.05;
    std::uint32_t max_len = 5;
    double alpha = 0.15;
    double epsilon = 1e-5;
    std::uint32_t cutoff = 6;
    PprDirection direction = PprDirection::FromFirst;

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Config, "PPR alpha must be in (0, 1]");
        if (!(epsilon > 0.0)) throw Error(ErrorKind::Config, "PPR epsilon must be > 0");
        if (!(beta > 0.0)) throw Error(ErrorKind::Config, "Katz beta must be > 0");
        if (max_len < 1) throw Error(ErrorKind::Config, "Katz max_len must be >= 1");
        if (cutoff < 1) throw Error(ErrorKind::Config, "shortest-path cutoff must be >= 1");
    }
};

inline std::string_view name(Heuristic h) {
    switch (h) {
        case Heuristic::CN: return "cn";
        case Heuristic::AA: return "aa";
        case Heuristic::RA: return "ra";
        case Heuristic::ShortestPath: return "sp";
        case Heuristic::Katz: return "katz";
        case Heuristic::PPR: return "ppr";
        case Heuristic::FeatureCosine: return "cos";
    }
    return "?";
}

inline Heuristic parse_heuristic(std::string_view s) {
    if (s == "cn") return Heuristic::CN;
    if (s == "aa") return Heuristic::AA;
    if (s == "ra") return Heuristic::RA;
    if (s == "sp" || s == "shortest_path") return Heuristic::ShortestPath;
    if (s == "katz") return Heuristic::Katz;
    if (s == "ppr") return Heuristic::PPR;
    if (s == "cos" || s == "cosine") return Heuristic::FeatureCosine;
    throw Error(ErrorKind::Config, "unknown heuristic '" + std::string(s) + "'");
}

// One-line description used as the ScoreTable header.
inline std::string describe(const HeuristicKind& kind) {
    std::ostringstream out;
    out.precision(17);
    out << "heuristic=" << name(kind.tag);
    switch (kind.tag) {
        case Heuristic::Katz: out << " beta=" << kind.beta << " max_len=" << kind.max_len; break;
        case Heuristic::PPR:
            out << " alpha=" << kind.alpha << " epsilon=" << kind.epsilon
                << " direction=" << (kind.direction == PprDirection::FromFirst ? "first" : "second");
            break;
        case Heuristic::ShortestPath: out << " cutoff=" << kind.cutoff; break;
        default: break;
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Common-neighbor family

namespace detail {

template <typename Weight>
double common_neighbor_sum(const Graph& g, NodeId u, NodeId v, Weight&& weight) {
    g.check_node(u);
    g.check_node(v);
    const auto a = g.neighbors(u);
    const auto b = g.neighbors(v);
    double sum = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            sum += weight(a[i]);
            ++i;
            ++j;
        }
    }
    return sum;
}

inline double aa_weight(const Graph& g, NodeId w) {
    const auto d = g.degree(w);
    return d <= 1 ? 0.0 : 1.0 / std::log(static_cast<double>(d));
}

inline double ra_weight(const Graph& g, NodeId w) { return 1.0 / static_cast<double>(g.degree(w)); }

}  // namespace detail

inline double cn(const Graph& g, NodeId u, NodeId v) {
    return detail::common_neighbor_sum(g, u, v, [](NodeId) { return 1.0; });
}

/// Adamic-Adar. A common neighbor of degree <= 1 contributes nothing.
inline double aa(const Graph& g, NodeId u, NodeId v) {
    return detail::common_neighbor_sum(g, u, v, [&](NodeId w) { return detail::aa_weight(g, w); });
}

inline double ra(const Graph& g, NodeId u, NodeId v) {
    return detail::common_neighbor_sum(g, u, v, [&](NodeId w) { return detail::ra_weight(g, w); });
}

// ---------------------------------------------------------------------------
// Path-based

/// Hop distance by bidirectional BFS, or nullopt when it exceeds cutoff.
inline std::optional<std::uint32_t> bfs_distance(const Graph& g, NodeId u, NodeId v, std::uint32_t cutoff) {
    g.check_node(u);
    g.check_node(v);
    if (u == v) return 0;
    std::unordered_map<NodeId, std::uint32_t> seen_s{{u, 0}}, seen_t{{v, 0}};
    std::vector<NodeId> front_s{u}, front_t{v};
    std::uint32_t depth_s = 0, depth_t = 0;
    while (!front_s.empty() && !front_t.empty() && depth_s + depth_t < cutoff) {
        const bool grow_s = front_s.size() <= front_t.size();
        auto& front = grow_s ? front_s : front_t;
        auto& seen = grow_s ? seen_s : seen_t;
        const auto& other = grow_s ? seen_t : seen_s;
        auto& depth = grow_s ? depth_s : depth_t;
        std::vector<NodeId> next;
        std::optional<std::uint32_t> best;
        for (NodeId x : front) {
            for (NodeId y : g.neighbors(x)) {
                if (seen.count(y)) continue;
                seen.emplace(y, depth + 1);
                next.push_back(y);
                if (auto it = other.find(y); it != other.end()) {
                    const auto total = depth + 1 + it->second;
                    if (!best || total < *best) best = total;
                }
            }
        }
        ++depth;
        if (best) return *best <= cutoff ? best : std::nullopt;
        front.swap(next);
    }
    return std::nullopt;
}

/// Reciprocal hop distance, 0 beyond cutoff. u == v scores 1.0, the same
/// as an adjacent pair, rather than an infinite value.
inline double shortest_path_score(const Graph& g, NodeId u, NodeId v, std::uint32_t cutoff = 6) {
    if (u == v) {
        g.check_node(u);
        return 1.0;
    }
    const auto d = bfs_distance(g, u, v, cutoff);
    return d ? 1.0 / static_cast<double>(*d) : 0.0;
}

/// Truncated Katz scores from `source` to every node:
/// sum_{l=1..max_len} beta^l * walks_l(source, .), by repeated sparse products.
inline std::vector<double> katz_from(const Graph& g, NodeId source, double beta, std::uint32_t max_len) {
    g.check_node(source);
    const NodeId n = g.num_nodes();
    std::vector<double> walks(n, 0.0), next(n, 0.0), score(n, 0.0);
    walks[source] = 1.0;
    double weight = 1.0;
    for (std::uint32_t l = 1; l <= max_len; ++l) {
        std::fill(next.begin(), next.end(), 0.0);
        for (NodeId x = 0; x < n; ++x) {
            if (walks[x] == 0.0) continue;
            for (NodeId y : g.neighbors(x)) next[y] += walks[x];
        }
        walks.swap(next);
        weight *= beta;
        for (NodeId x = 0; x < n; ++x) score[x] += weight * walks[x];
    }
    return score;
}

inline double katz(const Graph& g, NodeId u, NodeId v, double beta = 0.05, std::uint32_t max_len = 5) {
    g.check_node(v);
    return katz_from(g, u, beta, max_len)[v];
}

// ---------------------------------------------------------------------------
// Personalized PageRank

struct PprResult {
    std::vector<double> estimate;  // dense over nodes
    std::vector<double> residual;  // dense over nodes

    double operator[](NodeId v) const { return estimate[v]; }
};

/// Forward push from `source` with restart probability alpha. Terminates
/// once every node u has residual < epsilon * deg(u) (zero for isolated
/// nodes, whose mass is settled without spreading). FIFO order, so the
/// result is deterministic.
inline PprResult ppr_push(const Graph& g, NodeId source, double alpha = 0.15, double epsilon = 1e-5) {
    g.check_node(source);
    if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Config, "PPR alpha must be in (0, 1]");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::Config, "PPR epsilon must be > 0");
    const NodeId n = g.num_nodes();
    PprResult out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    auto& p = out.estimate;
    auto& r = out.residual;
    std::vector<char> queued(n, 0);
    std::deque<NodeId> queue{source};
    r[source] = 1.0;
    queued[source] = 1;
    while (!queue.empty()) {
        const NodeId x = queue.front();
        queue.pop_front();
        queued[x] = 0;
        const auto deg = g.degree(x);
        const double rx = r[x];
        if (deg == 0) {
            p[x] += alpha * rx;
            r[x] = 0.0;
            continue;
        }
        if (rx < epsilon * static_cast<double>(deg)) continue;
        p[x] += alpha * rx;
        r[x] = 0.0;
        const double share = (1.0 - alpha) * rx / static_cast<double>(deg);
        if (share == 0.0) continue;
        for (NodeId y : g.neighbors(x)) {
            r[y] += share;
            if (!queued[y] && r[y] >= epsilon * static_cast<double>(g.degree(y))) {
                queued[y] = 1;
                queue.push_back(y);
            }
        }
    }
    return out;
}

/// Sparse view of ppr_push: (node, score) for nonzero entries, ascending id.
inline std::vector<std::pair<NodeId, double>> ppr(const Graph& g, NodeId source, double alpha = 0.15,
                                                  double epsilon = 1e-5) {
    const auto res = ppr_push(g, source, alpha, epsilon);
    std::vector<std::pair<NodeId, double>> out;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (res.estimate[v] != 0.0) out.emplace_back(v, res.estimate[v]);
    return out;
}

// ---------------------------------------------------------------------------
// Features

/// Cosine similarity of two feature rows; 0 with a warning if either is zero.
inline double feature_cosine(const FeatureMatrix& x, NodeId u, NodeId v) {
    if (u >= x.num_nodes() || v >= x.num_nodes())
        throw Error(ErrorKind::Range, "feature row out of range");
    const auto a = x.row(u);
    const auto b = x.row(v);
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        log::warn("zero-norm feature row in cosine similarity (nodes " + std::to_string(u) + ", " +
                  std::to_string(v) + ")");
        return 0.0;
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Batched scoring

struct ScoreTable {
    std::vector<Edge> pairs;
    std::vector<double> scores;
    std::string header;

    std::size_t size() const { return pairs.size(); }
};

inline double score_pair(const Graph& g, const FeatureMatrix* x, const HeuristicKind& kind, NodeId u, NodeId v) {
    switch (kind.tag) {
        case Heuristic::CN: return cn(g, u, v);
        case Heuristic::AA: return aa(g, u, v);
        case Heuristic::RA: return ra(g, u, v);
        case Heuristic::ShortestPath: return shortest_path_score(g, u, v, kind.cutoff);
        case Heuristic::Katz: return katz(g, u, v, kind.beta, kind.max_len);
        case Heuristic::PPR: {
            g.check_node(u);
            g.check_node(v);
            const auto [s, t] = kind.direction == PprDirection::FromFirst ? std::pair{u, v} : std::pair{v, u};
            return ppr_push(g, s, kind.alpha, kind.epsilon)[t];
        }
        case Heuristic::FeatureCosine:
            if (!x) throw Error(ErrorKind::Config, "feature cosine requires node features");
            return feature_cosine(*x, u, v);
    }
    throw Error(ErrorKind::Internal, "unhandled heuristic");
}

/// Scores of `anchor` against every node (dense). Agrees bit-for-bit with
/// score_pair(anchor, v): common-neighbor sums accumulate in the same
/// ascending-neighbor order. PPR is seeded at the anchor.
inline std::vector<double> scores_from_anchor(const Graph& g, const FeatureMatrix* x, const HeuristicKind& kind,
                                              NodeId anchor) {
    g.check_node(anchor);
    const NodeId n = g.num_nodes();
    std::vector<double> out(n, 0.0);
    switch (kind.tag) {
        case Heuristic::CN:
        case Heuristic::AA:
        case Heuristic::RA: {
            for (NodeId w : g.neighbors(anchor)) {
                const double weight = kind.tag == Heuristic::CN   ? 1.0
                                      : kind.tag == Heuristic::AA ? detail::aa_weight(g, w)
                                                                  : detail::ra_weight(g, w);
                for (NodeId v : g.neighbors(w)) out[v] += weight;
            }
            // cn(u, u) counts every neighbor; the two-hop walk above already does.
            return out;
        }
        case Heuristic::Katz: return katz_from(g, anchor, kind.beta, kind.max_len);
        case Heuristic::PPR: return ppr_push(g, anchor, kind.alpha, kind.epsilon).estimate;
        case Heuristic::ShortestPath: {
            std::vector<std::uint32_t> dist(n, std::numeric_limits<std::uint32_t>::max());
            std::vector<NodeId> front{anchor};
            dist[anchor] = 0;
            out[anchor] = 1.0;
            for (std::uint32_t d = 1; d <= kind.cutoff && !front.empty(); ++d) {
                std::vector<NodeId> next;
                for (NodeId y : front)
                    for (NodeId z : g.neighbors(y))
                        if (dist[z] == std::numeric_limits<std::uint32_t>::max()) {
                            dist[z] = d;
                            out[z] = 1.0 / static_cast<double>(d);
                            next.push_back(z);
                        }
                front.swap(next);
            }
            return out;
        }
        case Heuristic::FeatureCosine:
            if (!x) throw Error(ErrorKind::Config, "feature cosine requires node features");
            for (NodeId v = 0; v < n; ++v) out[v] = feature_cosine(*x, anchor, v);
            return out;
    }
    throw Error(ErrorKind::Internal, "unhandled heuristic");
}

/// One score per pair, identical to per-pair calls. PPR and Katz pairs are
/// grouped by their seed node so each seed is expanded once.
inline ScoreTable score_pairs(const Graph& g, const FeatureMatrix* x, const HeuristicKind& kind,
                              std::span<const Edge> pairs, unsigned workers = 1) {
    kind.validate();
    if (kind.tag == Heuristic::FeatureCosine && !x)
        throw Error(ErrorKind::Config, "feature cosine requires node features");
    ScoreTable table;
    table.header = describe(kind);
    table.pairs.assign(pairs.begin(), pairs.end());
    table.scores.assign(pairs.size(), 0.0);
    for (const auto& p : pairs) {
        g.check_node(p.u);
        g.check_node(p.v);
    }

    if (kind.tag == Heuristic::PPR || kind.tag == Heuristic::Katz) {
        const bool first = kind.tag == Heuristic::Katz || kind.direction == PprDirection::FromFirst;
        std::map<NodeId, std::vector<std::size_t>> by_seed;
        for (std::size_t i = 0; i < pairs.size(); ++i) by_seed[first ? pairs[i].u : pairs[i].v].push_back(i);
        std::vector<std::pair<NodeId, std::vector<std::size_t>>> groups(by_seed.begin(), by_seed.end());
        parallel_for(groups.size(), workers, [&](std::size_t gi) {
            const auto& [seed, idx] = groups[gi];
            const auto vec = kind.tag == Heuristic::PPR ? ppr_push(g, seed, kind.alpha, kind.epsilon).estimate
                                                        : katz_from(g, seed, kind.beta, kind.max_len);
            for (std::size_t i : idx) table.scores[i] = vec[first ? pairs[i].v : pairs[i].u];
        });
        return table;
    }
    parallel_for(pairs.size(), workers,
                 [&](std::size_t i) { table.scores[i] = score_pair(g, x, kind, pairs[i].u, pairs[i].v); });
    return table;
}

// ---------------------------------------------------------------------------
// ScoreTable TSV: "#<header>" then "u\tv\tscore" per line.

inline std::string format_score(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", s);
    return buf;
}

inline void save_score_table(const std::filesystem::path& path, const ScoreTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Validation, "cannot write " + path.string());
    out << '#' << (table.header.empty() ? "heuristic=external" : table.header) << '\n';
    for (std::size_t i = 0; i < table.size(); ++i)
        out << table.pairs[i].u << '\t' << table.pairs[i].v << '\t' << format_score(table.scores[i]) << '\n';
}

inline ScoreTable load_score_table(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    ScoreTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = detail::trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            if (line_no == 1) table.header = std::string(view.substr(1));
            continue;
        }
        const auto toks = detail::split_ws(view);
        Edge e;
        double s = 0;
        if (toks.size() != 3 || !detail::parse_int(toks[0], e.u) || !detail::parse_int(toks[1], e.v) ||
            !detail::parse_double(toks[2], s)) {
            throw Error(ErrorKind::Parse, path.string() + ": malformed score at line " + std::to_string(line_no));
        }
        if (!std::isfinite(s))
            throw Error(ErrorKind::Validation, path.string() + ": non-finite score at line " + std::to_string(line_no));
        table.pairs.push_back(e);
        table.scores.push_back(s);
    }
    return table;
}

}  // namespace heart
