#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "heart/candidates.hpp"
#include "heart/error.hpp"
#include "heart/graph.hpp"
#include "heart/heuristics.hpp"
#include "heart/parallel.hpp"
#include "heart/rng.hpp"

namespace heart {

enum class NegativeMode { Heart, Global, PerPositiveRandom };

inline std::string_view name(NegativeMode m) {
    switch (m) {
        case NegativeMode::Heart: return "heart";
        case NegativeMode::Global: return "global";
        case NegativeMode::PerPositiveRandom: return "per_positive_random";
    }
    return "?";
}

inline NegativeMode parse_negative_mode(std::string_view s) {
    if (s == "heart") return NegativeMode::Heart;
    if (s == "global") return NegativeMode::Global;
    if (s == "per_positive_random" || s == "per-positive" || s == "per_positive") return NegativeMode::PerPositiveRandom;
    throw Error(ErrorKind::Config, "unknown negative mode '" + std::string(s) + "'");
}

// Evaluation negatives. Global mode keeps one `shared` list ranked against
// every positive and leaves `negatives` empty; the other modes hold one list
// per positive.
struct NegativeSet {
    NegativeMode mode = NegativeMode::Heart;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<Edge> positives;
    std::vector<std::vector<Edge>> negatives;
    std::vector<Edge> shared;

    std::span<const Edge> negatives_for(std::size_t i) const {
        return mode == NegativeMode::Global ? std::span<const Edge>(shared) : std::span<const Edge>(negatives[i]);
    }

    friend bool operator==(const NegativeSet&, const NegativeSet&) = default;
};

// ---------------------------------------------------------------------------
// Ranking and rank aggregation

// Candidates ranked by one heuristic, best first. Only the first `scored`
// positions (strictly positive score) carry a rank for aggregation; the rest
// tie at zero and are left to the random fill.
struct HeuristicRanking {
    std::vector<NodeId> candidates;  // ascending node ids
    std::vector<std::size_t> rank;   // 1-based, parallel to candidates
    std::vector<NodeId> order;       // candidates by descending score
    std::size_t scored = 0;

    bool is_ranked(std::size_t i) const { return rank[i] <= scored; }
};

/// Sorts candidates by descending score, ties by ascending id. `scores` is
/// parallel to the ascending candidate list.
inline HeuristicRanking rank_by_heuristic(std::span<const NodeId> candidates, std::span<const double> scores) {
    if (candidates.size() != scores.size())
        throw Error(ErrorKind::Internal, "scores do not cover the candidate set");
    HeuristicRanking out;
    out.candidates.assign(candidates.begin(), candidates.end());
    std::vector<std::size_t> idx(candidates.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return candidates[a] < candidates[b];
    });
    out.rank.assign(candidates.size(), 0);
    out.order.reserve(candidates.size());
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
        out.rank[idx[pos]] = pos + 1;
        out.order.push_back(candidates[idx[pos]]);
        if (scores[idx[pos]] > 0.0) ++out.scored;
    }
    return out;
}

/// Ranking from a ScoreTable keyed by pair; every candidate must be present.
inline HeuristicRanking rank_by_heuristic(const CandidateSet& set, const ScoreTable& table) {
    std::unordered_map<NodeId, double> by_node;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& p = table.pairs[i];
        if (p.u == set.anchor) by_node[p.v] = table.scores[i];
        else if (p.v == set.anchor) by_node[p.u] = table.scores[i];
    }
    std::vector<double> scores(set.candidates.size());
    for (std::size_t i = 0; i < set.candidates.size(); ++i) {
        auto it = by_node.find(set.candidates[i]);
        if (it == by_node.end())
            throw Error(ErrorKind::Internal, "no score for candidate " + std::to_string(set.candidates[i]));
        scores[i] = it->second;
    }
    return rank_by_heuristic(set.candidates, scores);
}

inline constexpr std::size_t kUnranked = std::numeric_limits<std::size_t>::max();

struct CombinedRanking {
    std::vector<NodeId> candidates;  // ascending
    std::vector<std::size_t> total;  // min rank over heuristics, kUnranked if none
    std::vector<NodeId> order;       // ranked candidates by (total, id)
    std::vector<NodeId> unranked;    // ascending
};

/// Borda-style aggregation with g = min: each candidate takes its best rank
/// over the heuristics that score it.
inline CombinedRanking combine_ranks(std::span<const HeuristicRanking> rankings) {
    if (rankings.empty()) throw Error(ErrorKind::Internal, "combine_ranks needs at least one ranking");
    CombinedRanking out;
    out.candidates = rankings.front().candidates;
    for (const auto& r : rankings)
        if (r.candidates != out.candidates) throw Error(ErrorKind::Internal, "rankings cover different candidates");
    out.total.assign(out.candidates.size(), kUnranked);
    for (const auto& r : rankings)
        for (std::size_t i = 0; i < out.candidates.size(); ++i)
            if (r.is_ranked(i)) out.total[i] = std::min(out.total[i], r.rank[i]);

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < out.candidates.size(); ++i) {
        if (out.total[i] == kUnranked) out.unranked.push_back(out.candidates[i]);
        else idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (out.total[a] != out.total[b]) return out.total[a] < out.total[b];
        return out.candidates[a] < out.candidates[b];
    });
    out.order.reserve(idx.size());
    for (std::size_t i : idx) out.order.push_back(out.candidates[i]);
    return out;
}

/// Top k_half of the combined ranking; a shortfall is filled by uniform
/// draws without replacement from the unscored candidates.
inline std::vector<NodeId> select_top(const CombinedRanking& combined, std::size_t k_half, Rng& rng) {
    std::vector<NodeId> out(combined.order.begin(),
                            combined.order.begin() + static_cast<std::ptrdiff_t>(std::min(k_half, combined.order.size())));
    if (out.size() < k_half && !combined.unranked.empty()) {
        std::vector<NodeId> pool = combined.unranked;
        const std::size_t need = std::min(k_half - out.size(), pool.size());
        for (std::size_t i = 0; i < need; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
    }
    return out;
}

/// Hard negatives for one fixed endpoint given dense anchor scores, one
/// vector per heuristic.
inline std::vector<Edge> select_hard_negatives(const CandidateSet& set, std::span<const std::vector<double>> anchor_scores,
                                               std::size_t k_half, Rng& rng) {
    if (k_half == 0 || set.candidates.empty()) return {};
    std::vector<HeuristicRanking> rankings;
    rankings.reserve(anchor_scores.size());
    std::vector<double> scores(set.candidates.size());
    for (const auto& dense : anchor_scores) {
        for (std::size_t i = 0; i < set.candidates.size(); ++i) scores[i] = dense[set.candidates[i]];
        rankings.push_back(rank_by_heuristic(set.candidates, scores));
    }
    const auto chosen = select_top(combine_ranks(rankings), k_half, rng);
    std::vector<Edge> out;
    out.reserve(chosen.size());
    for (NodeId v : chosen) out.push_back(set.pair_for(v));
    return out;
}

/// Scores an anchor under a HeaRT heuristic. PPR seeds at the anchor; the
/// reversed direction uses the undirected identity
/// ppr(v -> a) = ppr(a -> v) * deg(a) / deg(v).
inline std::vector<double> heart_anchor_scores(const Graph& g, const FeatureMatrix* x, const HeuristicKind& kind,
                                               NodeId anchor) {
    auto scores = scores_from_anchor(g, x, kind, anchor);
    if (kind.tag == Heuristic::PPR && kind.direction == PprDirection::FromSecond) {
        const double da = static_cast<double>(g.degree(anchor));
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            if (v == anchor) continue;
            const auto dv = g.degree(v);
            scores[v] = dv == 0 ? 0.0 : scores[v] * da / static_cast<double>(dv);
        }
    }
    return scores;
}

/// Negatives of form (a, *) or (*, b) for one endpoint.
inline std::vector<Edge> heart_negatives_for_endpoint(const Graph& g, const FeatureMatrix* x, const CandidateSet& set,
                                                      std::span<const HeuristicKind> heuristics, std::size_t k_half,
                                                      Rng& rng) {
    std::vector<std::vector<double>> dense;
    for (const auto& h : heuristics) dense.push_back(heart_anchor_scores(g, x, h, set.anchor));
    return select_hard_negatives(set, dense, k_half, rng);
}

// ---------------------------------------------------------------------------
// Generators

struct HeartConfig {
    std::size_t k = 500;
    std::vector<HeuristicKind> heuristics;
    FilterPolicy policy;
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

/// {RA, PPR}, plus feature cosine when features are attached.
inline std::vector<HeuristicKind> default_heart_heuristics(bool have_features) {
    std::vector<HeuristicKind> hs{{.tag = Heuristic::RA}, {.tag = Heuristic::PPR}};
    if (have_features) hs.push_back({.tag = Heuristic::FeatureCosine});
    return hs;
}

/// HeaRT negatives for the given positives: k/2 per endpoint, left list
/// first. A short side is not topped up from the other side. Anchor scores
/// are computed once per distinct anchor; randomness is keyed by
/// (seed, positive index, side).
inline NegativeSet generate_heart(const Graph& g, const FeatureMatrix* x, const FilterIndex& index,
                                  std::span<const Edge> positives, Stage stage, const HeartConfig& cfg) {
    if (cfg.k % 2 != 0) throw Error(ErrorKind::Config, "HeaRT needs an even K, got " + std::to_string(cfg.k));
    if (cfg.heuristics.empty()) throw Error(ErrorKind::Config, "HeaRT needs at least one heuristic");
    for (const auto& h : cfg.heuristics) {
        h.validate();
        if (h.tag == Heuristic::FeatureCosine && !x) throw Error(ErrorKind::Config, "feature cosine requires node features");
    }
    if (x && x->num_nodes() < g.num_nodes()) throw Error(ErrorKind::Validation, "fewer feature rows than nodes");
    if (index.num_nodes != g.num_nodes()) throw Error(ErrorKind::Internal, "filter index and graph disagree on node count");

    const std::size_t k_half = cfg.k / 2;
    std::map<NodeId, std::vector<std::pair<std::size_t, Side>>> by_anchor;
    for (std::size_t i = 0; i < positives.size(); ++i) {
        g.check_node(positives[i].u);
        g.check_node(positives[i].v);
        by_anchor[positives[i].u].emplace_back(i, Side::Left);
        by_anchor[positives[i].v].emplace_back(i, Side::Right);
    }
    std::vector<std::pair<NodeId, std::vector<std::pair<std::size_t, Side>>>> groups(by_anchor.begin(), by_anchor.end());

    std::vector<std::vector<Edge>> left(positives.size()), right(positives.size());
    parallel_for(groups.size(), cfg.workers, [&](std::size_t gi) {
        const auto& [anchor, tasks] = groups[gi];
        std::vector<std::vector<double>> dense;
        dense.reserve(cfg.heuristics.size());
        for (const auto& h : cfg.heuristics) dense.push_back(heart_anchor_scores(g, x, h, anchor));
        for (const auto& [i, side] : tasks) {
            const auto set = corruption_candidates(index, positives[i], side, cfg.policy, stage);
            auto rng = substream(cfg.seed, i, side == Side::Left ? 0 : 1);
            (side == Side::Left ? left[i] : right[i]) = select_hard_negatives(set, dense, k_half, rng);
        }
    });

    NegativeSet out;
    out.mode = NegativeMode::Heart;
    out.k = cfg.k;
    out.seed = cfg.seed;
    out.positives.assign(positives.begin(), positives.end());
    out.negatives.resize(positives.size());
    for (std::size_t i = 0; i < positives.size(); ++i) {
        out.negatives[i] = std::move(left[i]);
        out.negatives[i].insert(out.negatives[i].end(), right[i].begin(), right[i].end());
    }
    return out;
}

inline NegativeSet generate_heart(const Graph& g, const FeatureMatrix* x, const EdgeSplit& split, Stage stage,
                                  const HeartConfig& cfg) {
    const FilterIndex index(split, g.num_nodes());
    return generate_heart(g, x, index, stage_edges(split, stage).edges, stage, cfg);
}

inline constexpr std::size_t kMaxConsecutiveRejections = 1'000'000;

/// One shared list of `count` uniform pairs (both endpoints uniform over the
/// nodes), rejecting self-loops, the stage's own positives and filtered
/// known positives.
inline NegativeSet generate_global_random(const FilterIndex& index, std::span<const Edge> positives, Stage stage,
                                          std::size_t count, const FilterPolicy& policy, std::uint64_t seed) {
    if (count < 1) throw Error(ErrorKind::Config, "negative count must be >= 1");
    if (index.num_nodes < 2) throw Error(ErrorKind::Saturation, "need at least two nodes to sample pairs");
    const PairSet stage_pos(positives);
    Rng rng(seed);
    NegativeSet out;
    out.mode = NegativeMode::Global;
    out.k = count;
    out.seed = seed;
    out.positives.assign(positives.begin(), positives.end());
    out.shared.reserve(count);
    std::size_t rejected = 0;
    while (out.shared.size() < count) {
        const auto a = static_cast<NodeId>(rng.below(index.num_nodes));
        const auto b = static_cast<NodeId>(rng.below(index.num_nodes));
        const bool ok = a != b && !stage_pos.contains(a, b) && !(policy.excludes_train() && index.train.contains(a, b)) &&
                        !(policy.excludes_valid(stage) && index.valid.contains(a, b));
        if (!ok) {
            if (++rejected > kMaxConsecutiveRejections)
                throw Error(ErrorKind::Saturation, "filter rejected more than 1e6 consecutive draws");
            continue;
        }
        rejected = 0;
        out.shared.push_back({a, b});
    }
    return out;
}

inline NegativeSet generate_global_random(const EdgeSplit& split, Stage stage, std::size_t count,
                                          const FilterPolicy& policy, std::uint64_t seed, NodeId num_nodes) {
    const FilterIndex index(split, num_nodes);
    return generate_global_random(index, stage_edges(split, stage).edges, stage, count, policy, seed);
}

/// k distinct random corruptions per positive; each draw picks the kept
/// endpoint by a fair coin and the other endpoint uniformly.
inline NegativeSet generate_per_positive_random(const FilterIndex& index, std::span<const Edge> positives, Stage stage,
                                                std::size_t k, const FilterPolicy& policy, std::uint64_t seed,
                                                unsigned workers = 1) {
    if (k < 1) throw Error(ErrorKind::Config, "k must be >= 1");
    NegativeSet out;
    out.mode = NegativeMode::PerPositiveRandom;
    out.k = k;
    out.seed = seed;
    out.positives.assign(positives.begin(), positives.end());
    out.negatives.resize(positives.size());
    parallel_for(positives.size(), workers, [&](std::size_t i) {
        const Edge pos = positives[i];
        auto rng = substream(seed, i, 2);
        std::unordered_set<std::uint64_t> taken;
        auto& negs = out.negatives[i];
        std::size_t rejected = 0;
        while (negs.size() < k) {
            const auto side = rng.coin() ? Side::Right : Side::Left;
            const auto other = static_cast<NodeId>(rng.below(index.num_nodes));
            const NodeId anchor = anchor_of(pos, side);
            const Edge e = side == Side::Left ? Edge{anchor, other} : Edge{other, anchor};
            if (!index.admits(e.u, e.v, pos, policy, stage) || !taken.insert(pair_key(e.u, e.v)).second) {
                if (++rejected > kMaxConsecutiveRejections)
                    throw Error(ErrorKind::Saturation, "filter rejected more than 1e6 consecutive draws for positive " +
                                                           std::to_string(i));
                continue;
            }
            rejected = 0;
            negs.push_back(e);
        }
    });
    return out;
}

inline NegativeSet generate_per_positive_random(const EdgeSplit& split, Stage stage, std::size_t k,
                                                const FilterPolicy& policy, std::uint64_t seed, NodeId num_nodes,
                                                unsigned workers = 1) {
    const FilterIndex index(split, num_nodes);
    return generate_per_positive_random(index, stage_edges(split, stage).edges, stage, k, policy, seed, workers);
}

/// Uniform subsample of n positives without replacement, original order kept.
inline std::vector<Edge> subsample_positives(std::span<const Edge> positives, std::size_t n, std::uint64_t seed) {
    if (n >= positives.size()) return {positives.begin(), positives.end()};
    std::vector<std::size_t> idx(positives.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto rng = substream(seed, 0, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    std::vector<Edge> out;
    out.reserve(n);
    for (std::size_t i : idx) out.push_back(positives[i]);
    return out;
}

// ---------------------------------------------------------------------------
// NegativeSet file
//
//   #<mode> <k> <seed>
//   #shared            (global mode only, followed by one "u v" per line)
//   u v | n1u n1v n2u n2v ...

inline std::string format_negative_set(const NegativeSet& set) {
    std::string out;
    out.reserve(64 + set.positives.size() * (16 + 16 * set.k));
    auto num = [&](NodeId x) { out += std::to_string(x); };
    out += '#';
    out += name(set.mode);
    out += ' ' + std::to_string(set.k) + ' ' + std::to_string(set.seed) + '\n';
    if (set.mode == NegativeMode::Global) {
        out += "#shared\n";
        for (const auto& e : set.shared) {
            num(e.u);
            out += ' ';
            num(e.v);
            out += '\n';
        }
    }
    for (std::size_t i = 0; i < set.positives.size(); ++i) {
        num(set.positives[i].u);
        out += ' ';
        num(set.positives[i].v);
        out += " |";
        if (set.mode != NegativeMode::Global) {
            for (const auto& e : set.negatives[i]) {
                out += ' ';
                num(e.u);
                out += ' ';
                num(e.v);
            }
        }
        out += '\n';
    }
    return out;
}

inline void save_negative_set(const std::filesystem::path& path, const NegativeSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Validation, "cannot write " + path.string());
    out << format_negative_set(set);
}

inline NegativeSet parse_negative_set(std::istream& in, const std::string& source = "<stream>") {
    NegativeSet set;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false, in_shared = false;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = detail::trim(line);
        if (view.empty()) continue;
        if (!have_header) {
            if (view.front() != '#') fail("missing '#mode k seed' header");
            const auto toks = detail::split_ws(view.substr(1));
            if (toks.size() != 3 || !detail::parse_int(toks[1], set.k) || !detail::parse_int(toks[2], set.seed))
                fail("malformed header");
            try {
                set.mode = parse_negative_mode(toks[0]);
            } catch (const Error&) {
                fail("unknown mode");
            }
            have_header = true;
            continue;
        }
        if (view == "#shared") {
            if (set.mode != NegativeMode::Global) fail("#shared section outside global mode");
            in_shared = true;
            continue;
        }
        if (view.front() == '#') continue;
        const auto bar = view.find('|');
        if (bar == std::string_view::npos) {
            if (!in_shared) fail("expected 'u v | ...' record");
            const auto toks = detail::split_ws(view);
            Edge e;
            if (toks.size() != 2 || !detail::parse_int(toks[0], e.u) || !detail::parse_int(toks[1], e.v))
                fail("malformed shared pair");
            set.shared.push_back(e);
            continue;
        }
        in_shared = false;
        const auto head = detail::split_ws(view.substr(0, bar));
        Edge pos;
        if (head.size() != 2 || !detail::parse_int(head[0], pos.u) || !detail::parse_int(head[1], pos.v))
            fail("malformed positive");
        const auto tail = detail::split_ws(view.substr(bar + 1));
        if (tail.size() % 2 != 0) fail("odd number of negative endpoints");
        std::vector<Edge> negs;
        negs.reserve(tail.size() / 2);
        for (std::size_t t = 0; t < tail.size(); t += 2) {
            Edge e;
            if (!detail::parse_int(tail[t], e.u) || !detail::parse_int(tail[t + 1], e.v)) fail("malformed negative");
            negs.push_back(e);
        }
        set.positives.push_back(pos);
        if (set.mode == NegativeMode::Global) {
            if (!negs.empty()) fail("global mode records carry no per-positive negatives");
        } else {
            set.negatives.push_back(std::move(negs));
        }
    }
    if (!have_header) throw Error(ErrorKind::Parse, source + ": empty negative set file");
    return set;
}

inline NegativeSet load_negative_set(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    return parse_negative_set(in, path.string());
}

}  // namespace heart
