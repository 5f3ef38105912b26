#pragma once

#include <vector>

#include "heart/graph.hpp"

namespace heart {

// Which endpoint of a positive (a, b) is held fixed. Left keeps a and yields
// pairs (a, v); Right keeps b and yields pairs (v, b).
enum class Side { Left, Right };

struct FilterPolicy {
    bool exclude_train = true;
    bool exclude_valid_for_test = true;
    // Dynamic graphs: earlier positives are legitimate negatives, so neither
    // exclusion applies.
    bool dynamic_mode = false;

    bool excludes_train() const { return exclude_train && !dynamic_mode; }
    bool excludes_valid(Stage stage) const {
        return stage == Stage::Test && exclude_valid_for_test && !dynamic_mode;
    }
};

// Membership index over the known positives used for filtering.
struct FilterIndex {
    NodeId num_nodes = 0;
    PairSet train;
    PairSet valid;

    FilterIndex() = default;
    FilterIndex(const EdgeSplit& split, NodeId n)
        : num_nodes(n), train(split.train.edges), valid(split.valid.edges) {}

    // True when (a, b) may serve as a negative for `positive`.
    bool admits(NodeId a, NodeId b, Edge positive, const FilterPolicy& policy, Stage stage) const {
        if (a == b) return false;
        if (pair_key(a, b) == pair_key(positive.u, positive.v)) return false;
        if (policy.excludes_train() && train.contains(a, b)) return false;
        if (policy.excludes_valid(stage) && valid.contains(a, b)) return false;
        return true;
    }
};

struct CandidateSet {
    NodeId anchor = 0;
    Side side = Side::Left;
    std::vector<NodeId> candidates;  // ascending

    Edge pair_for(NodeId v) const { return side == Side::Left ? Edge{anchor, v} : Edge{v, anchor}; }
};

inline NodeId anchor_of(Edge positive, Side side) { return side == Side::Left ? positive.u : positive.v; }
inline NodeId partner_of(Edge positive, Side side) { return side == Side::Left ? positive.v : positive.u; }

/// Corruptions of `positive` that keep the endpoint on `side` fixed and pass
/// the filter: no self-loop, not the sample itself, and (unless dynamic) not
/// a train positive, nor a valid positive when building test negatives.
/// Other test positives are not removed.
inline CandidateSet corruption_candidates(const FilterIndex& index, Edge positive, Side side,
                                          const FilterPolicy& policy, Stage stage) {
    if (positive.u >= index.num_nodes || positive.v >= index.num_nodes)
        throw Error(ErrorKind::Range, "positive endpoint outside graph");
    CandidateSet out;
    out.anchor = anchor_of(positive, side);
    out.side = side;
    out.candidates.reserve(index.num_nodes);
    for (NodeId v = 0; v < index.num_nodes; ++v)
        if (index.admits(out.anchor, v, positive, policy, stage)) out.candidates.push_back(v);
    return out;
}

}  // namespace heart
