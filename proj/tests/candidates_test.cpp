#include <gtest/gtest.h>

#include <set>

#include "heart/candidates.hpp"
#include "heart/synthetic.hpp"
#include "oracles.hpp"

using namespace heart;

namespace {
FilterIndex index_for(NodeId n, std::vector<Edge> train, std::vector<Edge> valid = {}) {
    EdgeSplit split;
    split.train.edges = std::move(train);
    split.valid.edges = std::move(valid);
    return FilterIndex(split, n);
}
}  // namespace

TEST(CorruptionCandidates, Examples) {
    const auto bare = index_for(3, {});
    EXPECT_EQ(corruption_candidates(bare, {0, 1}, Side::Left, {}, Stage::Test).candidates, (std::vector<NodeId>{2}));

    const auto with_train = index_for(3, {{0, 2}});
    EXPECT_TRUE(corruption_candidates(with_train, {0, 1}, Side::Left, {}, Stage::Test).candidates.empty());

    FilterPolicy dynamic;
    dynamic.dynamic_mode = true;
    EXPECT_EQ(corruption_candidates(with_train, {0, 1}, Side::Left, dynamic, Stage::Test).candidates,
              (std::vector<NodeId>{2}));
}

TEST(CorruptionCandidates, ValidFilteredOnlyAtTest) {
    const auto idx = index_for(4, {}, {{0, 3}});
    EXPECT_EQ(corruption_candidates(idx, {0, 1}, Side::Left, {}, Stage::Valid).candidates,
              (std::vector<NodeId>{2, 3}));
    EXPECT_EQ(corruption_candidates(idx, {0, 1}, Side::Left, {}, Stage::Test).candidates, (std::vector<NodeId>{2}));
    FilterPolicy keep_valid;
    keep_valid.exclude_valid_for_test = false;
    EXPECT_EQ(corruption_candidates(idx, {0, 1}, Side::Left, keep_valid, Stage::Test).candidates,
              (std::vector<NodeId>{2, 3}));
}

TEST(CorruptionCandidates, RightSideAndPairOrientation) {
    const auto idx = index_for(4, {{3, 1}});
    const auto set = corruption_candidates(idx, {0, 1}, Side::Right, {}, Stage::Test);
    EXPECT_EQ(set.anchor, 1u);
    EXPECT_EQ(set.candidates, (std::vector<NodeId>{2}));
    EXPECT_EQ(set.pair_for(2), (Edge{2, 1}));
    EXPECT_THROW(corruption_candidates(idx, {0, 9}, Side::Right, {}, Stage::Test), Error);
}

// Enumeration oracle plus the structural invariants on random splits.
TEST(CandidateProperty, MatchesEnumerationAndInvariants) {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        const NodeId n = 25;
        EdgeList list;
        list.edges = synthetic::erdos_renyi(n, 0.2, seed);
        const auto split = make_split(list, {0.7, 0.1, 0.2}, seed);
        const FilterIndex idx(split, n);
        for (const auto stage : {Stage::Valid, Stage::Test}) {
            std::set<std::pair<NodeId, NodeId>> banned;
            for (auto e : split.train.edges) banned.insert(std::minmax(e.u, e.v));
            if (stage == Stage::Test)
                for (auto e : split.valid.edges) banned.insert(std::minmax(e.u, e.v));
            for (const auto& pos : stage_edges(split, stage).edges) {
                std::set<std::uint64_t> left_pairs;
                for (const auto side : {Side::Left, Side::Right}) {
                    const auto set = corruption_candidates(idx, pos, side, {}, stage);
                    EXPECT_EQ(set.candidates, oracle::candidates(n, pos, side == Side::Left, banned));
                    EXPECT_LE(set.candidates.size(), n - 2u);
                    for (NodeId v : set.candidates) {
                        const Edge e = set.pair_for(v);
                        const bool shares_u = e.u == pos.u || e.v == pos.u;
                        const bool shares_v = e.u == pos.v || e.v == pos.v;
                        EXPECT_NE(shares_u, shares_v);
                        EXPECT_FALSE(idx.train.contains(e));
                        if (stage == Stage::Test) {
                            EXPECT_FALSE(idx.valid.contains(e));
                        }
                        if (side == Side::Left) left_pairs.insert(pair_key(e.u, e.v));
                        else EXPECT_EQ(left_pairs.count(pair_key(e.u, e.v)), 0u);
                    }
                }
            }
        }
    }
}
