#include <gtest/gtest.h>

#include <set>

#include "heart/diagnostics.hpp"
#include "heart/sampler.hpp"
#include "heart/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace heart;

namespace {

HeuristicRanking rank_map(const std::map<NodeId, double>& scores) {
    std::vector<NodeId> c;
    std::vector<double> s;
    for (auto [v, x] : scores) {
        c.push_back(v);
        s.push_back(x);
    }
    return rank_by_heuristic(c, s);
}

std::size_t total_of(const CombinedRanking& r, NodeId v) {
    const auto it = std::find(r.candidates.begin(), r.candidates.end(), v);
    return r.total[static_cast<std::size_t>(it - r.candidates.begin())];
}

}  // namespace

TEST(RankByHeuristic, TiesByAscendingId) {
    const auto r = rank_map({{2, 0.9}, {5, 0.9}, {7, 0.1}});
    EXPECT_EQ(r.order, (std::vector<NodeId>{2, 5, 7}));
    EXPECT_EQ(r.rank, (std::vector<std::size_t>{1, 2, 3}));
    EXPECT_EQ(r.scored, 3u);
    const auto single = rank_map({{4, 0.3}});
    EXPECT_EQ(single.rank, (std::vector<std::size_t>{1}));
    const auto zeros = rank_map({{9, 0}, {1, 0}, {4, 0}});
    EXPECT_EQ(zeros.order, (std::vector<NodeId>{1, 4, 9}));
    EXPECT_EQ(zeros.scored, 0u);
}

TEST(RankByHeuristic, FromScoreTable) {
    CandidateSet set{.anchor = 0, .side = Side::Left, .candidates = {2, 3}};
    ScoreTable t{.pairs = {{0, 3}, {2, 0}}, .scores = {0.5, 0.7}, .header = ""};
    EXPECT_EQ(rank_by_heuristic(set, t).order, (std::vector<NodeId>{2, 3}));
    t.pairs.pop_back();
    t.scores.pop_back();
    try {
        rank_by_heuristic(set, t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Internal);
    }
}

TEST(CombineRanks, MinAggregation) {
    // v = 10 has ranks (3, 1).
    const std::vector<HeuristicRanking> a{rank_map({{10, 1}, {11, 3}, {12, 2}}), rank_map({{10, 5}, {11, 1}, {12, 0.5}})};
    const auto ca = combine_ranks(a);
    EXPECT_EQ(total_of(ca, 10), 1u);
    // m = 1 reproduces the single ranking.
    const std::vector<HeuristicRanking> one{a[0]};
    const auto c1 = combine_ranks(one);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(c1.total[i], a[0].rank[i]);
    EXPECT_EQ(c1.order, a[0].order);
    // v = 1 with ranks (2, 5) and w = 2 with ranks (4, 3) -> 2 and 3, order [v, w].
    const std::vector<HeuristicRanking> b{
        rank_map({{0, 9}, {1, 8}, {3, 7}, {2, 6}, {4, 5}}),
        rank_map({{0, 9}, {3, 8}, {2, 7}, {4, 6}, {1, 5}}),
    };
    const auto cb = combine_ranks(b);
    EXPECT_EQ(total_of(cb, 1), 2u);
    EXPECT_EQ(total_of(cb, 2), 3u);
    const auto pos_v = std::find(cb.order.begin(), cb.order.end(), 1u);
    const auto pos_w = std::find(cb.order.begin(), cb.order.end(), 2u);
    EXPECT_LT(pos_v, pos_w);
    EXPECT_THROW(combine_ranks(std::vector<HeuristicRanking>{rank_map({{1, 1}}), rank_map({{2, 1}})}), Error);
    EXPECT_THROW(combine_ranks(std::vector<HeuristicRanking>{}), Error);
}

// Hand-run HeaRT selection on ten candidates with two heuristics.
//   h1: 1:.9 2:.8 3:.7 4:.6 5:.5 6:.4 7:.3 8:.2 9:.1 10:.05   (ranks = id)
//   h2: 10:.9 9:.8 8:.7 7:.6 6:.5 5:.4 4:.3 3:.2 2:.1 1:.05   (ranks = 11 - id)
// R_total = min(id, 11 - id): 1,2,3,4,5,5,4,3,2,1 for ids 1..10.
// ArgSort with id tie-break: 1,10,2,9,3,8,... -> top 3 = {1, 10, 2}.
TEST(HeartEndpoint, TenCandidateTrace) {
    CandidateSet set{.anchor = 0, .side = Side::Left, .candidates = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}};
    std::vector<std::vector<double>> dense(2, std::vector<double>(11, 0.0));
    for (NodeId v = 1; v <= 10; ++v) {
        dense[0][v] = 1.0 - 0.1 * v + (v == 10 ? 0.05 : 0.0);
        dense[1][v] = 1.0 - 0.1 * (11 - v) + (v == 1 ? 0.05 : 0.0);
    }
    Rng rng(0);
    const auto got = select_hard_negatives(set, dense, 3, rng);
    EXPECT_EQ(got, (std::vector<Edge>{{0, 1}, {0, 10}, {0, 2}}));
}

TEST(HeartEndpoint, ShortAndEmpty) {
    const Graph g = Graph::from_edges(3, std::vector<Edge>{{0, 1}, {1, 2}});
    CandidateSet set{.anchor = 0, .side = Side::Left, .candidates = {2}};
    const std::vector<HeuristicKind> hs{{.tag = Heuristic::RA}};
    Rng rng(1);
    EXPECT_EQ(heart_negatives_for_endpoint(g, nullptr, set, hs, 5, rng), (std::vector<Edge>{{0, 2}}));
    EXPECT_TRUE(heart_negatives_for_endpoint(g, nullptr, set, hs, 0, rng).empty());
    CandidateSet two{.anchor = 0, .side = Side::Right, .candidates = {1, 2}};
    const auto both = heart_negatives_for_endpoint(g, nullptr, two, hs, 5, rng);
    EXPECT_EQ(both.size(), 2u);
    EXPECT_EQ(both.front(), (Edge{2, 0}));  // RA(0, 2) > 0, RA(0, 1) = 0
}

TEST(HeartEndpoint, RandomFillUsesUnscoredCandidatesOnly) {
    // Node 0's component is {0, 1, 2}; nodes 3..9 are unreachable and unscored.
    const Graph g = Graph::from_edges(10, std::vector<Edge>{{0, 1}, {1, 2}, {3, 4}, {5, 6}});
    CandidateSet set{.anchor = 0, .side = Side::Left, .candidates = {2, 3, 4, 5, 6, 7, 8, 9}};
    const std::vector<HeuristicKind> hs{{.tag = Heuristic::RA}, {.tag = Heuristic::PPR}};
    Rng rng(4);
    const auto got = heart_negatives_for_endpoint(g, nullptr, set, hs, 4, rng);
    ASSERT_EQ(got.size(), 4u);
    EXPECT_EQ(got[0], (Edge{0, 2}));
    std::set<NodeId> fill;
    for (std::size_t i = 1; i < got.size(); ++i) {
        EXPECT_GE(got[i].v, 3u);
        fill.insert(got[i].v);
    }
    EXPECT_EQ(fill.size(), 3u);
}

TEST(GenerateHeart, OddKAndEmptyHeuristics) {
    const Graph g = Graph::from_edges(4, std::vector<Edge>{{0, 1}, {1, 2}});
    EdgeSplit split;
    split.train.edges = {{0, 1}, {1, 2}};
    split.test.edges = {{2, 3}};
    HeartConfig cfg{.k = 3, .heuristics = default_heart_heuristics(false), .policy = {}};
    EXPECT_THROW(generate_heart(g, nullptr, split, Stage::Test, cfg), Error);
    cfg.k = 4;
    cfg.heuristics.clear();
    EXPECT_THROW(generate_heart(g, nullptr, split, Stage::Test, cfg), Error);
    cfg.heuristics = {{.tag = Heuristic::FeatureCosine}};
    EXPECT_THROW(generate_heart(g, nullptr, split, Stage::Test, cfg), Error);
}

namespace {
struct Fixture {
    NodeId n = 60;
    EdgeSplit split;
    Graph g;
    Fixture() {
        EdgeList list;
        list.edges = synthetic::barabasi_albert(n, 2, 11);
        split = make_split(list, {0.8, 0.1, 0.1}, 2);
        g = training_graph(split, false, n);
    }
};
}  // namespace

TEST(GenerateHeart, StructureAndDeterminism) {
    Fixture f;
    HeartConfig cfg{.k = 4, .heuristics = default_heart_heuristics(false), .policy = {}, .seed = 5};
    const auto a = generate_heart(f.g, nullptr, f.split, Stage::Test, cfg);
    cfg.workers = 8;
    const auto b = generate_heart(f.g, nullptr, f.split, Stage::Test, cfg);
    EXPECT_EQ(format_negative_set(a), format_negative_set(b));
    const FilterIndex idx(f.split, f.n);
    ASSERT_EQ(a.negatives.size(), f.split.test.size());
    for (std::size_t i = 0; i < a.positives.size(); ++i) {
        const Edge pos = a.positives[i];
        ASSERT_EQ(a.negatives[i].size(), 4u);
        std::set<std::uint64_t> keys;
        for (std::size_t j = 0; j < 4; ++j) {
            const Edge e = a.negatives[i][j];
            if (j < 2) EXPECT_EQ(e.u, pos.u);
            else EXPECT_EQ(e.v, pos.v);
            EXPECT_TRUE(idx.admits(e.u, e.v, pos, {}, Stage::Test));
            keys.insert(pair_key(e.u, e.v));
        }
        EXPECT_EQ(keys.size(), 4u);
    }
}

// Every selected non-random negative has a combined rank no worse than any
// unselected candidate of the same anchor.
TEST(GenerateHeart, RankDominance) {
    Fixture f;
    const auto hs = default_heart_heuristics(false);
    const FilterIndex idx(f.split, f.n);
    for (const auto& pos : f.split.test.edges) {
        for (auto side : {Side::Left, Side::Right}) {
            const auto set = corruption_candidates(idx, pos, side, {}, Stage::Test);
            std::vector<HeuristicRanking> rankings;
            for (const auto& h : hs) {
                const auto dense = heart_anchor_scores(f.g, nullptr, h, set.anchor);
                std::vector<double> s;
                for (NodeId v : set.candidates) s.push_back(dense[v]);
                rankings.push_back(rank_by_heuristic(set.candidates, s));
            }
            const auto combined = combine_ranks(rankings);
            Rng rng(0);
            const auto chosen = heart_negatives_for_endpoint(f.g, nullptr, set, hs, 5, rng);
            std::set<NodeId> picked;
            std::size_t worst = 0;
            for (const auto& e : chosen) {
                const NodeId v = side == Side::Left ? e.v : e.u;
                picked.insert(v);
                if (total_of(combined, v) != kUnranked) worst = std::max(worst, total_of(combined, v));
            }
            for (NodeId c : set.candidates)
                if (!picked.count(c)) {
                    EXPECT_GE(total_of(combined, c), worst);
                }
        }
    }
}

TEST(GenerateGlobalRandom, SizeDeterminismAndFilter) {
    Fixture f;
    const auto a = generate_global_random(f.split, Stage::Test, f.split.test.size(), {}, 3, f.n);
    const auto b = generate_global_random(f.split, Stage::Test, f.split.test.size(), {}, 3, f.n);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.shared.size(), f.split.test.size());
    EXPECT_TRUE(a.negatives.empty());
    const FilterIndex idx(f.split, f.n);
    const PairSet test(f.split.test.edges);
    for (const auto& e : a.shared) {
        EXPECT_NE(e.u, e.v);
        EXPECT_FALSE(idx.train.contains(e));
        EXPECT_FALSE(idx.valid.contains(e));
        EXPECT_FALSE(test.contains(e));
    }
    EXPECT_THROW(generate_global_random(f.split, Stage::Test, 0, {}, 3, f.n), Error);
}

TEST(GenerateGlobalRandom, SaturatesOnNearCompleteGraph) {
    // K_8 with every pair but (0, 1) in train, and (0, 1) the only test positive.
    EdgeSplit split;
    for (NodeId u = 0; u < 8; ++u)
        for (NodeId v = u + 1; v < 8; ++v) (u == 0 && v == 1 ? split.test : split.train).edges.push_back({u, v});
    try {
        generate_global_random(split, Stage::Test, 1, {}, 0, 8);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Saturation);
    }
    FilterPolicy dynamic;
    dynamic.dynamic_mode = true;
    EXPECT_EQ(generate_global_random(split, Stage::Test, 5, dynamic, 0, 8).shared.size(), 5u);
}

TEST(GeneratePerPositiveRandom, Contract) {
    Fixture f;
    const auto a = generate_per_positive_random(f.split, Stage::Test, 10, {}, 9, f.n, 1);
    const auto b = generate_per_positive_random(f.split, Stage::Test, 10, {}, 9, f.n, 4);
    EXPECT_EQ(a, b);
    const FilterIndex idx(f.split, f.n);
    for (std::size_t i = 0; i < a.positives.size(); ++i) {
        const Edge pos = a.positives[i];
        ASSERT_EQ(a.negatives[i].size(), 10u);
        std::set<std::uint64_t> keys;
        for (const auto& e : a.negatives[i]) {
            EXPECT_TRUE(e.u == pos.u || e.v == pos.v);
            EXPECT_TRUE(idx.admits(e.u, e.v, pos, {}, Stage::Test));
            keys.insert(pair_key(e.u, e.v));
        }
        EXPECT_EQ(keys.size(), 10u);
    }
}

TEST(Subsample, UniformWithoutReplacementKeepsOrder) {
    std::vector<Edge> pos;
    for (NodeId i = 0; i < 100; ++i) pos.push_back({i, i + 1});
    const auto s = subsample_positives(pos, 10, 3);
    ASSERT_EQ(s.size(), 10u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<Edge>(s.begin(), s.end()).size(), 10u);
    EXPECT_EQ(s, subsample_positives(pos, 10, 3));
    EXPECT_EQ(subsample_positives(pos, 500, 3).size(), 100u);
}

TEST(NegativeSetFile, RoundTripAllModes) {
    Fixture f;
    testutil::TempDir dir;
    const HeartConfig cfg{.k = 6, .heuristics = default_heart_heuristics(false), .policy = {}, .seed = 1};
    const std::vector<NegativeSet> sets{
        generate_heart(f.g, nullptr, f.split, Stage::Test, cfg),
        generate_global_random(f.split, Stage::Valid, 7, {}, 2, f.n),
        generate_per_positive_random(f.split, Stage::Test, 3, {}, 4, f.n),
    };
    for (const auto& set : sets) {
        save_negative_set(dir / "n.txt", set);
        const auto back = load_negative_set(dir / "n.txt");
        EXPECT_EQ(back, set);
        EXPECT_EQ(format_negative_set(back), testutil::slurp(dir / "n.txt"));
    }
    const auto text = format_negative_set(sets[1]);
    EXPECT_EQ(text.rfind("#global 7 2\n#shared\n", 0), 0u);
    EXPECT_THROW(load_negative_set(dir.file("bad.txt", "#heart 2 0\n0 1 | 0 2 0\n")), Error);
    EXPECT_THROW(load_negative_set(dir.file("hdr.txt", "0 1 | 0 2\n")), Error);
}
