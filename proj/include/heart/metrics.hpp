#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "heart/error.hpp"
#include "heart/heuristics.hpp"
#include "heart/sampler.hpp"

namespace heart {

enum class TiePolicy { Mid, Optimistic, Pessimistic };

inline std::string_view name(TiePolicy t) {
    switch (t) {
        case TiePolicy::Mid: return "mid";
        case TiePolicy::Optimistic: return "optimistic";
        case TiePolicy::Pessimistic: return "pessimistic";
    }
    return "?";
}

inline TiePolicy parse_tie_policy(std::string_view s) {
    if (s == "mid") return TiePolicy::Mid;
    if (s == "optimistic") return TiePolicy::Optimistic;
    if (s == "pessimistic") return TiePolicy::Pessimistic;
    throw Error(ErrorKind::Config, "unknown tie policy '" + std::string(s) + "'");
}

namespace detail {
inline double rank_from_counts(std::size_t greater, std::size_t tied, TiePolicy tie) {
    const double optimistic = 1.0 + static_cast<double>(greater);
    const double pessimistic = optimistic + static_cast<double>(tied);
    switch (tie) {
        case TiePolicy::Optimistic: return optimistic;
        case TiePolicy::Pessimistic: return pessimistic;
        case TiePolicy::Mid: return 0.5 * (optimistic + pessimistic);
    }
    return optimistic;
}
}  // namespace detail

/// Rank of a positive among its negatives; higher scores rank first.
inline double rank_positive(double pos_score, std::span<const double> neg_scores, TiePolicy tie = TiePolicy::Mid) {
    if (neg_scores.empty()) {
        log::warn("positive ranked against an empty negative list");
        return 1.0;
    }
    std::size_t greater = 0, tied = 0;
    for (double s : neg_scores) {
        if (s > pos_score) ++greater;
        else if (s == pos_score) ++tied;
    }
    return detail::rank_from_counts(greater, tied, tie);
}

inline double mrr(std::span<const double> ranks) {
    if (ranks.empty()) throw Error(ErrorKind::Validation, "MRR of an empty rank list");
    double sum = 0.0;
    for (double r : ranks) sum += 1.0 / r;
    return sum / static_cast<double>(ranks.size());
}

inline double hits_at_k(std::span<const double> ranks, std::size_t k) {
    if (ranks.empty()) throw Error(ErrorKind::Validation, "Hits@K of an empty rank list");
    if (k < 1) throw Error(ErrorKind::Config, "Hits@K needs K >= 1");
    std::size_t hit = 0;
    for (double r : ranks)
        if (r <= static_cast<double>(k)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(ranks.size());
}

/// P(positive outscores negative), ties counted half. Sort-based.
inline double auc(std::span<const double> pos_scores, std::span<const double> neg_scores) {
    if (pos_scores.empty() || neg_scores.empty()) throw Error(ErrorKind::Validation, "AUC needs positives and negatives");
    std::vector<double> neg(neg_scores.begin(), neg_scores.end());
    std::sort(neg.begin(), neg.end());
    std::size_t below = 0, tied = 0;  // may exceed 2^32 at OGB scale
    for (double p : pos_scores) {
        const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
        const auto hi = std::upper_bound(lo, neg.end(), p);
        below += static_cast<std::size_t>(lo - neg.begin());
        tied += static_cast<std::size_t>(hi - lo);
    }
    const double total = static_cast<double>(pos_scores.size()) * static_cast<double>(neg.size());
    return (static_cast<double>(below) + 0.5 * static_cast<double>(tied)) / total;
}

// ---------------------------------------------------------------------------

struct MetricValues {
    double mrr = 0.0;
    std::map<std::size_t, double> hits;
    double auc = 0.0;

    friend bool operator==(const MetricValues&, const MetricValues&) = default;
};

struct MetricReport {
    MetricValues mean;
    MetricValues std;  // sample standard deviation across seeds
    std::vector<MetricValues> per_seed;
    TiePolicy tie = TiePolicy::Mid;
    // AUC pooled every positive against every negative although each positive
    // was ranked against its own list; not comparable to a global-mode AUC.
    bool auc_pooled = false;
};

// Pair -> score lookup; an unordered fallback lets symmetric score files
// list a pair in either orientation.
class ScoreLookup {
public:
    ScoreLookup() = default;
    explicit ScoreLookup(const ScoreTable& table) {
        exact_.reserve(table.size());
        for (std::size_t i = 0; i < table.size(); ++i) {
            const auto& p = table.pairs[i];
            exact_[(std::uint64_t{p.u} << 32) | p.v] = table.scores[i];
        }
    }

    std::optional<double> find(Edge e) const {
        if (auto it = exact_.find((std::uint64_t{e.u} << 32) | e.v); it != exact_.end()) return it->second;
        if (auto it = exact_.find((std::uint64_t{e.v} << 32) | e.u); it != exact_.end()) return it->second;
        return std::nullopt;
    }

    double at(Edge e) const {
        if (auto s = find(e)) return *s;
        throw Error(ErrorKind::Coverage, "no score for pair (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ")");
    }

private:
    std::unordered_map<std::uint64_t, double> exact_;
};

/// Ranks each positive against its negatives (the shared list in global
/// mode) and reports MRR, Hits@K and AUC for one run.
inline MetricReport evaluate(const NegativeSet& negatives, const ScoreLookup& pos_scores, const ScoreLookup& neg_scores,
                             std::span<const std::size_t> ks, TiePolicy tie = TiePolicy::Mid) {
    if (negatives.positives.empty()) throw Error(ErrorKind::Validation, "no positives to evaluate");
    std::vector<double> pos(negatives.positives.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = pos_scores.at(negatives.positives[i]);

    std::vector<double> ranks(pos.size());
    std::vector<double> pooled;
    if (negatives.mode == NegativeMode::Global) {
        pooled.reserve(negatives.shared.size());
        for (const auto& e : negatives.shared) pooled.push_back(neg_scores.at(e));
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < pos.size(); ++i) {
            if (sorted.empty()) {
                ranks[i] = rank_positive(pos[i], {}, tie);
                continue;
            }
            const auto lo = std::lower_bound(sorted.begin(), sorted.end(), pos[i]);
            const auto hi = std::upper_bound(lo, sorted.end(), pos[i]);
            ranks[i] = detail::rank_from_counts(static_cast<std::size_t>(sorted.end() - hi),
                                                static_cast<std::size_t>(hi - lo), tie);
        }
    } else {
        std::vector<double> own;
        for (std::size_t i = 0; i < pos.size(); ++i) {
            own.clear();
            for (const auto& e : negatives.negatives[i]) own.push_back(neg_scores.at(e));
            ranks[i] = rank_positive(pos[i], own, tie);
            pooled.insert(pooled.end(), own.begin(), own.end());
        }
    }

    MetricValues v;
    v.mrr = mrr(ranks);
    for (std::size_t k : ks) v.hits[k] = hits_at_k(ranks, k);
    v.auc = pooled.empty() ? 0.5 : auc(pos, pooled);

    MetricReport report;
    report.mean = v;
    report.std.hits = v.hits;
    for (auto& [k, x] : report.std.hits) x = 0.0;
    report.per_seed = {v};
    report.tie = tie;
    report.auc_pooled = negatives.mode != NegativeMode::Global;
    return report;
}

inline MetricReport evaluate(const NegativeSet& negatives, const ScoreTable& pos_scores, const ScoreTable& neg_scores,
                             std::span<const std::size_t> ks, TiePolicy tie = TiePolicy::Mid) {
    return evaluate(negatives, ScoreLookup(pos_scores), ScoreLookup(neg_scores), ks, tie);
}

/// Mean and sample standard deviation (n - 1; zero for one run) of the
/// per-seed values of several single-run reports.
inline MetricReport aggregate_seeds(std::span<const MetricReport> reports) {
    if (reports.empty()) throw Error(ErrorKind::Validation, "no reports to aggregate");
    MetricReport out;
    out.tie = reports.front().tie;
    for (const auto& r : reports) {
        if (r.tie != out.tie) throw Error(ErrorKind::Config, "reports use different tie policies");
        out.auc_pooled = out.auc_pooled || r.auc_pooled;
        for (const auto& v : r.per_seed) {
            if (!out.per_seed.empty()) {
                const auto& ref = out.per_seed.front().hits;
                if (ref.size() != v.hits.size() ||
                    !std::equal(ref.begin(), ref.end(), v.hits.begin(), [](auto& a, auto& b) { return a.first == b.first; }))
                    throw Error(ErrorKind::Config, "reports disagree on the Hits@K list");
            }
            out.per_seed.push_back(v);
        }
    }
    const double n = static_cast<double>(out.per_seed.size());
    // Shifted by the first value so identical runs give exactly their value
    // and zero spread.
    auto mean_std = [&](auto&& get, double& mean, double& sd) {
        const double shift = get(out.per_seed.front());
        double sum = 0.0, sq = 0.0;
        for (const auto& v : out.per_seed) {
            const double d = get(v) - shift;
            sum += d;
            sq += d * d;
        }
        mean = shift + sum / n;
        const double var = out.per_seed.size() > 1 ? (sq - sum * sum / n) / (n - 1.0) : 0.0;
        sd = std::sqrt(std::max(var, 0.0));
    };
    mean_std([](const MetricValues& v) { return v.mrr; }, out.mean.mrr, out.std.mrr);
    mean_std([](const MetricValues& v) { return v.auc; }, out.mean.auc, out.std.auc);
    for (const auto& [k, unused] : out.per_seed.front().hits) {
        (void)unused;
        mean_std([k = k](const MetricValues& v) { return v.hits.at(k); }, out.mean.hits[k], out.std.hits[k]);
    }
    return out;
}

/// Key/value text, one field per line in a fixed order.
inline std::string format_report(const MetricReport& r) {
    std::ostringstream out;
    out << "tie_policy=" << name(r.tie) << '\n';
    out << "seeds=" << r.per_seed.size() << '\n';
    out << "auc_pooled=" << (r.auc_pooled ? "true" : "false") << '\n';
    out << "mrr=" << format_score(r.mean.mrr) << '\n';
    for (const auto& [k, x] : r.mean.hits) out << "hits@" << k << '=' << format_score(x) << '\n';
    out << "auc=" << format_score(r.mean.auc) << '\n';
    out << "std.mrr=" << format_score(r.std.mrr) << '\n';
    for (const auto& [k, x] : r.std.hits) out << "std.hits@" << k << '=' << format_score(x) << '\n';
    out << "std.auc=" << format_score(r.std.auc) << '\n';
    auto series = [&](const std::string& key, auto&& get) {
        out << "per_seed." << key << '=';
        for (std::size_t i = 0; i < r.per_seed.size(); ++i) out << (i ? "," : "") << format_score(get(r.per_seed[i]));
        out << '\n';
    };
    series("mrr", [](const MetricValues& v) { return v.mrr; });
    for (const auto& [k, unused] : r.mean.hits) {
        (void)unused;
        series("hits@" + std::to_string(k), [k = k](const MetricValues& v) { return v.hits.at(k); });
    }
    series("auc", [](const MetricValues& v) { return v.auc; });
    return out.str();
}

inline void save_report(const std::filesystem::path& path, const MetricReport& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Validation, "cannot write " + path.string());
    out << format_report(r);
}

}  // namespace heart
