#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "heart/graph.hpp"
#include "heart/heuristics.hpp"
#include "heart/sampler.hpp"

namespace heart {

// Common-neighbor distribution of positive vs negative evaluation pairs.
struct CnHistogram {
    std::vector<std::size_t> bin_lo;  // inclusive lower bound of each bin
    std::vector<double> positive_fraction;
    std::vector<double> negative_fraction;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

inline std::vector<std::size_t> common_neighbor_counts(const Graph& g, std::span<const Edge> pairs) {
    std::vector<std::size_t> out;
    out.reserve(pairs.size());
    for (const auto& e : pairs) out.push_back(static_cast<std::size_t>(cn(g, e.u, e.v)));
    return out;
}

inline double zero_cn_fraction(const Graph& g, std::span<const Edge> pairs) {
    if (pairs.empty()) return 0.0;
    const auto counts = common_neighbor_counts(g, pairs);
    return static_cast<double>(std::count(counts.begin(), counts.end(), std::size_t{0})) /
           static_cast<double>(counts.size());
}

inline std::vector<Edge> all_negatives(const NegativeSet& set) {
    if (set.mode == NegativeMode::Global) return set.shared;
    std::vector<Edge> out;
    for (const auto& list : set.negatives) out.insert(out.end(), list.begin(), list.end());
    return out;
}

/// Bins are single counts, or 0, 1, 2-3, 4-7, ... with log_bins.
inline CnHistogram cn_distribution(const Graph& g, const NegativeSet& set, bool log_bins = false) {
    const auto pos = common_neighbor_counts(g, set.positives);
    const auto neg = common_neighbor_counts(g, all_negatives(set));
    std::size_t max_cn = 0;
    for (auto c : pos) max_cn = std::max(max_cn, c);
    for (auto c : neg) max_cn = std::max(max_cn, c);

    CnHistogram h;
    h.positives = pos.size();
    h.negatives = neg.size();
    if (log_bins) {
        h.bin_lo.push_back(0);
        for (std::size_t lo = 1; lo <= max_cn; lo *= 2) h.bin_lo.push_back(lo);
    } else {
        for (std::size_t c = 0; c <= max_cn; ++c) h.bin_lo.push_back(c);
    }
    auto bin_of = [&](std::size_t c) {
        return static_cast<std::size_t>(std::upper_bound(h.bin_lo.begin(), h.bin_lo.end(), c) - h.bin_lo.begin()) - 1;
    };
    h.positive_fraction.assign(h.bin_lo.size(), 0.0);
    h.negative_fraction.assign(h.bin_lo.size(), 0.0);
    for (auto c : pos) h.positive_fraction[bin_of(c)] += 1.0;
    for (auto c : neg) h.negative_fraction[bin_of(c)] += 1.0;
    for (auto& x : h.positive_fraction) x = pos.empty() ? 0.0 : x / static_cast<double>(pos.size());
    for (auto& x : h.negative_fraction) x = neg.empty() ? 0.0 : x / static_cast<double>(neg.size());
    return h;
}

inline std::string format_cn_histogram(const CnHistogram& h) {
    std::ostringstream out;
    out << "cn_count,positive_fraction,negative_fraction\n";
    for (std::size_t i = 0; i < h.bin_lo.size(); ++i)
        out << h.bin_lo[i] << ',' << format_score(h.positive_fraction[i]) << ',' << format_score(h.negative_fraction[i])
            << '\n';
    return out.str();
}

}  // namespace heart
