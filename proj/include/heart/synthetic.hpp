#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "heart/graph.hpp"
#include "heart/rng.hpp"

namespace heart::synthetic {

namespace detail {
inline double unit(Rng& rng) { return static_cast<double>(rng.next() >> 11) * 0x1.0p-53; }
}  // namespace detail

/// G(n, p): each unordered pair independently with probability p.
inline std::vector<Edge> erdos_renyi(NodeId n, double p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (detail::unit(rng) < p) edges.push_back({u, v});
    return edges;
}

/// Chung-Lu graph with power-law expected degrees (exponent gamma) scaled to
/// the requested mean; pair (u, v) appears with probability
/// min(1, w_u w_v / sum w). Heavy-tailed like citation graphs.
inline std::vector<Edge> chung_lu(NodeId n, double mean_degree, double gamma, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> w(n);
    double total = 0.0;
    for (NodeId i = 0; i < n; ++i) {
        w[i] = std::pow(static_cast<double>(i) + 1.0, -1.0 / (gamma - 1.0));
        total += w[i];
    }
    const double volume = mean_degree * static_cast<double>(n);
    for (auto& x : w) x *= volume / total;
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (detail::unit(rng) < std::min(1.0, w[u] * w[v] / volume)) edges.push_back({u, v});
    return edges;
}

/// Preferential attachment: each new node links to `m` distinct earlier
/// nodes chosen proportionally to degree. Starts from a clique on m + 1 nodes.
inline std::vector<Edge> barabasi_albert(NodeId n, NodeId m, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    std::vector<NodeId> endpoints;  // each node repeated deg times
    const NodeId core = std::min<NodeId>(n, m + 1);
    for (NodeId u = 0; u < core; ++u)
        for (NodeId v = u + 1; v < core; ++v) {
            edges.push_back({u, v});
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    std::vector<NodeId> picked;
    for (NodeId u = core; u < n; ++u) {
        picked.clear();
        while (picked.size() < m) {
            const NodeId t = endpoints[rng.below(endpoints.size())];
            if (std::find(picked.begin(), picked.end(), t) == picked.end()) picked.push_back(t);
        }
        for (NodeId t : picked) {
            edges.push_back({t, u});
            endpoints.push_back(t);
            endpoints.push_back(u);
        }
    }
    return edges;
}

}  // namespace heart::synthetic
