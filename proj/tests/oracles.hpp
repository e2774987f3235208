// Test-only reference implementations, kept independent of the production
// code paths they check.
#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "corekg/text.hpp"

namespace oracles {

/// Full-table edit distance with unit insert/delete cost and substitution
/// cost 2 (equivalently forbidden).
inline std::size_t indel_distance(const std::string& a, const std::string& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::vector<std::size_t>> dp(n + 1, std::vector<std::size_t>(m + 1, 0));
    for (std::size_t i = 0; i <= n; ++i) dp[i][0] = i;
    for (std::size_t j = 0; j <= m; ++j) dp[0][j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            dp[i][j] = std::min({dp[i - 1][j] + 1, dp[i][j - 1] + 1,
                                 dp[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 2)});
        }
    }
    return dp[n][m];
}

inline double indel_ratio(const std::string& a, const std::string& b) {
    const std::string x = corekg::text::normalize_name(a);
    const std::string y = corekg::text::normalize_name(b);
    if (x.empty() && y.empty()) return 100.0;
    const double d = static_cast<double>(indel_distance(x, y));
    return 100.0 * (1.0 - d / static_cast<double>(x.size() + y.size()));
}

inline double partial_ratio_directed(const std::string& x, const std::string& y) {
    if (x.empty()) return 100.0;
    double best = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t j = i + 1; j <= y.size(); ++j) {
            const std::string w = y.substr(i, j - i);
            const double d = static_cast<double>(indel_distance(x, w));
            best = std::max(best, 100.0 * (1.0 - d / static_cast<double>(x.size() + w.size())));
        }
    }
    return best;
}

/// Exhaustive partial ratio: max indel_ratio of the shorter string against
/// every contiguous substring of the longer, the empty substring included.
/// Equal-length inputs are searched in both orientations for symmetry.
inline double partial_ratio(const std::string& a, const std::string& b) {
    std::string x = corekg::text::normalize_name(a);
    std::string y = corekg::text::normalize_name(b);
    if (x.size() > y.size()) std::swap(x, y);
    if (x.size() == y.size())
        return std::max(partial_ratio_directed(x, y), partial_ratio_directed(y, x));
    return partial_ratio_directed(x, y);
}

/// BFS connected components over an explicit adjacency relation.
/// Returns component member-index lists of size >= 2.
inline std::vector<std::vector<std::size_t>> connected_components(
    std::size_t n, const std::vector<std::vector<bool>>& adjacent) {
    std::vector<bool> visited(n, false);
    std::vector<std::vector<std::size_t>> components;
    for (std::size_t s = 0; s < n; ++s) {
        if (visited[s]) continue;
        std::vector<std::size_t> comp;
        std::deque<std::size_t> queue{s};
        visited[s] = true;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            comp.push_back(u);
            for (std::size_t v = 0; v < n; ++v) {
                if (!visited[v] && adjacent[u][v]) {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if (comp.size() >= 2) {
            std::sort(comp.begin(), comp.end());
            components.push_back(std::move(comp));
        }
    }
    return components;
}

}  // namespace oracles
