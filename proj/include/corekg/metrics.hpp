#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "corekg/entity_type.hpp"
#include "corekg/errors.hpp"
#include "corekg/graph.hpp"
#include "corekg/text.hpp"

namespace corekg {

/// Normalized indel similarity in [0, 100]:
/// 100 * (1 - D(a,b) / (|a| + |b|)) with D the minimum insert+delete edit
/// distance. Case-insensitive after canonical name normalization.
inline double indel_ratio(std::string_view a, std::string_view b) {
    const std::string x = text::normalize_name(a);
    const std::string y = text::normalize_name(b);
    const std::size_t n = x.size(), m = y.size();
    if (n + m == 0) return 100.0;  // both empty, by convention
    // D = n + m - 2*LCS, so the score reduces to 200*LCS / (n + m).
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return 200.0 * static_cast<double>(prev[m]) / static_cast<double>(n + m);
}

namespace detail {

/// Max indel_ratio of needle x against every contiguous substring of y.
inline double partial_ratio_directed(const std::string& x, const std::string& y) {
    const std::size_t n = x.size(), m = y.size();
    if (n == 0) return 100.0;  // empty substring of the longer matches exactly
    double best = 0.0;
    // One LCS sweep per substring start; every end position yields a candidate.
    std::vector<std::size_t> prev(n + 1, 0), cur(n + 1, 0);
    for (std::size_t start = 0; start < m; ++start) {
        std::fill(prev.begin(), prev.end(), 0);
        for (std::size_t j = start + 1; j <= m; ++j) {
            cur[0] = 0;
            for (std::size_t i = 1; i <= n; ++i) {
                cur[i] = y[j - 1] == x[i - 1] ? prev[i - 1] + 1 : std::max(prev[i], cur[i - 1]);
            }
            std::swap(prev, cur);
            const std::size_t len = j - start;
            const double score =
                200.0 * static_cast<double>(prev[n]) / static_cast<double>(n + len);
            best = std::max(best, score);
            if (best == 100.0) return 100.0;
        }
    }
    return best;
}

}  // namespace detail

/// Maximum indel_ratio between the shorter string and any contiguous
/// substring of the longer. Exhaustive over all substrings. Equal-length
/// inputs are searched in both orientations so the score is symmetric.
inline double partial_ratio(std::string_view a, std::string_view b) {
    std::string x = text::normalize_name(a);
    std::string y = text::normalize_name(b);
    if (x.size() > y.size()) std::swap(x, y);
    if (x.size() == y.size())
        return std::max(detail::partial_ratio_directed(x, y),
                        detail::partial_ratio_directed(y, x));
    return detail::partial_ratio_directed(x, y);
}

struct DuplicateCluster {
    EntityType entity_type = EntityType::Untyped;
    std::vector<std::string> members;  // node ids, sorted
    std::string representative;
};

/// Line-oriented expert-review directives: merge, split, noisy, clean.
/// Node ids after the directive are separated by tabs or '|'.
struct Overrides {
    std::vector<std::vector<std::string>> merges;
    std::vector<std::string> splits;
    std::set<std::string> noisy;
    std::set<std::string> clean;

    static Overrides parse(const std::string& content) {
        Overrides o;
        for (const auto& raw : text::split_lines(content)) {
            std::string line = text::trim(raw);
            if (line.empty() || line[0] == '#') continue;
            const auto sp = line.find_first_of(" \t");
            const std::string directive = sp == std::string::npos ? line : line.substr(0, sp);
            const std::string rest = sp == std::string::npos ? "" : text::trim(line.substr(sp));
            std::vector<std::string> ids;
            std::string cur;
            for (char c : rest) {
                if (c == '\t' || c == '|') {
                    if (!text::trim(cur).empty()) ids.push_back(text::trim(cur));
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
            if (!text::trim(cur).empty()) ids.push_back(text::trim(cur));
            if (directive == "merge") {
                if (ids.size() < 2) throw OverrideError("merge directive needs >= 2 ids: " + line);
                o.merges.push_back(ids);
            } else if (directive == "split") {
                if (ids.size() != 1) throw OverrideError("split directive needs 1 id: " + line);
                o.splits.push_back(ids[0]);
            } else if (directive == "noisy") {
                if (ids.size() != 1) throw OverrideError("noisy directive needs 1 id: " + line);
                o.noisy.insert(ids[0]);
            } else if (directive == "clean") {
                if (ids.size() != 1) throw OverrideError("clean directive needs 1 id: " + line);
                o.clean.insert(ids[0]);
            } else {
                throw OverrideError("unknown override directive: " + directive);
            }
        }
        return o;
    }
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace detail

/// Intra-type duplicate clustering: connected components of the pairwise
/// similarity graph at the given threshold, refined by override directives.
inline std::vector<DuplicateCluster> cluster_duplicates(const KnowledgeGraph& g,
                                                        double threshold = 75.0,
                                                        const Overrides& overrides = {}) {
    if (threshold <= 0.0 || threshold > 100.0)
        throw ConfigError("similarity threshold must be in (0, 100]");
    std::vector<NodeKey> keys;
    keys.reserve(g.nodes.size());
    std::map<std::string, std::size_t> id_index;
    for (const auto& [key, node] : g.nodes) {
        id_index[key.id()] = keys.size();
        keys.push_back(key);
    }

    auto require_known = [&](const std::string& id) {
        auto it = id_index.find(id);
        if (it == id_index.end()) throw OverrideError("override references unknown node id: " + id);
        return it->second;
    };

    detail::UnionFind uf(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        for (std::size_t j = i + 1; j < keys.size(); ++j) {
            if (keys[i].entity_type != keys[j].entity_type) continue;
            if (partial_ratio(keys[i].normalized_name, keys[j].normalized_name) >= threshold)
                uf.unite(i, j);
        }
    }

    std::map<std::size_t, std::set<std::string>> components;
    for (std::size_t i = 0; i < keys.size(); ++i) components[uf.find(i)].insert(keys[i].id());

    // Expert-review emulation: forced merges, then removals.
    for (const auto& merge_ids : overrides.merges) {
        EntityType merge_type = keys[require_known(merge_ids[0])].entity_type;
        for (const auto& id : merge_ids) {
            if (keys[require_known(id)].entity_type != merge_type)
                throw OverrideError("merge directive crosses entity types at id: " + id);
        }
        for (std::size_t k = 1; k < merge_ids.size(); ++k)
            uf.unite(require_known(merge_ids[0]), require_known(merge_ids[k]));
    }
    components.clear();
    for (std::size_t i = 0; i < keys.size(); ++i) components[uf.find(i)].insert(keys[i].id());
    for (const auto& id : overrides.splits) {
        const std::size_t idx = require_known(id);
        components[uf.find(idx)].erase(id);
    }

    std::vector<DuplicateCluster> clusters;
    for (const auto& [root, members] : components) {
        if (members.size() < 2) continue;
        DuplicateCluster c;
        c.members.assign(members.begin(), members.end());
        c.entity_type = keys[id_index.at(c.members.front())].entity_type;
        // Representative: most mentions, then longest display name, then lexicographic.
        const EntityNode* best = nullptr;
        std::string best_id;
        for (const auto& id : c.members) {
            const EntityNode& node = g.nodes.at(keys[id_index.at(id)]);
            if (!best) {
                best = &node;
                best_id = id;
                continue;
            }
            if (node.mention_chunks.size() > best->mention_chunks.size() ||
                (node.mention_chunks.size() == best->mention_chunks.size() &&
                 (node.display_name.size() > best->display_name.size() ||
                  (node.display_name.size() == best->display_name.size() && id < best_id)))) {
                best = &node;
                best_id = id;
            }
        }
        c.representative = best_id;
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(),
              [](const DuplicateCluster& a, const DuplicateCluster& b) {
                  return a.members < b.members;
              });
    return clusters;
}

inline std::size_t duplicate_count(const std::vector<DuplicateCluster>& clusters) {
    std::size_t total = 0;
    for (const auto& c : clusters) total += c.members.size() - 1;
    return total;
}

struct NoiseResult {
    std::vector<std::string> noisy_ids;  // sorted
    std::size_t noisy_count = 0;
};

/// A node is noisy when its name contains a lexicon term as a whole word or
/// its id is in the override noisy list; the clean list exempts nodes.
inline NoiseResult score_noise(const KnowledgeGraph& g, const std::vector<std::string>& lexicon,
                               const Overrides& overrides = {}) {
    std::set<std::string> known;
    for (const auto& [key, node] : g.nodes) known.insert(key.id());
    for (const auto& id : overrides.noisy)
        if (!known.count(id)) throw OverrideError("override references unknown node id: " + id);
    for (const auto& id : overrides.clean)
        if (!known.count(id)) throw OverrideError("override references unknown node id: " + id);

    NoiseResult out;
    for (const auto& [key, node] : g.nodes) {
        const std::string id = key.id();
        if (overrides.clean.count(id)) continue;
        bool noisy = overrides.noisy.count(id) > 0;
        if (!noisy) {
            for (const auto& term : lexicon) {
                if (text::contains_whole_word(key.normalized_name, term)) {
                    noisy = true;
                    break;
                }
            }
        }
        if (noisy) out.noisy_ids.push_back(id);
    }
    out.noisy_count = out.noisy_ids.size();
    return out;
}

/// Default noise lexicon: legal boilerplate and government-agency terms.
/// Fully user-editable via a one-term-per-line file.
inline std::vector<std::string> default_noise_lexicon() {
    return {
        "court",   "appeal",     "appeals",     "appellate", "jury",
        "judge",   "judicial",   "proceeding",  "proceedings",
        "government", "prosecution", "prosecutor", "attorney general",
        "district attorney", "magistrate", "statute", "docket",
        "plaintiff", "appellant", "appellee", "indictment",
    };
}

inline std::vector<std::string> parse_lexicon(const std::string& content) {
    std::vector<std::string> terms;
    for (const auto& line : text::split_lines(content)) {
        const std::string t = text::trim(line);
        if (!t.empty() && t[0] != '#') terms.push_back(t);
    }
    return terms;
}

struct CaseMetrics {
    std::string case_id;
    std::string config_id;
    std::size_t total_nodes = 0;
    std::size_t duplicate_count = 0;
    double duplication_rate = 0.0;  // fraction in [0, 1]
    std::size_t noisy_count = 0;
    double noise_rate = 0.0;  // fraction in [0, 1]
    double rn_ratio = 0.0;

    /// Builds metrics directly from transcribed counts (reporting-only path).
    static CaseMetrics from_counts(std::string case_id, std::string config_id,
                                   std::size_t total, std::size_t duplicates, std::size_t noisy,
                                   double rn = 0.0) {
        if (total == 0) throw EmptyGraphError("case " + case_id + " has zero total nodes");
        CaseMetrics m;
        m.case_id = std::move(case_id);
        m.config_id = std::move(config_id);
        m.total_nodes = total;
        m.duplicate_count = duplicates;
        m.duplication_rate = static_cast<double>(duplicates) / static_cast<double>(total);
        m.noisy_count = noisy;
        m.noise_rate = static_cast<double>(noisy) / static_cast<double>(total);
        m.rn_ratio = rn;
        return m;
    }
};

inline CaseMetrics case_metrics(const KnowledgeGraph& g,
                                const std::vector<DuplicateCluster>& clusters,
                                std::size_t noisy_count) {
    if (g.nodes.empty()) throw EmptyGraphError("graph has no nodes");
    const GraphStats stats = graph_stats(g);
    CaseMetrics m = CaseMetrics::from_counts(g.case_id, g.config_id, stats.node_count,
                                             duplicate_count(clusters), noisy_count);
    m.rn_ratio = stats.rn_ratio;
    return m;
}

struct MacroAverages {
    double total_nodes = 0.0;
    double duplicate_count = 0.0;
    double duplication_rate = 0.0;
    double noisy_count = 0.0;
    double noise_rate = 0.0;
    double rn_ratio = 0.0;
};

/// Arithmetic mean of each column over cases (macro-average of rates).
inline MacroAverages macro_average(const std::vector<CaseMetrics>& per_case) {
    if (per_case.empty()) throw ConfigError("macro_average requires at least one case");
    MacroAverages avg;
    for (const auto& m : per_case) {
        avg.total_nodes += static_cast<double>(m.total_nodes);
        avg.duplicate_count += static_cast<double>(m.duplicate_count);
        avg.duplication_rate += m.duplication_rate;
        avg.noisy_count += static_cast<double>(m.noisy_count);
        avg.noise_rate += m.noise_rate;
        avg.rn_ratio += m.rn_ratio;
    }
    const double n = static_cast<double>(per_case.size());
    avg.total_nodes /= n;
    avg.duplicate_count /= n;
    avg.duplication_rate /= n;
    avg.noisy_count /= n;
    avg.noise_rate /= n;
    avg.rn_ratio /= n;
    return avg;
}

/// (value - base) / base, as a signed fraction.
inline double relative_degradation(double value, double base) {
    if (base <= 0.0) throw InvalidBaseError("relative_degradation requires base > 0");
    return (value - base) / base;
}

inline std::string format2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string format_percent(double fraction) { return format2(fraction * 100.0); }

}  // namespace corekg
