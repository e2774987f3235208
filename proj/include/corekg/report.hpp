#pragma once

#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "corekg/csv.hpp"
#include "corekg/errors.hpp"
#include "corekg/graph.hpp"
#include "corekg/metrics.hpp"

namespace corekg {

inline constexpr std::array<std::string_view, 4> kConfigOrder = {"graphrag", "no_coref",
                                                                 "no_structprompt", "corekg"};

inline std::string config_display_name(std::string_view config_id) {
    if (config_id == "graphrag") return "GraphRAG";
    if (config_id == "no_coref") return "CoreKG-no-coref";
    if (config_id == "no_structprompt") return "CoreKG-no-str-prompt";
    if (config_id == "corekg") return "CORE-KG";
    return std::string(config_id);
}

/// Rounds a fraction to a 2-decimal percentage value.
inline double percent2(double fraction) { return std::round(fraction * 10000.0) / 100.0; }

struct AblationMetrics {
    // Per config, per case, in a fixed case order shared by all configs.
    std::map<std::string, std::vector<CaseMetrics>> per_config;
};

inline std::string metrics_csv_header() {
    return csv::make_row({"case", "config", "total_nodes", "duplicate_count", "duplication_rate",
                          "noisy_count", "noise_rate", "rn_ratio"});
}

inline std::string metrics_csv_row(const CaseMetrics& m) {
    return csv::make_row({m.case_id, m.config_id, std::to_string(m.total_nodes),
                          std::to_string(m.duplicate_count), format_percent(m.duplication_rate),
                          std::to_string(m.noisy_count), format_percent(m.noise_rate),
                          format2(m.rn_ratio)});
}

inline std::vector<CaseMetrics> parse_metrics_csv(const std::string& content) {
    std::vector<CaseMetrics> out;
    const auto rows = csv::parse(content);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.empty() || r[0] == "case") continue;
        if (r.size() < 8) throw IoError("metrics csv row has too few columns");
        CaseMetrics m = CaseMetrics::from_counts(
            r[0], r[1], std::stoul(r[2]), std::stoul(r[3]), std::stoul(r[5]), std::stod(r[7]));
        out.push_back(std::move(m));
    }
    return out;
}

/// Per-case duplication and noise table across the four configurations,
/// with a macro-averaged Avg row.
inline std::string render_duplication_noise_csv(const AblationMetrics& data) {
    std::vector<std::string> header = {"case"};
    for (const auto& metric : {std::string("dup"), std::string("noisy")}) {
        for (auto cfg : kConfigOrder) {
            header.push_back(std::string(cfg) + "_tot");
            header.push_back(std::string(cfg) + "_" + metric);
            header.push_back(std::string(cfg) + "_" + metric + "_rate");
        }
    }
    std::string out = csv::make_row(header);

    std::size_t case_count = 0;
    for (auto cfg : kConfigOrder) {
        auto it = data.per_config.find(std::string(cfg));
        if (it == data.per_config.end() || it->second.empty())
            throw ConfigError("missing metrics for config " + std::string(cfg));
        if (case_count == 0) case_count = it->second.size();
        if (it->second.size() != case_count)
            throw ConfigError("configs disagree on case count");
    }

    for (std::size_t i = 0; i < case_count; ++i) {
        std::vector<std::string> row = {data.per_config.at("graphrag")[i].case_id};
        for (auto cfg : kConfigOrder) {
            const CaseMetrics& m = data.per_config.at(std::string(cfg))[i];
            row.push_back(std::to_string(m.total_nodes));
            row.push_back(std::to_string(m.duplicate_count));
            row.push_back(format_percent(m.duplication_rate));
        }
        for (auto cfg : kConfigOrder) {
            const CaseMetrics& m = data.per_config.at(std::string(cfg))[i];
            row.push_back(std::to_string(m.total_nodes));
            row.push_back(std::to_string(m.noisy_count));
            row.push_back(format_percent(m.noise_rate));
        }
        out += csv::make_row(row);
    }

    std::vector<std::string> avg_row = {"Avg"};
    for (auto cfg : kConfigOrder) {
        const MacroAverages a = macro_average(data.per_config.at(std::string(cfg)));
        avg_row.push_back(format2(a.total_nodes));
        avg_row.push_back(format2(a.duplicate_count));
        avg_row.push_back(format_percent(a.duplication_rate));
    }
    for (auto cfg : kConfigOrder) {
        const MacroAverages a = macro_average(data.per_config.at(std::string(cfg)));
        avg_row.push_back(format2(a.total_nodes));
        avg_row.push_back(format2(a.noisy_count));
        avg_row.push_back(format_percent(a.noise_rate));
    }
    out += csv::make_row(avg_row);
    return out;
}

/// Average rates per method plus relative degradation against CORE-KG.
/// Per-case rates are rounded to 2-decimal percentages before averaging,
/// matching the presentation precision of the per-case tables.
inline std::string render_degradation_csv(const AblationMetrics& data) {
    std::map<std::string, double> dup_avg, noise_avg;
    for (auto cfg : kConfigOrder) {
        auto it = data.per_config.find(std::string(cfg));
        if (it == data.per_config.end() || it->second.empty())
            throw ConfigError("missing metrics for config " + std::string(cfg));
        double dup_sum = 0.0, noise_sum = 0.0;
        for (const auto& m : it->second) {
            dup_sum += percent2(m.duplication_rate);
            noise_sum += percent2(m.noise_rate);
        }
        dup_avg[std::string(cfg)] = dup_sum / static_cast<double>(it->second.size());
        noise_avg[std::string(cfg)] = noise_sum / static_cast<double>(it->second.size());
    }
    const double dup_base = dup_avg.at("corekg");
    const double noise_base = noise_avg.at("corekg");

    std::string out = csv::make_row(
        {"method", "duplication_avg", "duplication_degradation", "noise_avg",
         "noise_degradation"});
    // A zero base rate makes the ratio undefined; report n/a rather than
    // aborting the whole report.
    auto degradation_cell = [](double value, double base) -> std::string {
        if (base <= 0.0) return "n/a";
        return format2(relative_degradation(value, base) * 100.0);
    };
    for (auto cfg : kConfigOrder) {
        const std::string id(cfg);
        out += csv::make_row({config_display_name(id), format2(dup_avg.at(id)),
                              degradation_cell(dup_avg.at(id), dup_base),
                              format2(noise_avg.at(id)),
                              degradation_cell(noise_avg.at(id), noise_base)});
    }
    return out;
}

struct GraphStatsRow {
    std::string case_id;
    std::string config_id;
    GraphStats stats;
};

/// Per-(case, config) graph statistics table. Raw and endpoint-deduplicated
/// relationship counts are both reported.
inline std::string render_graph_stats_csv(const std::vector<GraphStatsRow>& rows) {
    std::string out = csv::make_row({"case", "config", "nodes", "relationships", "rn_ratio",
                                     "isolated_nodes", "dedup_relationships",
                                     "placeholder_nodes"});
    for (const auto& r : rows) {
        out += csv::make_row({r.case_id, config_display_name(r.config_id),
                              std::to_string(r.stats.node_count),
                              std::to_string(r.stats.relationship_count),
                              format2(r.stats.rn_ratio),
                              std::to_string(r.stats.isolated_node_count),
                              std::to_string(r.stats.dedup_relationship_count),
                              std::to_string(r.stats.placeholder_node_count)});
    }
    return out;
}

namespace detail {

inline std::string align_table(const std::vector<std::vector<std::string>>& rows) {
    if (rows.empty()) return "";
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], row[i].size());
    }
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += "  ";
            out += row[i];
            if (i + 1 < row.size()) out.append(widths[i] - row[i].size(), ' ');
        }
        out += '\n';
    }
    return out;
}

}  // namespace detail

/// Aligned plain-text twin of any CSV report.
inline std::string csv_to_aligned_text(const std::string& csv_content) {
    return detail::align_table(csv::parse(csv_content));
}

}  // namespace corekg
