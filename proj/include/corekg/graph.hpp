#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corekg/csv.hpp"
#include "corekg/entity_type.hpp"
#include "corekg/errors.hpp"
#include "corekg/extraction.hpp"
#include "corekg/ingest.hpp"
#include "corekg/text.hpp"

namespace corekg {

struct NodeKey {
    std::string normalized_name;
    EntityType entity_type = EntityType::Untyped;

    auto operator<=>(const NodeKey&) const = default;

    std::string id() const {
        return normalized_name + "::" + std::string(type_name(entity_type));
    }
};

struct EntityNode {
    std::string normalized_name;
    std::string display_name;
    EntityType entity_type = EntityType::Untyped;
    std::vector<std::string> merged_descriptions;
    std::vector<int> mention_chunks;
    int degree = 0;

    NodeKey key() const { return {normalized_name, entity_type}; }
    bool is_placeholder() const { return entity_type == EntityType::Untyped; }
};

struct RelationshipEdge {
    NodeKey source;
    NodeKey target;
    std::string description;
    std::optional<double> strength;
    int chunk_id = -1;
};

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t relationship_count = 0;
    double rn_ratio = 0.0;
    std::size_t isolated_node_count = 0;
    std::size_t dedup_relationship_count = 0;  // unique unordered endpoint pairs
    std::size_t placeholder_node_count = 0;
};

struct KnowledgeGraph {
    std::string case_id;
    std::string config_id;
    std::map<NodeKey, EntityNode> nodes;
    std::vector<RelationshipEdge> edges;
    std::size_t chunk_count = 0;
    std::size_t dropped_self_loops = 0;
    std::size_t dropped_empty_names = 0;
    std::size_t placeholder_nodes_created = 0;
};

/// Merges raw records into one graph: nodes keyed by (normalized name, type),
/// descriptions and chunk provenance ordered by (chunk_id, text), edges
/// resolved to merged nodes with UNTYPED placeholders for unknown endpoints.
inline KnowledgeGraph build_graph(const std::vector<RawEntityRecord>& entities,
                                  const std::vector<RawRelationshipRecord>& relationships,
                                  const std::string& case_id, const std::string& config_id) {
    KnowledgeGraph g;
    g.case_id = case_id;
    g.config_id = config_id;

    struct Mention {
        int chunk_id;
        std::string description;
        std::string display_name;
    };
    std::map<NodeKey, std::vector<Mention>> mentions;
    for (const auto& e : entities) {
        if (e.normalized_name.empty()) {
            ++g.dropped_empty_names;
            continue;
        }
        mentions[{e.normalized_name, e.entity_type}].push_back(
            {e.chunk_id, e.description, e.name});
    }
    for (auto& [key, ms] : mentions) {
        std::sort(ms.begin(), ms.end(), [](const Mention& a, const Mention& b) {
            if (a.chunk_id != b.chunk_id) return a.chunk_id < b.chunk_id;
            if (a.description != b.description) return a.description < b.description;
            return a.display_name < b.display_name;
        });
        EntityNode node;
        node.normalized_name = key.normalized_name;
        node.entity_type = key.entity_type;
        node.display_name = ms.front().display_name;
        for (const auto& m : ms) {
            if (!m.description.empty() &&
                (node.merged_descriptions.empty() || node.merged_descriptions.back() != m.description))
                node.merged_descriptions.push_back(m.description);
            if (node.mention_chunks.empty() || node.mention_chunks.back() != m.chunk_id)
                node.mention_chunks.push_back(m.chunk_id);
        }
        g.nodes[key] = std::move(node);
    }

    // Name -> keys index for endpoint resolution across types.
    std::map<std::string, std::vector<NodeKey>> by_name;
    for (const auto& [key, node] : g.nodes) by_name[key.normalized_name].push_back(key);

    auto resolve_endpoint = [&](const std::string& normalized,
                                const std::string& display) -> NodeKey {
        auto it = by_name.find(normalized);
        if (it != by_name.end()) {
            // Prefer the node with the most mentions; ties break on type order.
            const NodeKey* best = nullptr;
            std::size_t best_mentions = 0;
            for (const auto& key : it->second) {
                const std::size_t m = g.nodes.at(key).mention_chunks.size();
                if (!best || m > best_mentions) {
                    best = &key;
                    best_mentions = m;
                }
            }
            return *best;
        }
        NodeKey key{normalized, EntityType::Untyped};
        EntityNode placeholder;
        placeholder.normalized_name = normalized;
        placeholder.display_name = display;
        placeholder.entity_type = EntityType::Untyped;
        g.nodes[key] = std::move(placeholder);
        by_name[normalized].push_back(key);
        ++g.placeholder_nodes_created;
        return key;
    };

    for (const auto& r : relationships) {
        if (r.normalized_source.empty() || r.normalized_target.empty()) {
            ++g.dropped_empty_names;
            continue;
        }
        const NodeKey s = resolve_endpoint(r.normalized_source, r.source_name);
        const NodeKey t = resolve_endpoint(r.normalized_target, r.target_name);
        if (s == t) {
            ++g.dropped_self_loops;
            continue;
        }
        RelationshipEdge edge;
        edge.source = s;
        edge.target = t;
        edge.description = r.description;
        edge.strength = r.strength;
        edge.chunk_id = r.chunk_id;
        g.edges.push_back(std::move(edge));
    }

    std::sort(g.edges.begin(), g.edges.end(), [](const RelationshipEdge& a,
                                                 const RelationshipEdge& b) {
        if (a.source != b.source) return a.source < b.source;
        if (a.target != b.target) return a.target < b.target;
        if (a.chunk_id != b.chunk_id) return a.chunk_id < b.chunk_id;
        if (a.description != b.description) return a.description < b.description;
        return a.strength.value_or(0.0) < b.strength.value_or(0.0);
    });

    for (const auto& e : g.edges) {
        g.nodes.at(e.source).degree += 1;
        g.nodes.at(e.target).degree += 1;
    }
    return g;
}

inline GraphStats graph_stats(const KnowledgeGraph& g) {
    if (g.nodes.empty()) throw EmptyGraphError("graph has no nodes");
    GraphStats s;
    s.node_count = g.nodes.size();
    s.relationship_count = g.edges.size();
    s.rn_ratio = static_cast<double>(s.relationship_count) / static_cast<double>(s.node_count);
    for (const auto& [key, node] : g.nodes) {
        if (node.degree == 0) ++s.isolated_node_count;
        if (node.is_placeholder()) ++s.placeholder_node_count;
    }
    std::set<std::pair<NodeKey, NodeKey>> pairs;
    for (const auto& e : g.edges) {
        auto p = std::minmax(e.source, e.target);
        pairs.emplace(p.first, p.second);
    }
    s.dedup_relationship_count = pairs.size();
    return s;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

inline std::string xml_unescape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        auto match = [&](std::string_view ent, char repl) {
            if (s.substr(i, ent.size()) == ent) {
                out.push_back(repl);
                i += ent.size() - 1;
                return true;
            }
            return false;
        };
        if (match("&amp;", '&') || match("&lt;", '<') || match("&gt;", '>') ||
            match("&quot;", '"') || match("&apos;", '\''))
            continue;
        out.push_back(s[i]);
    }
    return out;
}

inline std::string format_strength(std::optional<double> v) {
    if (!v) return "";
    std::ostringstream ss;
    ss << *v;
    return ss.str();
}

inline std::string join_ints(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(xs[i]);
    }
    return out;
}

inline std::string join_descriptions(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += " | ";
        out += xs[i];
    }
    return out;
}

}  // namespace detail

/// Deterministic GraphML rendering: nodes and edges sorted by id, attribute
/// keys fixed. Export -> import -> export is byte-identical.
inline std::string render_graphml(const KnowledgeGraph& g) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
    out << "  <key id=\"d0\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n";
    out << "  <key id=\"d1\" for=\"node\" attr.name=\"type\" attr.type=\"string\"/>\n";
    out << "  <key id=\"d2\" for=\"node\" attr.name=\"description\" attr.type=\"string\"/>\n";
    out << "  <key id=\"d3\" for=\"node\" attr.name=\"degree\" attr.type=\"long\"/>\n";
    out << "  <key id=\"d4\" for=\"node\" attr.name=\"mention_chunks\" attr.type=\"string\"/>\n";
    out << "  <key id=\"d5\" for=\"edge\" attr.name=\"description\" attr.type=\"string\"/>\n";
    out << "  <key id=\"d6\" for=\"edge\" attr.name=\"strength\" attr.type=\"string\"/>\n";
    out << "  <key id=\"d7\" for=\"edge\" attr.name=\"chunk_id\" attr.type=\"long\"/>\n";
    out << "  <graph id=\"" << detail::xml_escape(g.case_id) << "::"
        << detail::xml_escape(g.config_id) << "\" edgedefault=\"directed\">\n";
    for (const auto& [key, node] : g.nodes) {
        out << "    <node id=\"" << detail::xml_escape(key.id()) << "\">\n";
        out << "      <data key=\"d0\">" << detail::xml_escape(node.display_name) << "</data>\n";
        out << "      <data key=\"d1\">" << detail::xml_escape(type_name(node.entity_type))
            << "</data>\n";
        out << "      <data key=\"d2\">"
            << detail::xml_escape(detail::join_descriptions(node.merged_descriptions))
            << "</data>\n";
        out << "      <data key=\"d3\">" << node.degree << "</data>\n";
        out << "      <data key=\"d4\">" << detail::join_ints(node.mention_chunks)
            << "</data>\n";
        out << "    </node>\n";
    }
    for (const auto& e : g.edges) {
        out << "    <edge source=\"" << detail::xml_escape(e.source.id()) << "\" target=\""
            << detail::xml_escape(e.target.id()) << "\">\n";
        out << "      <data key=\"d5\">" << detail::xml_escape(e.description) << "</data>\n";
        out << "      <data key=\"d6\">" << detail::xml_escape(detail::format_strength(e.strength))
            << "</data>\n";
        out << "      <data key=\"d7\">" << e.chunk_id << "</data>\n";
        out << "    </edge>\n";
    }
    out << "  </graph>\n";
    out << "</graphml>\n";
    return out.str();
}

inline void export_graphml(const KnowledgeGraph& g, const std::filesystem::path& path) {
    write_text_file(path, render_graphml(g));
}

/// Parses GraphML in the shape this module emits.
inline KnowledgeGraph parse_graphml(const std::string& content) {
    KnowledgeGraph g;
    auto attr_value = [&](const std::string& tag, const std::string& attr) -> std::string {
        const std::string pattern = attr + "=\"";
        const auto pos = tag.find(pattern);
        if (pos == std::string::npos) return "";
        const auto start = pos + pattern.size();
        const auto end = tag.find('"', start);
        return detail::xml_unescape(tag.substr(start, end - start));
    };
    auto parse_key = [](const std::string& id) -> NodeKey {
        const auto sep = id.rfind("::");
        NodeKey key;
        key.normalized_name = id.substr(0, sep);
        if (sep != std::string::npos) {
            auto t = parse_entity_type(id.substr(sep + 2));
            key.entity_type = t.value_or(EntityType::Untyped);
        }
        return key;
    };

    std::size_t pos = 0;
    {
        const auto gpos = content.find("<graph ");
        if (gpos == std::string::npos) throw IoError("not a GraphML document");
        const auto gend = content.find('>', gpos);
        const std::string tag = content.substr(gpos, gend - gpos + 1);
        const std::string gid = attr_value(tag, "id");
        const auto sep = gid.rfind("::");
        if (sep != std::string::npos) {
            g.case_id = gid.substr(0, sep);
            g.config_id = gid.substr(sep + 2);
        } else {
            g.case_id = gid;
        }
        pos = gend + 1;
    }

    auto data_fields = [&](const std::string& element) {
        std::map<std::string, std::string> fields;
        std::size_t p = 0;
        while ((p = element.find("<data key=\"", p)) != std::string::npos) {
            const auto key_start = p + 11;
            const auto key_end = element.find('"', key_start);
            const std::string key = element.substr(key_start, key_end - key_start);
            const auto body_start = element.find('>', key_end) + 1;
            const auto body_end = element.find("</data>", body_start);
            fields[key] = detail::xml_unescape(element.substr(body_start, body_end - body_start));
            p = body_end;
        }
        return fields;
    };

    while (true) {
        const auto npos = content.find("<node ", pos);
        const auto epos = content.find("<edge ", pos);
        if (npos == std::string::npos && epos == std::string::npos) break;
        if (npos != std::string::npos && (epos == std::string::npos || npos < epos)) {
            const auto close = content.find("</node>", npos);
            const std::string element = content.substr(npos, close - npos);
            const auto tag_end = content.find('>', npos);
            const std::string tag = content.substr(npos, tag_end - npos + 1);
            EntityNode node;
            NodeKey key = parse_key(attr_value(tag, "id"));
            node.normalized_name = key.normalized_name;
            node.entity_type = key.entity_type;
            const auto fields = data_fields(element);
            if (fields.count("d0")) node.display_name = fields.at("d0");
            if (fields.count("d2") && !fields.at("d2").empty()) {
                std::string descs = fields.at("d2");
                std::size_t start = 0, p2;
                while ((p2 = descs.find(" | ", start)) != std::string::npos) {
                    node.merged_descriptions.push_back(descs.substr(start, p2 - start));
                    start = p2 + 3;
                }
                node.merged_descriptions.push_back(descs.substr(start));
            }
            if (fields.count("d3")) node.degree = std::stoi(fields.at("d3"));
            if (fields.count("d4") && !fields.at("d4").empty()) {
                std::istringstream ss(fields.at("d4"));
                std::string item;
                while (std::getline(ss, item, ',')) node.mention_chunks.push_back(std::stoi(item));
            }
            g.nodes[key] = std::move(node);
            pos = close + 7;
        } else {
            const auto close = content.find("</edge>", epos);
            const std::string element = content.substr(epos, close - epos);
            const auto tag_end = content.find('>', epos);
            const std::string tag = content.substr(epos, tag_end - epos + 1);
            RelationshipEdge edge;
            edge.source = parse_key(attr_value(tag, "source"));
            edge.target = parse_key(attr_value(tag, "target"));
            const auto fields = data_fields(element);
            if (fields.count("d5")) edge.description = fields.at("d5");
            if (fields.count("d6") && !fields.at("d6").empty())
                edge.strength = std::stod(fields.at("d6"));
            if (fields.count("d7")) edge.chunk_id = std::stoi(fields.at("d7"));
            g.edges.push_back(std::move(edge));
            pos = close + 7;
        }
    }
    return g;
}

inline KnowledgeGraph import_graphml(const std::filesystem::path& path) {
    return parse_graphml(read_text_file(path));
}

/// Writes nodes.csv and edges.csv twins of the graph.
inline void export_tabular(const KnowledgeGraph& g, const std::filesystem::path& nodes_path,
                           const std::filesystem::path& edges_path) {
    std::string nodes_out =
        csv::make_row({"id", "label", "type", "degree", "mention_count"});
    for (const auto& [key, node] : g.nodes) {
        nodes_out += csv::make_row({key.id(), node.display_name,
                                    std::string(type_name(node.entity_type)),
                                    std::to_string(node.degree),
                                    std::to_string(node.mention_chunks.size())});
    }
    write_text_file(nodes_path, nodes_out);

    std::string edges_out =
        csv::make_row({"source", "target", "description", "strength", "chunk_id"});
    for (const auto& e : g.edges) {
        edges_out += csv::make_row({e.source.id(), e.target.id(), e.description,
                                    detail::format_strength(e.strength),
                                    std::to_string(e.chunk_id)});
    }
    write_text_file(edges_path, edges_out);
}

}  // namespace corekg
