#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "corekg/coref.hpp"
#include "corekg/entity_type.hpp"
#include "corekg/errors.hpp"
#include "corekg/gateway.hpp"
#include "corekg/ingest.hpp"
#include "corekg/text.hpp"

namespace corekg {

struct Delimiters {
    std::string field_sep = "<|>";
    std::string record_sep = "##";
    std::string completion_marker = "<|COMPLETE|>";

    void validate() const {
        if (field_sep.empty() || record_sep.empty() || completion_marker.empty())
            throw ConfigError("delimiters must be non-empty");
        if (field_sep == record_sep || field_sep == completion_marker ||
            record_sep == completion_marker)
            throw ConfigError("delimiters must be pairwise distinct");
    }
};

struct RawEntityRecord {
    std::string name;             // display casing as extracted
    std::string normalized_name;  // canonical comparison form
    EntityType entity_type = EntityType::Untyped;
    std::string description;
    int chunk_id = -1;
};

struct RawRelationshipRecord {
    std::string source_name;
    std::string target_name;
    std::string normalized_source;
    std::string normalized_target;
    std::string description;
    std::optional<double> strength;
    int chunk_id = -1;
};

struct ParseResult {
    std::vector<RawEntityRecord> entities;
    std::vector<RawRelationshipRecord> relationships;
    std::vector<std::string> warnings;
};

enum class PromptVariant { structured, baseline };

struct ExtractionPromptConfig {
    PromptVariant variant = PromptVariant::structured;
    std::string persona;
    std::string task_description;
    std::string context_block;
    std::vector<EntityType> extraction_order;                // structured only
    std::map<EntityType, std::string> type_definitions;     // structured only
    std::vector<std::string> filter_rules;                  // structured only
    std::vector<FewShotExample> few_shot_examples;
    Delimiters delimiters;
    bool strict_types = true;
    EntityType fallback_type = EntityType::Untyped;  // lenient mode only

    void validate() const {
        delimiters.validate();
        if (persona.empty() || task_description.empty() || context_block.empty())
            throw ConfigError("extraction prompt config has an empty core block");
        if (variant == PromptVariant::structured) {
            if (extraction_order.size() != kCanonicalTypeOrder.size() ||
                !std::equal(extraction_order.begin(), extraction_order.end(),
                            kCanonicalTypeOrder.begin()))
                throw ConfigError("structured variant requires the canonical extraction order");
            for (EntityType t : kCanonicalTypeOrder)
                if (!type_definitions.count(t) || type_definitions.at(t).empty())
                    throw ConfigError("structured variant missing type definition for " +
                                      std::string(type_name(t)));
            if (filter_rules.empty())
                throw ConfigError("structured variant requires non-empty filter rules");
        } else {
            if (!extraction_order.empty() || !type_definitions.empty() || !filter_rules.empty())
                throw ConfigError("baseline variant must not carry structured sections");
        }
    }
};

namespace detail {

inline std::optional<double> parse_number(const std::string& s) {
    const std::string t = text::trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') return std::nullopt;
    return v;
}

inline std::string strip_quotes(std::string s) {
    s = text::trim(s);
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        s = s.substr(1, s.size() - 2);
    return text::trim(s);
}

inline std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
    std::vector<std::string> parts;
    std::size_t start = 0, pos;
    while ((pos = s.find(sep, start)) != std::string::npos) {
        parts.push_back(s.substr(start, pos - start));
        start = pos + sep.size();
    }
    parts.push_back(s.substr(start));
    return parts;
}

}  // namespace detail

/// Total parser for the delimiter-structured model output. Never throws on
/// arbitrary text; every failure becomes a warning.
inline ParseResult parse_records(const std::string& response, const Delimiters& delims,
                                 bool strict_types = true,
                                 EntityType fallback_type = EntityType::Untyped,
                                 int chunk_id = -1) {
    delims.validate();
    ParseResult out;
    std::string body = response;
    const auto marker = body.find(delims.completion_marker);
    if (marker == std::string::npos) {
        out.warnings.push_back("no completion marker");
    } else {
        body = body.substr(0, marker);
    }
    for (const std::string& raw : detail::split_on(body, delims.record_sep)) {
        std::string rec = text::trim(raw);
        if (rec.empty()) continue;
        if (rec.front() == '(' && rec.back() == ')') rec = rec.substr(1, rec.size() - 2);
        const auto fields = detail::split_on(rec, delims.field_sep);
        const std::string tag = text::to_lower(detail::strip_quotes(fields[0]));
        if (tag == "entity") {
            if (fields.size() < 3) {
                out.warnings.push_back("entity record has too few fields");
                continue;
            }
            RawEntityRecord e;
            e.name = detail::strip_quotes(fields[1]);
            e.normalized_name = text::normalize_name(e.name);
            if (e.normalized_name.empty()) {
                out.warnings.push_back("entity record has empty name");
                continue;
            }
            const auto type = parse_entity_type(detail::strip_quotes(fields[2]));
            if (!type || *type == EntityType::Untyped) {
                if (strict_types) {
                    out.warnings.push_back("unknown entity type: " +
                                           detail::strip_quotes(fields[2]));
                    continue;
                }
                e.entity_type = fallback_type;
            } else {
                e.entity_type = *type;
            }
            if (fields.size() > 3) e.description = detail::strip_quotes(fields[3]);
            e.chunk_id = chunk_id;
            out.entities.push_back(std::move(e));
        } else if (tag == "relationship") {
            if (fields.size() < 3) {
                out.warnings.push_back("relationship record has too few fields");
                continue;
            }
            RawRelationshipRecord r;
            r.source_name = detail::strip_quotes(fields[1]);
            r.target_name = detail::strip_quotes(fields[2]);
            r.normalized_source = text::normalize_name(r.source_name);
            r.normalized_target = text::normalize_name(r.target_name);
            if (r.normalized_source.empty() || r.normalized_target.empty()) {
                out.warnings.push_back("relationship record has an empty endpoint");
                continue;
            }
            if (r.normalized_source == r.normalized_target) {
                out.warnings.push_back("self-relationship dropped: " + r.normalized_source);
                continue;
            }
            if (fields.size() > 3) r.description = detail::strip_quotes(fields[3]);
            if (fields.size() > 4) r.strength = detail::parse_number(detail::strip_quotes(fields[4]));
            r.chunk_id = chunk_id;
            out.relationships.push_back(std::move(r));
        } else {
            out.warnings.push_back("unknown record tag: " + tag);
        }
    }
    return out;
}

/// Serializes records back to the delimiter format; re-parsing yields
/// identical records.
inline std::string serialize_records(const std::vector<RawEntityRecord>& entities,
                                     const std::vector<RawRelationshipRecord>& relationships,
                                     const Delimiters& delims) {
    std::ostringstream out;
    bool first = true;
    auto sep = [&] {
        if (!first) out << delims.record_sep << "\n";
        first = false;
    };
    for (const auto& e : entities) {
        sep();
        out << "(\"entity\"" << delims.field_sep << e.name << delims.field_sep
            << type_name(e.entity_type) << delims.field_sep << e.description << ")";
    }
    for (const auto& r : relationships) {
        sep();
        out << "(\"relationship\"" << delims.field_sep << r.source_name << delims.field_sep
            << r.target_name << delims.field_sep << r.description;
        if (r.strength) {
            out << delims.field_sep;
            std::ostringstream num;
            num << *r.strength;
            out << num.str();
        }
        out << ")";
    }
    if (!first) out << "\n";
    out << delims.completion_marker;
    return out.str();
}

/// Renders the chunk extraction prompt for either variant. The two variants
/// differ only in prompt content; parsing downstream is identical.
inline std::string render_extraction_prompt(const ExtractionPromptConfig& cfg,
                                            std::string_view chunk_text) {
    cfg.validate();
    std::ostringstream p;
    p << "PERSONA\n" << cfg.persona << "\n\n";
    p << "TASK\n" << cfg.task_description << "\n\n";
    p << "CONTEXT\n" << cfg.context_block << "\n\n";
    if (cfg.variant == PromptVariant::structured) {
        p << "EXTRACTION_ORDER\n";
        for (std::size_t i = 0; i < cfg.extraction_order.size(); ++i)
            p << (i + 1) << ". " << type_name(cfg.extraction_order[i]) << "\n";
        p << "Extract entities one type at a time in the order above. Extract relationships "
             "only after completing all entity types in sequence.\n\n";
        p << "TYPE_DEFINITIONS\n";
        for (EntityType t : cfg.extraction_order)
            p << type_name(t) << ": " << cfg.type_definitions.at(t) << "\n";
        p << "\nFILTER_RULES\n";
        for (const auto& r : cfg.filter_rules) p << "- " << r << "\n";
        p << "\n";
    }
    p << "EXAMPLES\n";
    for (const auto& ex : cfg.few_shot_examples)
        p << "INPUT: " << ex.input << "\nRECORDS: " << ex.resolved << "\n";
    p << "\nOUTPUT\n";
    p << "Emit one record per entity as (\"entity\"" << cfg.delimiters.field_sep << "NAME"
      << cfg.delimiters.field_sep << "TYPE" << cfg.delimiters.field_sep << "DESCRIPTION) and one "
      << "record per relationship as (\"relationship\"" << cfg.delimiters.field_sep << "SOURCE"
      << cfg.delimiters.field_sep << "TARGET" << cfg.delimiters.field_sep << "DESCRIPTION"
      << cfg.delimiters.field_sep << "STRENGTH). Separate records with "
      << cfg.delimiters.record_sep << " and finish with " << cfg.delimiters.completion_marker
      << ".\n\n";
    p << kBeginDocument << "\n" << chunk_text << "\n" << kEndDocument << "\n";
    return p.str();
}

/// Runs extraction on one chunk and parses the response into typed records.
inline ParseResult extract_chunk(const Chunk& chunk, const ExtractionPromptConfig& cfg,
                                 Gateway& gateway, std::string* raw_response = nullptr) {
    if (text::trim(chunk.text).empty()) throw ConfigError("chunk text is empty");
    CompletionRequest req;
    req.prompt = render_extraction_prompt(cfg, chunk.text);
    req.stage_tag =
        cfg.variant == PromptVariant::structured ? "extraction" : "baseline-extraction";
    const CompletionResponse resp = gateway.complete(req);
    if (raw_response) *raw_response = resp.text;
    ParseResult result = parse_records(resp.text, cfg.delimiters, cfg.strict_types,
                                       cfg.fallback_type, chunk.chunk_id);
    if (result.entities.empty() && result.relationships.empty())
        result.warnings.push_back("chunk-extraction-empty: chunk " +
                                  std::to_string(chunk.chunk_id));
    return result;
}

/// Optional post-extraction safety net mirroring the in-prompt government
/// entity filter. Disabled by default; the prompt is the normative filter.
inline std::vector<RawEntityRecord> post_filter_entities(
    const std::vector<RawEntityRecord>& entities, const std::vector<std::string>& lexicon,
    bool enabled = false) {
    if (!enabled) return entities;
    std::vector<RawEntityRecord> kept;
    for (const auto& e : entities) {
        bool noisy = false;
        for (const auto& term : lexicon) {
            if (text::contains_whole_word(e.normalized_name, term)) {
                noisy = true;
                break;
            }
        }
        if (!noisy) kept.push_back(e);
    }
    return kept;
}

/// Built-in extraction prompt configs for the two variants.
inline ExtractionPromptConfig default_extraction_config(PromptVariant variant) {
    ExtractionPromptConfig cfg;
    cfg.variant = variant;
    cfg.persona = "You are an expert analyst of criminal smuggling networks in legal case text.";
    cfg.context_block =
        "The text is one chunk of the Opinion section of a court case about a smuggling "
        "network. Entities may recur across chunks.";
    cfg.few_shot_examples = {
        {"Stone drove the Nissan Maxima north on Interstate 35.",
         "(\"entity\"<|>Stone<|>PERSON<|>driver of the vehicle)##(\"entity\"<|>Nissan "
         "Maxima<|>MEANS OF TRANSPORTATION<|>vehicle used for transport)##(\"relationship\"<|>"
         "Stone<|>Nissan Maxima<|>drove<|>8)<|COMPLETE|>"}};
    if (variant == PromptVariant::structured) {
        cfg.task_description =
            "Extract every relevant entity and relationship from the text as delimiter-"
            "separated records, following the extraction order, type definitions, and filter "
            "rules below.";
        cfg.extraction_order.assign(kCanonicalTypeOrder.begin(), kCanonicalTypeOrder.end());
        cfg.type_definitions = {
            {EntityType::Person,
             "A named individual or role-bearing actor (defendant, driver, agent). Example: "
             "Richard Stone."},
            {EntityType::Location,
             "A geographic place: city, state, border area, or site. Example: San Antonio."},
            {EntityType::Routes,
             "A named road, highway, or travel path. Example: Interstate 35."},
            {EntityType::Organization,
             "A non-government group or company involved in events. Example: a smuggling ring."},
            {EntityType::MeansOfTransportation,
             "A vehicle or conveyance used to move people or goods. Example: Nissan Maxima."},
            {EntityType::MeansOfCommunication,
             "A device or channel used to communicate. Example: cell phone."},
            {EntityType::SmuggledItems,
             "People or goods being smuggled. Example: undocumented aliens."},
        };
        cfg.filter_rules = {
            "After extraction, remove all government-related entities (courts, juries, appeal "
            "processes, judicial proceedings, prosecutors, government agencies) before "
            "generating the final output.",
            "Do not emit legal boilerplate terms as entities.",
        };
    } else {
        cfg.task_description =
            "Identify all entities and the relationships among them in the text, and emit them "
            "as delimiter-separated records.";
    }
    return cfg;
}

}  // namespace corekg
