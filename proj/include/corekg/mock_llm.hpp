#pragma once

#include <map>
#include <string>
#include <vector>

#include "corekg/coref.hpp"
#include "corekg/entity_type.hpp"
#include "corekg/extraction.hpp"
#include "corekg/gateway.hpp"
#include "corekg/text.hpp"

namespace corekg {

/// Deterministic scripted model used for tests and offline runs.
///
/// Coref stages apply a per-type alias table to the document embedded in the
/// prompt. Extraction stages run a toy rule: maximal runs of capitalized
/// words become entities (type chosen by a stable hash of the name) and
/// consecutive entities in a chunk are linked.
class ScriptedLlm {
public:
    ScriptedLlm() = default;

    void set_alias_table(EntityType type, std::map<std::string, std::string> table) {
        alias_tables_[type] = std::move(table);
    }

    MockBackend::Handler handler() const {
        return [self = *this](const CompletionRequest& req) { return self.respond(req); };
    }

    std::string respond(const CompletionRequest& req) const {
        const std::string document = extract_document(req.prompt);
        if (req.stage_tag.starts_with("coref:")) {
            const std::string tag = req.stage_tag.substr(6);
            std::string resolved = document;
            for (const auto& [type, table] : alias_tables_) {
                if (type_tag(type) == tag) resolved = mock_alias_resolver(document, table);
            }
            return std::string(kBeginResolved) + "\n" + resolved + "\n" +
                   std::string(kEndResolved) + "\n";
        }
        return toy_extraction(document);
    }

    static std::string extract_document(const std::string& prompt) {
        const auto b = prompt.find(kBeginDocument);
        if (b == std::string::npos) return prompt;
        const auto body = prompt.find('\n', b) + 1;
        const auto e = prompt.find(kEndDocument, body);
        if (e == std::string::npos) return prompt.substr(body);
        std::size_t end = e;
        if (end > body && prompt[end - 1] == '\n') --end;
        return prompt.substr(body, end - body);
    }

    static std::string toy_extraction(const std::string& document) {
        std::vector<std::string> names;
        {
            const auto tokens = text::tokenize(document);
            std::string run;
            auto flush = [&] {
                if (!run.empty() && run.find(' ') != std::string::npos) {
                    names.push_back(run);  // multi-word runs only
                } else if (run.size() > 2) {
                    names.push_back(run);
                }
                run.clear();
            };
            for (const auto& span : tokens) {
                std::string word = document.substr(span.begin, span.end - span.begin);
                while (!word.empty() && !text::is_word_char(word.back()) && word.back() != '-')
                    word.pop_back();
                const bool capitalized =
                    !word.empty() && std::isupper(static_cast<unsigned char>(word[0]));
                if (capitalized) {
                    if (!run.empty()) run += ' ';
                    run += word;
                } else {
                    flush();
                }
            }
            flush();
        }
        std::vector<RawEntityRecord> entities;
        std::vector<RawRelationshipRecord> relationships;
        std::vector<std::string> seen;
        for (const auto& name : names) {
            const std::string norm = text::normalize_name(name);
            if (std::find(seen.begin(), seen.end(), norm) != seen.end()) continue;
            seen.push_back(norm);
            RawEntityRecord e;
            e.name = name;
            e.normalized_name = norm;
            e.entity_type = kCanonicalTypeOrder[text::fnv1a64(norm) % kCanonicalTypeOrder.size()];
            e.description = "mention of " + name;
            entities.push_back(std::move(e));
        }
        for (std::size_t i = 1; i < entities.size(); ++i) {
            RawRelationshipRecord r;
            r.source_name = entities[i - 1].name;
            r.target_name = entities[i].name;
            r.normalized_source = entities[i - 1].normalized_name;
            r.normalized_target = entities[i].normalized_name;
            r.description = "appears near";
            r.strength = 5.0;
            relationships.push_back(std::move(r));
        }
        return serialize_records(entities, relationships, Delimiters{});
    }

private:
    std::map<EntityType, std::map<std::string, std::string>> alias_tables_;
};

}  // namespace corekg
