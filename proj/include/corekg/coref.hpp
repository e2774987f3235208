#pragma once

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "corekg/entity_type.hpp"
#include "corekg/errors.hpp"
#include "corekg/gateway.hpp"
#include "corekg/text.hpp"

namespace corekg {

inline constexpr std::string_view kDocumentPlaceholder = "{{DOCUMENT}}";
inline constexpr std::string_view kBeginResolved = "===BEGIN RESOLVED===";
inline constexpr std::string_view kEndResolved = "===END RESOLVED===";
inline constexpr std::string_view kBeginDocument = "===BEGIN DOCUMENT===";
inline constexpr std::string_view kEndDocument = "===END DOCUMENT===";

struct FewShotExample {
    std::string input;
    std::string resolved;
};

struct CorefPromptTemplate {
    EntityType entity_type = EntityType::Person;
    std::string persona;
    std::string task_description;
    std::string context_block;
    std::vector<std::string> resolution_rules;
    std::vector<FewShotExample> few_shot_examples;
    std::string output_instructions;

    void validate() const {
        if (persona.empty() || task_description.empty() || context_block.empty() ||
            resolution_rules.empty() || few_shot_examples.empty() || output_instructions.empty())
            throw TemplateError("coref template for " + std::string(type_name(entity_type)) +
                                " has an empty component");
    }
};

/// Deterministic prompt assembly: persona, task, context, rules, examples,
/// output instructions, then the document in the placeholder slot. The
/// template must carry exactly one {{DOCUMENT}} placeholder.
inline std::string render_prompt(const CorefPromptTemplate& tpl, std::string_view document) {
    tpl.validate();
    std::ostringstream p;
    p << "PERSONA\n" << tpl.persona << "\n\n";
    p << "TASK\n" << tpl.task_description << "\n\n";
    p << "CONTEXT\n" << tpl.context_block << "\n\n";
    p << "RULES\n";
    for (const auto& r : tpl.resolution_rules) p << "- " << r << "\n";
    p << "\nEXAMPLES\n";
    for (const auto& ex : tpl.few_shot_examples)
        p << "INPUT: " << ex.input << "\nRESOLVED: " << ex.resolved << "\n";
    p << "\nOUTPUT\n" << tpl.output_instructions << "\n";
    std::string rendered = p.str();

    std::size_t count = 0, pos = 0;
    while ((pos = rendered.find(kDocumentPlaceholder, pos)) != std::string::npos) {
        ++count;
        pos += kDocumentPlaceholder.size();
    }
    if (count != 1)
        throw TemplateError("template must contain exactly one document placeholder, found " +
                            std::to_string(count));
    const std::size_t at = rendered.find(kDocumentPlaceholder);
    rendered.replace(at, kDocumentPlaceholder.size(), document);
    return rendered;
}

/// Pulls the rewritten document out of a model response. Responses are asked
/// to wrap the document between fixed sentinel lines; missing sentinels fall
/// back to the whole response with a warning.
inline std::string parse_resolved_output(const std::string& response,
                                         std::vector<std::string>* warnings) {
    const auto b = response.find(kBeginResolved);
    if (b != std::string::npos) {
        std::size_t body = response.find('\n', b);
        if (body != std::string::npos) {
            ++body;
            const auto e = response.find(kEndResolved, body);
            if (e != std::string::npos) {
                std::size_t end = e;
                if (end > body && response[end - 1] == '\n') --end;
                return response.substr(body, end - body);
            }
        }
        if (warnings) warnings->push_back("response missing end sentinel; using full response");
        return response;
    }
    if (warnings) warnings->push_back("response missing sentinels; using full response");
    return response;
}

struct CorefPass {
    EntityType entity_type;
    std::string input_digest;
    std::string output_digest;
    std::string output_text;
};

struct CorefTrace {
    std::string case_id;
    std::vector<CorefPass> per_pass;
    std::vector<std::string> warnings;
};

enum class PassFailurePolicy { keep_previous_text, fail_run };

struct CorefOptions {
    PassFailurePolicy on_pass_failure = PassFailurePolicy::keep_previous_text;
    std::size_t context_budget_tokens = 0;  // 0 = no segmentation
};

namespace detail {

inline std::vector<std::string> split_paragraph_segments(const std::string& doc,
                                                         std::size_t budget_tokens) {
    std::vector<std::string> segments;
    std::string current;
    std::size_t current_tokens = 0;
    auto flush = [&] {
        if (!current.empty()) segments.push_back(current);
        current.clear();
        current_tokens = 0;
    };
    std::vector<std::string> paragraphs;
    {
        std::string para;
        for (const auto& l : text::split_lines(doc)) {
            if (text::trim(l).empty()) {
                if (!para.empty()) paragraphs.push_back(para);
                para.clear();
            } else {
                if (!para.empty()) para += '\n';
                para += l;
            }
        }
        if (!para.empty()) paragraphs.push_back(para);
    }
    for (const auto& para : paragraphs) {
        const std::size_t ptok = text::tokenize(para).size();
        if (current_tokens > 0 && current_tokens + ptok > budget_tokens) flush();
        if (!current.empty()) current += "\n\n";
        current += para;
        current_tokens += ptok;
    }
    flush();
    if (segments.empty()) segments.push_back(doc);
    return segments;
}

}  // namespace detail

/// One coreference pass: rewrites the document so mentions of entities of one
/// type converge on a single canonical surface form.
inline std::string resolve_type(const std::string& document, EntityType type,
                                const CorefPromptTemplate& tpl, Gateway& gateway,
                                const CorefOptions& opts = {},
                                std::vector<std::string>* warnings = nullptr) {
    if (tpl.entity_type != type)
        throw TemplateError("template type mismatch: expected " + std::string(type_name(type)) +
                            ", got " + std::string(type_name(tpl.entity_type)));
    std::vector<std::string> segments;
    if (opts.context_budget_tokens > 0 &&
        text::tokenize(document).size() > opts.context_budget_tokens) {
        segments = detail::split_paragraph_segments(document, opts.context_budget_tokens);
        if (warnings && segments.size() > 1)
            warnings->push_back("document exceeds context budget; split into " +
                                std::to_string(segments.size()) + " coref segments");
    } else {
        segments.push_back(document);
    }

    std::string result;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        CompletionRequest req;
        req.prompt = render_prompt(tpl, segments[i]);
        req.stage_tag = "coref:" + std::string(type_tag(type));
        const CompletionResponse resp = gateway.complete(req);
        std::string out = parse_resolved_output(resp.text, warnings);
        if (text::trim(out).empty()) {
            if (opts.on_pass_failure == PassFailurePolicy::fail_run)
                throw PassFailureError("empty model output in " + req.stage_tag + " pass");
            if (warnings)
                warnings->push_back("empty model output in " + req.stage_tag +
                                    " pass; keeping previous text");
            out = segments[i];
        } else if (out.size() * 2 < segments[i].size()) {
            if (warnings)
                warnings->push_back("coref " + std::string(type_tag(type)) +
                                    " pass output shrank below half the input length");
        }
        if (i > 0) result += "\n\n";
        result += out;
    }
    return result;
}

/// Runs the seven per-type passes in canonical order, threading each output
/// into the next pass.
inline std::pair<std::string, CorefTrace> resolve_document(
    const std::string& document, const std::map<EntityType, CorefPromptTemplate>& templates,
    Gateway& gateway, const std::string& case_id = "", const CorefOptions& opts = {}) {
    for (EntityType t : kCanonicalTypeOrder) {
        if (!templates.count(t))
            throw TemplateError("missing coref template for type " + std::string(type_name(t)));
    }
    CorefTrace trace;
    trace.case_id = case_id;
    std::string current = document;
    for (EntityType t : kCanonicalTypeOrder) {
        CorefPass pass;
        pass.entity_type = t;
        pass.input_digest = text::digest(current);
        current = resolve_type(current, t, templates.at(t), gateway, opts, &trace.warnings);
        pass.output_digest = text::digest(current);
        pass.output_text = current;
        trace.per_pass.push_back(std::move(pass));
    }
    return {current, trace};
}

/// Parses a template file with PERSONA / TASK / CONTEXT / RULES / EXAMPLES /
/// OUTPUT section headers, each on its own line.
inline CorefPromptTemplate parse_coref_template(const std::string& content, EntityType type) {
    CorefPromptTemplate tpl;
    tpl.entity_type = type;
    std::string section;
    std::map<std::string, std::vector<std::string>> bodies;
    for (const auto& line : text::split_lines(content)) {
        const std::string t = text::trim(line);
        if (t == "PERSONA" || t == "TASK" || t == "CONTEXT" || t == "RULES" || t == "EXAMPLES" ||
            t == "OUTPUT") {
            section = t;
            continue;
        }
        if (!section.empty()) bodies[section].push_back(line);
    }
    auto join = [](const std::vector<std::string>& lines) {
        std::string out;
        for (const auto& l : lines) {
            if (!out.empty()) out += '\n';
            out += l;
        }
        return text::trim(out);
    };
    tpl.persona = join(bodies["PERSONA"]);
    tpl.task_description = join(bodies["TASK"]);
    tpl.context_block = join(bodies["CONTEXT"]);
    for (const auto& l : bodies["RULES"]) {
        std::string t = text::trim(l);
        if (t.starts_with("- ")) t = t.substr(2);
        if (!t.empty()) tpl.resolution_rules.push_back(t);
    }
    FewShotExample ex;
    for (const auto& l : bodies["EXAMPLES"]) {
        std::string t = text::trim(l);
        if (t.starts_with("INPUT:")) {
            ex.input = text::trim(t.substr(6));
        } else if (t.starts_with("RESOLVED:")) {
            ex.resolved = text::trim(t.substr(9));
            tpl.few_shot_examples.push_back(ex);
            ex = {};
        }
    }
    tpl.output_instructions = join(bodies["OUTPUT"]);
    tpl.validate();
    return tpl;
}

/// Built-in per-type templates used when no template directory is configured.
inline std::map<EntityType, CorefPromptTemplate> default_coref_templates() {
    std::map<EntityType, CorefPromptTemplate> out;
    struct Spec {
        EntityType type;
        const char* noun;
        const char* rule;
        FewShotExample example;
    };
    const std::vector<Spec> specs = {
        {EntityType::Person, "people",
         "Link role-based mentions (the defendant, the driver) and name variants to the most "
         "complete proper name.",
         {"Defendant Stone fled. The defendant was caught.",
          "Richard Stone fled. Richard Stone was caught."}},
        {EntityType::Location, "locations",
         "Unify place mentions that differ only in granularity or punctuation.",
         {"They stopped in Laredo. Laredo, Texas was busy.",
          "They stopped in Laredo, Texas. Laredo, Texas was busy."}},
        {EntityType::Routes, "routes",
         "Unify formal route names and their abbreviations.",
         {"They took Interstate 35. I-35 was clear.",
          "They took Interstate 35. Interstate 35 was clear."}},
        {EntityType::Organization, "organizations",
         "Unify organization names, acronyms, and shortened forms.",
         {"Border Patrol stopped them. The BP agents searched the car.",
          "Border Patrol stopped them. The Border Patrol agents searched the car."}},
        {EntityType::MeansOfTransportation, "means of transportation",
         "Unify vehicle mentions combining object references and ownership cues.",
         {"He drove a Nissan Maxima. The car sped away.",
          "He drove a Nissan Maxima. The Nissan Maxima sped away."}},
        {EntityType::MeansOfCommunication, "means of communication",
         "Unify phone, radio, and messaging device mentions that refer to the same instrument.",
         {"She used a cell phone. The phone rang twice.",
          "She used a cell phone. The cell phone rang twice."}},
        {EntityType::SmuggledItems, "smuggled items",
         "Unify mentions of the same smuggled goods or groups of people.",
         {"Agents found the aliens. The undocumented aliens were detained.",
          "Agents found the undocumented aliens. The undocumented aliens were detained."}},
    };
    for (const auto& s : specs) {
        CorefPromptTemplate tpl;
        tpl.entity_type = s.type;
        tpl.persona =
            "You are an expert legal text analyst specializing in criminal case narratives.";
        tpl.task_description =
            std::string("Rewrite the document so that every mention of each ") + s.noun +
            " entity uses one canonical surface form. Resolve coreferences accurately without "
            "altering the input otherwise.";
        tpl.context_block =
            "The document is the Opinion section of a court case about a smuggling network. "
            "Mentions of the same entity may appear as aliases, abbreviations, or role-based "
            "references.";
        tpl.resolution_rules = {
            s.rule,
            "Choose the most complete proper name as the canonical form.",
            "Do not add, remove, or reorder sentences.",
            std::string("Only resolve mentions of ") + std::string(type_name(s.type)) +
                " entities; leave every other word unchanged.",
        };
        tpl.few_shot_examples = {s.example};
        tpl.output_instructions =
            std::string("Return the full rewritten document between a line reading ") +
            std::string(kBeginResolved) + " and a line reading " + std::string(kEndResolved) +
            ". Output nothing else.\n\n" + std::string(kBeginDocument) + "\n" +
            std::string(kDocumentPlaceholder) + "\n" + std::string(kEndDocument);
        out[s.type] = std::move(tpl);
    }
    return out;
}

}  // namespace corekg
