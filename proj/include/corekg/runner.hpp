#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corekg/coref.hpp"
#include "corekg/errors.hpp"
#include "corekg/extraction.hpp"
#include "corekg/gateway.hpp"
#include "corekg/graph.hpp"
#include "corekg/ingest.hpp"
#include "corekg/metrics.hpp"
#include "corekg/report.hpp"

namespace corekg {

/// One of the four ablation configurations. The (coref_enabled,
/// prompt_variant) pair is fixed by config_id.
struct PipelineConfig {
    std::string config_id;
    bool coref_enabled = true;
    PromptVariant prompt_variant = PromptVariant::structured;
    std::size_t chunk_size = 300;
    std::size_t overlap = 50;
    double threshold = 75.0;
    std::vector<std::string> noise_lexicon = default_noise_lexicon();
    Overrides overrides;
    CorefOptions coref_options;

    static PipelineConfig for_id(std::string_view id) {
        PipelineConfig cfg;
        cfg.config_id = std::string(id);
        if (id == "graphrag") {
            cfg.coref_enabled = false;
            cfg.prompt_variant = PromptVariant::baseline;
        } else if (id == "no_coref") {
            cfg.coref_enabled = false;
            cfg.prompt_variant = PromptVariant::structured;
        } else if (id == "no_structprompt") {
            cfg.coref_enabled = true;
            cfg.prompt_variant = PromptVariant::baseline;
        } else if (id == "corekg") {
            cfg.coref_enabled = true;
            cfg.prompt_variant = PromptVariant::structured;
        } else {
            throw ConfigError("unknown config id: " + std::string(id));
        }
        return cfg;
    }

    void validate() const {
        const PipelineConfig expected = for_id(config_id);
        if (coref_enabled != expected.coref_enabled || prompt_variant != expected.prompt_variant)
            throw ConfigError("config " + config_id +
                              " violates its (coref, prompt variant) invariant");
        if (chunk_size == 0 || chunk_size <= overlap)
            throw ConfigError("chunk_size must be positive and exceed overlap");
    }
};

struct CaseRunResult {
    KnowledgeGraph graph;
    CaseMetrics metrics;
    GraphStats stats;
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> artifacts;
};

namespace detail {

inline void dump_chunks(const std::vector<Chunk>& chunks, const std::filesystem::path& path) {
    std::string out;
    for (const auto& c : chunks) {
        nlohmann::json j;
        j["case_id"] = c.case_id;
        j["chunk_id"] = c.chunk_id;
        j["start"] = c.token_begin;
        j["end"] = c.token_end;
        j["text"] = c.text;
        out += j.dump() + "\n";
    }
    write_text_file(path, out);
}

}  // namespace detail

/// End-to-end single-case run:
/// text -> (optional coref) -> chunking -> per-chunk extraction -> graph ->
/// metrics, with every stage output persisted under case_dir.
inline CaseRunResult run_pipeline(const CaseDocument& doc, const PipelineConfig& cfg,
                                  Gateway& gateway, const std::filesystem::path& case_dir,
                                  const std::map<EntityType, CorefPromptTemplate>& templates,
                                  const ExtractionPromptConfig& extraction_cfg) {
    cfg.validate();
    CaseRunResult result;
    auto persist = [&](const std::filesystem::path& p, std::string_view content) {
        write_text_file(p, content);
        result.artifacts.push_back(p);
    };

    std::string working_text = doc.opinion_text;
    if (cfg.coref_enabled) {
        auto [resolved, trace] =
            resolve_document(working_text, templates, gateway, doc.case_id, cfg.coref_options);
        working_text = resolved;
        for (std::size_t k = 0; k < trace.per_pass.size(); ++k) {
            const auto& pass = trace.per_pass[k];
            persist(case_dir / "coref" /
                        (doc.case_id + ".pass" + std::to_string(k + 1) + "." +
                         std::string(type_tag(pass.entity_type)) + ".txt"),
                    pass.output_text);
        }
        result.warnings.insert(result.warnings.end(), trace.warnings.begin(),
                               trace.warnings.end());
    }

    const auto chunks = chunk_text(working_text, cfg.chunk_size, cfg.overlap, doc.case_id);
    detail::dump_chunks(chunks, case_dir / "chunks" / "chunks.jsonl");
    result.artifacts.push_back(case_dir / "chunks" / "chunks.jsonl");

    std::vector<RawEntityRecord> entities;
    std::vector<RawRelationshipRecord> relationships;
    for (const auto& chunk : chunks) {
        if (chunk.chunk_id == 0)
            persist(case_dir / "prompts" / "extraction_prompt.txt",
                    render_extraction_prompt(extraction_cfg, chunk.text));
        std::string raw_response;
        ParseResult parsed = extract_chunk(chunk, extraction_cfg, gateway, &raw_response);
        persist(case_dir / "responses" /
                    (doc.case_id + ".chunk" + std::to_string(chunk.chunk_id) + ".response.txt"),
                raw_response);
        entities.insert(entities.end(), parsed.entities.begin(), parsed.entities.end());
        relationships.insert(relationships.end(), parsed.relationships.begin(),
                             parsed.relationships.end());
        result.warnings.insert(result.warnings.end(), parsed.warnings.begin(),
                               parsed.warnings.end());
    }

    result.graph = build_graph(entities, relationships, doc.case_id, cfg.config_id);
    result.graph.chunk_count = chunks.size();
    persist(case_dir / "graph.graphml", render_graphml(result.graph));
    export_tabular(result.graph, case_dir / "nodes.csv", case_dir / "edges.csv");
    result.artifacts.push_back(case_dir / "nodes.csv");
    result.artifacts.push_back(case_dir / "edges.csv");

    const auto clusters = cluster_duplicates(result.graph, cfg.threshold, cfg.overrides);
    const NoiseResult noise = score_noise(result.graph, cfg.noise_lexicon, cfg.overrides);
    result.metrics = case_metrics(result.graph, clusters, noise.noisy_count);
    result.stats = graph_stats(result.graph);
    persist(case_dir / "metrics.csv", metrics_csv_header() + metrics_csv_row(result.metrics));
    return result;
}

struct RunManifest {
    std::string run_id;
    std::vector<std::string> config_ids;
    std::string corpus_digest;
    std::vector<std::filesystem::path> artifacts;
    std::vector<std::string> errors;    // per-case failures; the run continues
    std::vector<std::string> warnings;
    std::int64_t elapsed_ms = 0;
};

struct AblationResult {
    AblationMetrics metrics;
    std::vector<GraphStatsRow> stats_rows;
    RunManifest manifest;
};

inline std::string render_manifest(const RunManifest& m) {
    std::ostringstream out;
    out << "run_id: " << m.run_id << "\n";
    out << "corpus_digest: " << m.corpus_digest << "\n";
    out << "configs:";
    for (const auto& c : m.config_ids) out << " " << c;
    out << "\n";
    out << "elapsed_ms: " << m.elapsed_ms << "\n";
    out << "warnings: " << m.warnings.size() << "\n";
    for (const auto& w : m.warnings) out << "  warning: " << w << "\n";
    out << "errors: " << m.errors.size() << "\n";
    for (const auto& e : m.errors) out << "  error: " << e << "\n";
    out << "artifacts: " << m.artifacts.size() << "\n";
    for (const auto& a : m.artifacts) out << "  " << a.string() << "\n";
    return out.str();
}

/// Executes run_pipeline for every (case, config) pair, then renders the
/// comparison reports. All configs share the same ingested opinion texts.
inline AblationResult run_ablation(const std::vector<CaseDocument>& corpus, Gateway& gateway,
                                   const std::filesystem::path& run_dir,
                                   const std::string& run_id,
                                   const PipelineConfig& base_settings = PipelineConfig::for_id(
                                       "corekg"),
                                   const std::map<EntityType, CorefPromptTemplate>& templates =
                                       default_coref_templates()) {
    const auto t0 = std::chrono::steady_clock::now();
    if (corpus.empty()) throw CorpusEmptyError("ablation requires a non-empty corpus");
    AblationResult result;
    result.manifest.run_id = run_id;

    std::string corpus_key;
    for (const auto& doc : corpus) {
        corpus_key += doc.case_id;
        corpus_key += '\x1f';
        corpus_key += doc.opinion_text;
        corpus_key += '\x1e';
    }
    result.manifest.corpus_digest = text::digest(corpus_key);

    // Shared ingest artifacts: identical input documents for all four configs.
    for (const auto& doc : corpus) {
        const auto p = run_dir / "ingest" / (doc.case_id + ".txt");
        write_text_file(p, doc.opinion_text);
        result.manifest.artifacts.push_back(p);
    }

    const std::map<PromptVariant, ExtractionPromptConfig> extraction_cfgs = {
        {PromptVariant::structured, default_extraction_config(PromptVariant::structured)},
        {PromptVariant::baseline, default_extraction_config(PromptVariant::baseline)},
    };

    for (auto config_id : kConfigOrder) {
        PipelineConfig cfg = PipelineConfig::for_id(config_id);
        cfg.chunk_size = base_settings.chunk_size;
        cfg.overlap = base_settings.overlap;
        cfg.threshold = base_settings.threshold;
        cfg.noise_lexicon = base_settings.noise_lexicon;
        cfg.overrides = base_settings.overrides;
        cfg.coref_options = base_settings.coref_options;
        result.manifest.config_ids.push_back(cfg.config_id);

        for (const auto& doc : corpus) {
            const auto case_dir = run_dir / cfg.config_id / doc.case_id;
            try {
                CaseRunResult r = run_pipeline(doc, cfg, gateway, case_dir, templates,
                                               extraction_cfgs.at(cfg.prompt_variant));
                result.metrics.per_config[cfg.config_id].push_back(r.metrics);
                result.stats_rows.push_back({doc.case_id, cfg.config_id, r.stats});
                result.manifest.artifacts.insert(result.manifest.artifacts.end(),
                                                 r.artifacts.begin(), r.artifacts.end());
                result.manifest.warnings.insert(result.manifest.warnings.end(),
                                                r.warnings.begin(), r.warnings.end());
            } catch (const std::exception& e) {
                result.manifest.errors.push_back(cfg.config_id + "/" + doc.case_id + ": " +
                                                 e.what());
            }
        }
    }

    const auto reports_dir = run_dir / "reports";
    auto write_report = [&](const std::string& name, const std::string& csv_content) {
        write_text_file(reports_dir / (name + ".csv"), csv_content);
        write_text_file(reports_dir / (name + ".txt"), csv_to_aligned_text(csv_content));
        result.manifest.artifacts.push_back(reports_dir / (name + ".csv"));
        result.manifest.artifacts.push_back(reports_dir / (name + ".txt"));
    };
    write_report("duplication_noise", render_duplication_noise_csv(result.metrics));
    write_report("degradation", render_degradation_csv(result.metrics));
    write_report("graph_stats", render_graph_stats_csv(result.stats_rows));

    result.manifest.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::steady_clock::now() - t0)
                                     .count();
    write_text_file(run_dir / "manifest.txt", render_manifest(result.manifest));
    return result;
}

/// Line-based `key = value` configuration with [section] headers.
/// Environment variables COREKG_<SECTION>_<KEY> override file values.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& content) {
        KeyValueConfig cfg;
        std::string section = "global";
        for (const auto& raw : text::split_lines(content)) {
            const std::string line = text::trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (line.front() == '[' && line.back() == ']') {
                section = text::to_lower(text::trim(line.substr(1, line.size() - 2)));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line missing '=': " + line);
            cfg.values_[section + "." + text::to_lower(text::trim(line.substr(0, eq)))] =
                text::trim(line.substr(eq + 1));
        }
        return cfg;
    }

    static KeyValueConfig load(const std::filesystem::path& path) {
        return parse(read_text_file(path));
    }

    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = "") const {
        std::string env_name = "COREKG_" + text::to_upper(section) + "_" + text::to_upper(key);
        if (const char* env = std::getenv(env_name.c_str())) return env;
        auto it = values_.find(text::to_lower(section) + "." + text::to_lower(key));
        return it != values_.end() ? it->second : fallback;
    }

    std::size_t get_size(const std::string& section, const std::string& key,
                         std::size_t fallback) const {
        const std::string v = get(section, key);
        return v.empty() ? fallback : static_cast<std::size_t>(std::stoull(v));
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        const std::string v = get(section, key);
        return v.empty() ? fallback : std::stod(v);
    }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace corekg
