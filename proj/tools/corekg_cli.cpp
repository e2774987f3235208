// corekg: build and evaluate knowledge graphs from legal case text across
// four ablation configurations.

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "corekg/coref.hpp"
#include "corekg/extraction.hpp"
#include "corekg/gateway.hpp"
#include "corekg/graph.hpp"
#include "corekg/ingest.hpp"
#include "corekg/metrics.hpp"
#include "corekg/mock_llm.hpp"
#include "corekg/report.hpp"
#include "corekg/runner.hpp"

namespace fs = std::filesystem;
using namespace corekg;

namespace {

struct GlobalOptions {
    std::string config_file;
    std::string backend = "mock";  // mock | http
    std::string base_url;
    std::string model;
    std::string wire = "ollama";  // ollama | openai
    std::string replay_dir;
    std::string cache_mode = "off";  // off | record | replay | auto
    std::string output_dir = "runs";
    std::string lexicon_file;
    std::string overrides_file;
    std::string templates_dir;
    std::size_t chunk_size = 300;
    std::size_t overlap = 50;
    double threshold = 75.0;
};

void apply_config_file(GlobalOptions& opts) {
    KeyValueConfig cfg;
    if (!opts.config_file.empty()) cfg = KeyValueConfig::load(opts.config_file);
    auto maybe = [&](std::string& target, const std::string& section, const std::string& key) {
        const std::string v = cfg.get(section, key);
        if (!v.empty() && target.empty()) target = v;
    };
    maybe(opts.base_url, "gateway", "base_url");
    maybe(opts.model, "gateway", "model");
    maybe(opts.replay_dir, "gateway", "replay_dir");
    maybe(opts.lexicon_file, "paths", "lexicon");
    maybe(opts.overrides_file, "paths", "overrides");
    maybe(opts.templates_dir, "paths", "templates");
    opts.chunk_size = cfg.get_size("pipeline", "chunk_size", opts.chunk_size);
    opts.overlap = cfg.get_size("pipeline", "overlap", opts.overlap);
    opts.threshold = cfg.get_double("pipeline", "threshold", opts.threshold);
}

Gateway make_gateway(const GlobalOptions& opts) {
    std::shared_ptr<CompletionBackend> backend;
    if (opts.backend == "mock") {
        ScriptedLlm llm;
        backend = std::make_shared<MockBackend>(llm.handler());
    } else if (opts.backend == "http") {
        HttpBackendConfig cfg;
        if (!opts.base_url.empty()) cfg.base_url = opts.base_url;
        cfg.wire = opts.wire == "openai" ? WireFormat::openai : WireFormat::ollama;
        backend = std::make_shared<HttpBackend>(cfg);
    } else {
        throw ConfigError("unknown backend: " + opts.backend);
    }
    std::shared_ptr<ReplayStore> store;
    CacheMode mode = CacheMode::off;
    if (opts.cache_mode != "off") {
        if (opts.replay_dir.empty()) throw ConfigError("cache mode requires --replay DIR");
        store = std::make_shared<ReplayStore>(opts.replay_dir);
        if (opts.cache_mode == "record") mode = CacheMode::record;
        else if (opts.cache_mode == "replay") mode = CacheMode::replay;
        else if (opts.cache_mode == "auto") mode = CacheMode::replay_or_record;
        else throw ConfigError("unknown cache mode: " + opts.cache_mode);
    }
    return Gateway(std::move(backend), std::move(store), mode);
}

PipelineConfig make_settings(const GlobalOptions& opts, const std::string& config_id) {
    PipelineConfig cfg = PipelineConfig::for_id(config_id);
    cfg.chunk_size = opts.chunk_size;
    cfg.overlap = opts.overlap;
    cfg.threshold = opts.threshold;
    if (!opts.lexicon_file.empty())
        cfg.noise_lexicon = parse_lexicon(read_text_file(opts.lexicon_file));
    if (!opts.overrides_file.empty())
        cfg.overrides = Overrides::parse(read_text_file(opts.overrides_file));
    return cfg;
}

std::map<EntityType, CorefPromptTemplate> load_templates(const GlobalOptions& opts) {
    if (opts.templates_dir.empty()) return default_coref_templates();
    std::map<EntityType, CorefPromptTemplate> out;
    for (EntityType t : kCanonicalTypeOrder) {
        const fs::path p = fs::path(opts.templates_dir) / (std::string(type_tag(t)) + ".txt");
        out[t] = parse_coref_template(read_text_file(p), t);
    }
    return out;
}

std::vector<CaseDocument> ingest_corpus(const std::string& corpus_dir,
                                        const std::string& manifest_file) {
    std::map<std::string, std::string> manifest;
    if (!manifest_file.empty()) manifest = load_manifest(manifest_file);
    CorpusLoadResult loaded = load_corpus(corpus_dir, manifest);
    for (const auto& err : loaded.errors) std::cerr << "warning: " << err << "\n";
    std::vector<CaseDocument> docs;
    for (auto& doc : loaded.documents) docs.push_back(extract_opinion(std::move(doc)));
    return docs;
}

void print_error_summary(const std::string& command, const std::exception& e) {
    nlohmann::json j;
    j["status"] = "error";
    j["command"] = command;
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
}

int cmd_ingest(const GlobalOptions& opts, const std::string& corpus, const std::string& manifest,
               const std::string& out_dir, bool dump_chunks) {
    const auto docs = ingest_corpus(corpus, manifest);
    for (const auto& doc : docs) {
        write_text_file(fs::path(out_dir) / (doc.case_id + ".txt"), doc.opinion_text);
        for (const auto& w : doc.warnings) std::cerr << doc.case_id << ": " << w << "\n";
        if (dump_chunks) {
            const auto chunks =
                chunk_text(doc.opinion_text, opts.chunk_size, opts.overlap, doc.case_id);
            std::string dump;
            for (const auto& c : chunks) {
                nlohmann::json j;
                j["case_id"] = c.case_id;
                j["chunk_id"] = c.chunk_id;
                j["start"] = c.token_begin;
                j["end"] = c.token_end;
                j["text"] = c.text;
                dump += j.dump() + "\n";
            }
            write_text_file(fs::path(out_dir) / (doc.case_id + ".chunks.jsonl"), dump);
        }
    }
    std::cout << "ingested " << docs.size() << " case(s) into " << out_dir << "\n";
    return 0;
}

int cmd_coref(const GlobalOptions& opts, const std::string& corpus, const std::string& out_dir) {
    Gateway gateway = make_gateway(opts);
    const auto templates = load_templates(opts);
    for (const auto& doc : ingest_corpus(corpus, "")) {
        auto [resolved, trace] = resolve_document(doc.opinion_text, templates, gateway,
                                                  doc.case_id);
        for (std::size_t k = 0; k < trace.per_pass.size(); ++k) {
            const auto& pass = trace.per_pass[k];
            write_text_file(fs::path(out_dir) / (doc.case_id + ".pass" + std::to_string(k + 1) +
                                                 "." + std::string(type_tag(pass.entity_type)) +
                                                 ".txt"),
                            pass.output_text);
        }
        write_text_file(fs::path(out_dir) / (doc.case_id + ".resolved.txt"), resolved);
        for (const auto& w : trace.warnings) std::cerr << doc.case_id << ": " << w << "\n";
    }
    std::cout << "coref outputs written to " << out_dir << "\n";
    return 0;
}

int cmd_extract(const GlobalOptions& opts, const std::string& corpus, const std::string& variant,
                const std::string& out_dir) {
    Gateway gateway = make_gateway(opts);
    const PromptVariant pv =
        variant == "baseline" ? PromptVariant::baseline : PromptVariant::structured;
    const ExtractionPromptConfig cfg = default_extraction_config(pv);
    for (const auto& doc : ingest_corpus(corpus, "")) {
        std::vector<RawEntityRecord> entities;
        std::vector<RawRelationshipRecord> relationships;
        for (const auto& chunk :
             chunk_text(doc.opinion_text, opts.chunk_size, opts.overlap, doc.case_id)) {
            std::string raw;
            ParseResult parsed = extract_chunk(chunk, cfg, gateway, &raw);
            write_text_file(fs::path(out_dir) / (doc.case_id + ".chunk" +
                                                 std::to_string(chunk.chunk_id) +
                                                 ".response.txt"),
                            raw);
            entities.insert(entities.end(), parsed.entities.begin(), parsed.entities.end());
            relationships.insert(relationships.end(), parsed.relationships.begin(),
                                 parsed.relationships.end());
        }
        write_text_file(fs::path(out_dir) / (doc.case_id + ".records.txt"),
                        serialize_records(entities, relationships, cfg.delimiters));
    }
    std::cout << "extraction records written to " << out_dir << "\n";
    return 0;
}

int cmd_build(const std::string& records_file, const std::string& case_id,
              const std::string& config_id, const std::string& out_dir) {
    ParseResult parsed = parse_records(read_text_file(records_file), Delimiters{});
    KnowledgeGraph g = build_graph(parsed.entities, parsed.relationships, case_id, config_id);
    const fs::path base = fs::path(out_dir) / (case_id + "." + config_id);
    export_graphml(g, base.string() + ".graphml");
    export_tabular(g, base.string() + ".nodes.csv", base.string() + ".edges.csv");
    const GraphStats stats = graph_stats(g);
    std::cout << "nodes=" << stats.node_count << " relationships=" << stats.relationship_count
              << " rn_ratio=" << format2(stats.rn_ratio) << "\n";
    return 0;
}

int cmd_eval(const GlobalOptions& opts, const std::string& graph_file, const std::string& out) {
    KnowledgeGraph g = import_graphml(graph_file);
    std::vector<std::string> lexicon = opts.lexicon_file.empty()
                                           ? default_noise_lexicon()
                                           : parse_lexicon(read_text_file(opts.lexicon_file));
    Overrides overrides;
    if (!opts.overrides_file.empty())
        overrides = Overrides::parse(read_text_file(opts.overrides_file));
    const auto clusters = cluster_duplicates(g, opts.threshold, overrides);
    const NoiseResult noise = score_noise(g, lexicon, overrides);
    const CaseMetrics m = case_metrics(g, clusters, noise.noisy_count);
    const std::string content = metrics_csv_header() + metrics_csv_row(m);
    if (out.empty()) std::cout << content;
    else write_text_file(out, content);
    return 0;
}

int cmd_run(const GlobalOptions& opts, const std::string& corpus, const std::string& config_id,
            const std::string& run_id) {
    Gateway gateway = make_gateway(opts);
    const auto docs = ingest_corpus(corpus, "");
    const PipelineConfig cfg = make_settings(opts, config_id);
    const auto templates = load_templates(opts);
    const ExtractionPromptConfig extraction_cfg = default_extraction_config(cfg.prompt_variant);
    const fs::path run_dir = fs::path(opts.output_dir) / run_id;
    int failures = 0;
    for (const auto& doc : docs) {
        try {
            CaseRunResult r = run_pipeline(doc, cfg, gateway, run_dir / config_id / doc.case_id,
                                           templates, extraction_cfg);
            std::cout << metrics_csv_row(r.metrics);
        } catch (const std::exception& e) {
            std::cerr << doc.case_id << ": " << e.what() << "\n";
            ++failures;
        }
    }
    if (failures == static_cast<int>(docs.size()) && !docs.empty())
        throw std::runtime_error("all cases failed");
    return 0;
}

int cmd_ablate(const GlobalOptions& opts, const std::string& corpus, const std::string& run_id) {
    Gateway gateway = make_gateway(opts);
    const auto docs = ingest_corpus(corpus, "");
    const PipelineConfig base = make_settings(opts, "corekg");
    const fs::path run_dir = fs::path(opts.output_dir) / run_id;
    const AblationResult result =
        run_ablation(docs, gateway, run_dir, run_id, base, load_templates(opts));
    std::cout << "ablation run " << run_id << ": " << result.manifest.artifacts.size()
              << " artifacts, " << result.manifest.errors.size() << " case errors\n";
    std::cout << "reports under " << (run_dir / "reports").string() << "\n";
    return result.manifest.errors.empty() ? 0 : 1;
}

int cmd_report(const std::string& run_dir_str, const std::string& out_dir_str) {
    const fs::path run_dir(run_dir_str);
    const fs::path out_dir = out_dir_str.empty() ? run_dir / "reports" : fs::path(out_dir_str);
    AblationMetrics metrics;
    std::vector<GraphStatsRow> stats_rows;
    for (auto config_id : kConfigOrder) {
        const fs::path config_dir = run_dir / std::string(config_id);
        if (!fs::is_directory(config_dir)) continue;
        std::vector<fs::path> case_dirs;
        for (const auto& entry : fs::directory_iterator(config_dir))
            if (entry.is_directory()) case_dirs.push_back(entry.path());
        std::sort(case_dirs.begin(), case_dirs.end());
        for (const auto& case_dir : case_dirs) {
            const fs::path metrics_file = case_dir / "metrics.csv";
            if (!fs::exists(metrics_file)) continue;
            for (const auto& m : parse_metrics_csv(read_text_file(metrics_file)))
                metrics.per_config[std::string(config_id)].push_back(m);
            const fs::path graph_file = case_dir / "graph.graphml";
            if (fs::exists(graph_file)) {
                const KnowledgeGraph g = import_graphml(graph_file);
                stats_rows.push_back(
                    {g.case_id, std::string(config_id), graph_stats(g)});
            }
        }
    }
    auto write_report = [&](const std::string& name, const std::string& content) {
        write_text_file(out_dir / (name + ".csv"), content);
        write_text_file(out_dir / (name + ".txt"), csv_to_aligned_text(content));
    };
    write_report("duplication_noise", render_duplication_noise_csv(metrics));
    write_report("degradation", render_degradation_csv(metrics));
    write_report("graph_stats", render_graph_stats_csv(stats_rows));
    std::cout << "reports re-rendered into " << out_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-graph construction and ablation evaluation for legal case text"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--config", opts.config_file, "key=value config file with [section] headers");
    app.add_option("--backend", opts.backend, "completion backend: mock | http");
    app.add_option("--base-url", opts.base_url, "HTTP backend base URL");
    app.add_option("--model", opts.model, "model name tag");
    app.add_option("--wire", opts.wire, "HTTP wire format: ollama | openai");
    app.add_option("--replay", opts.replay_dir, "replay store directory");
    app.add_option("--cache-mode", opts.cache_mode, "off | record | replay | auto");
    app.add_option("--out-dir", opts.output_dir, "base output directory for runs");
    app.add_option("--lexicon", opts.lexicon_file, "noise lexicon file, one term per line");
    app.add_option("--overrides", opts.overrides_file, "expert override directives file");
    app.add_option("--templates", opts.templates_dir, "coref template directory");
    app.add_option("--chunk-size", opts.chunk_size, "chunk size in tokens");
    app.add_option("--overlap", opts.overlap, "chunk overlap in tokens");
    app.add_option("--threshold", opts.threshold, "duplicate similarity threshold (percent)");

    std::string corpus, manifest, out_dir, variant = "structured", records_file, case_id;
    std::string config_id = "corekg", run_id = "run", graph_file, eval_out, report_run_dir;
    bool dump_chunks = false;

    auto* ingest = app.add_subcommand("ingest", "load corpus and emit opinion texts");
    ingest->add_option("--corpus", corpus, "corpus directory")->required();
    ingest->add_option("--manifest", manifest, "filename -> case_id manifest");
    ingest->add_option("--out", out_dir, "output directory")->required();
    ingest->add_flag("--dump-chunks", dump_chunks, "also emit chunk debug dumps");

    auto* coref = app.add_subcommand("coref", "run the coreference stage only");
    coref->add_option("--corpus", corpus, "corpus directory")->required();
    coref->add_option("--out", out_dir, "output directory")->required();

    auto* extract = app.add_subcommand("extract", "chunk and extract records");
    extract->add_option("--corpus", corpus, "corpus directory")->required();
    extract->add_option("--variant", variant, "prompt variant: structured | baseline");
    extract->add_option("--out", out_dir, "output directory")->required();

    auto* build = app.add_subcommand("build", "build a graph from stored records");
    build->add_option("--records", records_file, "records file")->required();
    build->add_option("--case", case_id, "case id")->required();
    build->add_option("--variant", config_id, "config id for labeling");
    build->add_option("--out", out_dir, "output directory")->required();

    auto* eval = app.add_subcommand("eval", "compute metrics from a stored graph");
    eval->add_option("--graph", graph_file, "GraphML file")->required();
    eval->add_option("--out", eval_out, "output CSV (default stdout)");

    auto* run = app.add_subcommand("run", "run one configuration end to end");
    run->add_option("--corpus", corpus, "corpus directory")->required();
    run->add_option("--variant", config_id,
                    "config id: graphrag | no_coref | no_structprompt | corekg");
    run->add_option("--run-id", run_id, "run identifier");

    auto* ablate = app.add_subcommand("ablate", "run all four configurations and reports");
    ablate->add_option("--corpus", corpus, "corpus directory")->required();
    ablate->add_option("--run-id", run_id, "run identifier");

    auto* report = app.add_subcommand("report", "re-render tables from stored metrics");
    report->add_option("--run-dir", report_run_dir, "run directory")->required();
    report->add_option("--out", out_dir, "report output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        apply_config_file(opts);
        if (ingest->parsed()) return cmd_ingest(opts, corpus, manifest, out_dir, dump_chunks);
        if (coref->parsed()) return cmd_coref(opts, corpus, out_dir);
        if (extract->parsed()) return cmd_extract(opts, corpus, variant, out_dir);
        if (build->parsed()) return cmd_build(records_file, case_id, config_id, out_dir);
        if (eval->parsed()) return cmd_eval(opts, graph_file, eval_out);
        if (run->parsed()) return cmd_run(opts, corpus, config_id, run_id);
        if (ablate->parsed()) return cmd_ablate(opts, corpus, run_id);
        if (report->parsed()) return cmd_report(report_run_dir, out_dir);
    } catch (const std::exception& e) {
        print_error_summary(command, e);
        return 1;
    }
    return 0;
}
