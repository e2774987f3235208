#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "corekg/mock_llm.hpp"
#include "corekg/runner.hpp"

using namespace corekg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("corekg_run_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

CaseDocument make_case(const std::string& id, const std::string& text) {
    CaseDocument doc;
    doc.case_id = id;
    doc.raw_text = text;
    doc.opinion_text = text;
    doc.word_count = text::tokenize(text).size();
    return doc;
}

ScriptedLlm scripted() {
    ScriptedLlm llm;
    llm.set_alias_table(EntityType::Person, {{"the defendant", "Richard Stone"}});
    llm.set_alias_table(EntityType::Routes, {{"I-35", "Interstate 35"}});
    return llm;
}

const std::string kSampleText =
    "the defendant met Maria Lopez near Laredo Texas and drove the Nissan Maxima "
    "north on I-35 while Border Patrol watched the defendant";

}  // namespace

TEST_CASE("the four configurations have fixed coref and prompt settings") {
    struct Expected {
        const char* id;
        bool coref;
        PromptVariant variant;
    };
    const Expected table[] = {
        {"graphrag", false, PromptVariant::baseline},
        {"no_coref", false, PromptVariant::structured},
        {"no_structprompt", true, PromptVariant::baseline},
        {"corekg", true, PromptVariant::structured},
    };
    for (const auto& e : table) {
        const auto cfg = PipelineConfig::for_id(e.id);
        CHECK(cfg.config_id == e.id);
        CHECK(cfg.coref_enabled == e.coref);
        CHECK(cfg.prompt_variant == e.variant);
        CHECK_NOTHROW(cfg.validate());
    }
    CHECK_THROWS_AS(PipelineConfig::for_id("mystery"), ConfigError);
}

TEST_CASE("validate rejects configs that break their invariant") {
    auto cfg = PipelineConfig::for_id("graphrag");
    cfg.coref_enabled = true;  // graphrag must not run coref
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = PipelineConfig::for_id("corekg");
    cfg.prompt_variant = PromptVariant::baseline;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = PipelineConfig::for_id("corekg");
    cfg.overlap = cfg.chunk_size;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("run_pipeline persists every stage artifact") {
    TempDir tmp;
    auto mock = std::make_shared<MockBackend>(scripted().handler());
    Gateway gateway(mock);
    const auto doc = make_case("case1", kSampleText);
    const auto cfg = PipelineConfig::for_id("corekg");
    const auto result =
        run_pipeline(doc, cfg, gateway, tmp.path, default_coref_templates(),
                     default_extraction_config(PromptVariant::structured));

    CHECK(fs::exists(tmp.path / "coref" / "case1.pass1.person.txt"));
    CHECK(fs::exists(tmp.path / "coref" / "case1.pass7.smuggled_items.txt"));
    CHECK(fs::exists(tmp.path / "chunks" / "chunks.jsonl"));
    CHECK(fs::exists(tmp.path / "prompts" / "extraction_prompt.txt"));
    CHECK(fs::exists(tmp.path / "responses" / "case1.chunk0.response.txt"));
    CHECK(fs::exists(tmp.path / "graph.graphml"));
    CHECK(fs::exists(tmp.path / "nodes.csv"));
    CHECK(fs::exists(tmp.path / "edges.csv"));
    CHECK(fs::exists(tmp.path / "metrics.csv"));
    CHECK(result.metrics.total_nodes > 0);
    CHECK(result.metrics.case_id == "case1");
    CHECK(result.metrics.config_id == "corekg");

    // The persisted graph parses back to the in-memory one.
    const auto imported = import_graphml(tmp.path / "graph.graphml");
    CHECK(render_graphml(imported) == render_graphml(result.graph));

    // The metrics file parses back to the computed metrics.
    const auto parsed = parse_metrics_csv(read_text_file(tmp.path / "metrics.csv"));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].total_nodes == result.metrics.total_nodes);
    CHECK(parsed[0].duplicate_count == result.metrics.duplicate_count);
    CHECK(parsed[0].noisy_count == result.metrics.noisy_count);
}

TEST_CASE("coref gating: only coref-enabled configs emit coref passes") {
    TempDir tmp;
    auto mock = std::make_shared<MockBackend>(scripted().handler());
    Gateway gateway(mock);
    const auto doc = make_case("case1", kSampleText);

    run_pipeline(doc, PipelineConfig::for_id("graphrag"), gateway, tmp.path / "graphrag",
                 default_coref_templates(), default_extraction_config(PromptVariant::baseline));
    CHECK_FALSE(fs::exists(tmp.path / "graphrag" / "coref"));

    run_pipeline(doc, PipelineConfig::for_id("corekg"), gateway, tmp.path / "corekg",
                 default_coref_templates(), default_extraction_config(PromptVariant::structured));
    std::size_t pass_files = 0;
    for (const auto& entry : fs::directory_iterator(tmp.path / "corekg" / "coref"))
        if (entry.is_regular_file()) ++pass_files;
    CHECK(pass_files == 7);
}

TEST_CASE("prompt gating: persisted prompts match the configured variant") {
    TempDir tmp;
    auto mock = std::make_shared<MockBackend>(scripted().handler());
    Gateway gateway(mock);
    const auto doc = make_case("case1", kSampleText);

    run_pipeline(doc, PipelineConfig::for_id("no_coref"), gateway, tmp.path / "no_coref",
                 default_coref_templates(), default_extraction_config(PromptVariant::structured));
    const std::string structured =
        read_text_file(tmp.path / "no_coref" / "prompts" / "extraction_prompt.txt");
    CHECK(structured.find("EXTRACTION_ORDER") != std::string::npos);
    CHECK(structured.find("FILTER_RULES") != std::string::npos);

    run_pipeline(doc, PipelineConfig::for_id("no_structprompt"), gateway,
                 tmp.path / "no_structprompt", default_coref_templates(),
                 default_extraction_config(PromptVariant::baseline));
    const std::string baseline =
        read_text_file(tmp.path / "no_structprompt" / "prompts" / "extraction_prompt.txt");
    CHECK(baseline.find("EXTRACTION_ORDER") == std::string::npos);
    CHECK(baseline.find("FILTER_RULES") == std::string::npos);
}

TEST_CASE("coref changes the extracted graph where aliases are involved") {
    TempDir tmp;
    auto mock = std::make_shared<MockBackend>(scripted().handler());
    Gateway gateway(mock);
    const auto doc = make_case("case1", kSampleText);

    const auto with_coref =
        run_pipeline(doc, PipelineConfig::for_id("corekg"), gateway, tmp.path / "a",
                     default_coref_templates(), default_extraction_config(PromptVariant::structured));
    const auto without_coref =
        run_pipeline(doc, PipelineConfig::for_id("no_coref"), gateway, tmp.path / "b",
                     default_coref_templates(), default_extraction_config(PromptVariant::structured));

    auto has_name = [](const KnowledgeGraph& g, const std::string& name) {
        for (const auto& [key, node] : g.nodes)
            if (key.normalized_name == name) return true;
        return false;
    };
    CHECK(has_name(with_coref.graph, "RICHARD STONE"));
    CHECK_FALSE(has_name(without_coref.graph, "RICHARD STONE"));
}

TEST_CASE("identical runs produce byte-identical graphs and metrics") {
    TempDir tmp;
    auto mock = std::make_shared<MockBackend>(scripted().handler());
    Gateway gateway(mock);
    const auto doc = make_case("case1", kSampleText);
    const auto cfg = PipelineConfig::for_id("corekg");
    const auto extraction = default_extraction_config(PromptVariant::structured);

    run_pipeline(doc, cfg, gateway, tmp.path / "run1", default_coref_templates(), extraction);
    run_pipeline(doc, cfg, gateway, tmp.path / "run2", default_coref_templates(), extraction);
    CHECK(read_text_file(tmp.path / "run1" / "graph.graphml") ==
          read_text_file(tmp.path / "run2" / "graph.graphml"));
    CHECK(read_text_file(tmp.path / "run1" / "metrics.csv") ==
          read_text_file(tmp.path / "run2" / "metrics.csv"));
}

TEST_CASE("a recorded run replays without touching the backend") {
    TempDir tmp;
    int backend_calls = 0;
    const ScriptedLlm llm = scripted();
    auto counting = std::make_shared<MockBackend>([&, llm](const CompletionRequest& req) {
        ++backend_calls;
        return llm.respond(req);
    });
    const auto doc = make_case("case1", kSampleText);
    const auto cfg = PipelineConfig::for_id("corekg");
    const auto extraction = default_extraction_config(PromptVariant::structured);

    auto store = std::make_shared<ReplayStore>(tmp.path / "cache");
    Gateway recorder(counting, store, CacheMode::record);
    run_pipeline(doc, cfg, recorder, tmp.path / "run1", default_coref_templates(), extraction);
    const int calls_after_record = backend_calls;
    CHECK(calls_after_record > 0);

    Gateway replayer(nullptr, store, CacheMode::replay);
    run_pipeline(doc, cfg, replayer, tmp.path / "run2", default_coref_templates(), extraction);
    CHECK(backend_calls == calls_after_record);
    CHECK(read_text_file(tmp.path / "run1" / "graph.graphml") ==
          read_text_file(tmp.path / "run2" / "graph.graphml"));
}

TEST_CASE("run_ablation writes reports, manifest, and per-config artifacts") {
    TempDir tmp;
    auto mock = std::make_shared<MockBackend>(scripted().handler());
    Gateway gateway(mock);
    const std::vector<CaseDocument> corpus = {
        make_case("case1", kSampleText),
        make_case("case2",
                  "Maria Lopez called the stash house on a cell phone while Pedro Gomez waited "
                  "in Houston Texas with the undocumented aliens"),
    };
    const auto result = run_ablation(corpus, gateway, tmp.path, "run-001");

    CHECK(result.manifest.run_id == "run-001");
    CHECK(result.manifest.errors.empty());
    CHECK(result.manifest.config_ids ==
          std::vector<std::string>{"graphrag", "no_coref", "no_structprompt", "corekg"});
    for (const auto cfg : kConfigOrder) {
        REQUIRE(result.metrics.per_config.count(std::string(cfg)) == 1);
        CHECK(result.metrics.per_config.at(std::string(cfg)).size() == 2);
        CHECK(fs::exists(tmp.path / std::string(cfg) / "case1" / "graph.graphml"));
        CHECK(fs::exists(tmp.path / std::string(cfg) / "case2" / "metrics.csv"));
    }
    CHECK(fs::exists(tmp.path / "ingest" / "case1.txt"));
    CHECK(fs::exists(tmp.path / "reports" / "duplication_noise.csv"));
    CHECK(fs::exists(tmp.path / "reports" / "duplication_noise.txt"));
    CHECK(fs::exists(tmp.path / "reports" / "degradation.csv"));
    CHECK(fs::exists(tmp.path / "reports" / "graph_stats.csv"));
    CHECK(fs::exists(tmp.path / "manifest.txt"));
    CHECK(result.stats_rows.size() == 8);

    const auto rows = csv::parse(read_text_file(tmp.path / "reports" / "duplication_noise.csv"));
    REQUIRE(rows.size() == 4);  // header, two cases, Avg
    CHECK(rows.back()[0] == "Avg");
}

TEST_CASE("per-case failures are recorded and the ablation continues") {
    TempDir tmp;
    auto mock = std::make_shared<MockBackend>(scripted().handler());
    Gateway gateway(mock);
    const std::vector<CaseDocument> corpus = {
        make_case("empty_case", ""),  // yields no chunks, so no graph
        make_case("good_case", kSampleText),
    };
    const auto result = run_ablation(corpus, gateway, tmp.path, "run-002");
    CHECK(result.manifest.errors.size() == 4);  // one per config
    for (const auto& e : result.manifest.errors)
        CHECK(e.find("empty_case") != std::string::npos);
    for (const auto cfg : kConfigOrder)
        CHECK(result.metrics.per_config.at(std::string(cfg)).size() == 1);
    CHECK(fs::exists(tmp.path / "corekg" / "good_case" / "graph.graphml"));
    CHECK_THROWS_AS(run_ablation({}, gateway, tmp.path, "run-003"), CorpusEmptyError);
}

TEST_CASE("key-value config parses sections and honors env overrides") {
    const std::string content =
        "# comment\n"
        "[pipeline]\n"
        "chunk_size = 200\n"
        "overlap = 25\n"
        "threshold = 80.5\n"
        "[llm]\n"
        "model = llama3.3:70b\n";
    const auto cfg = KeyValueConfig::parse(content);
    CHECK(cfg.get_size("pipeline", "chunk_size", 300) == 200);
    CHECK(cfg.get_size("pipeline", "overlap", 50) == 25);
    CHECK(cfg.get_double("pipeline", "threshold", 75.0) == Catch::Approx(80.5));
    CHECK(cfg.get("llm", "model") == "llama3.3:70b");
    CHECK(cfg.get("llm", "missing", "fallback") == "fallback");

    setenv("COREKG_PIPELINE_CHUNK_SIZE", "123", 1);
    CHECK(cfg.get_size("pipeline", "chunk_size", 300) == 123);
    unsetenv("COREKG_PIPELINE_CHUNK_SIZE");
    CHECK(cfg.get_size("pipeline", "chunk_size", 300) == 200);

    CHECK_THROWS_AS(KeyValueConfig::parse("[a]\nbroken line\n"), ConfigError);
}

TEST_CASE("degradation report derives percentages from the rounded averages") {
    AblationMetrics data;
    // Two synthetic cases per config with hand-checkable rates.
    data.per_config["graphrag"] = {CaseMetrics::from_counts("c1", "graphrag", 100, 40, 30),
                                   CaseMetrics::from_counts("c2", "graphrag", 100, 20, 10)};
    data.per_config["no_coref"] = {CaseMetrics::from_counts("c1", "no_coref", 100, 30, 15),
                                   CaseMetrics::from_counts("c2", "no_coref", 100, 20, 15)};
    data.per_config["no_structprompt"] = {
        CaseMetrics::from_counts("c1", "no_structprompt", 100, 25, 25),
        CaseMetrics::from_counts("c2", "no_structprompt", 100, 25, 25)};
    data.per_config["corekg"] = {CaseMetrics::from_counts("c1", "corekg", 100, 20, 10),
                                 CaseMetrics::from_counts("c2", "corekg", 100, 20, 10)};

    const auto rows = csv::parse(render_degradation_csv(data));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0][0] == "method");
    CHECK(rows[1][0] == "GraphRAG");
    CHECK(rows[1][1] == "30.00");  // (40 + 20) / 2 percent
    CHECK(rows[1][2] == "50.00");  // vs the 20.00 base
    CHECK(rows[1][3] == "20.00");
    CHECK(rows[1][4] == "100.00");
    CHECK(rows[4][0] == "CORE-KG");
    CHECK(rows[4][2] == "0.00");
    CHECK(rows[4][4] == "0.00");
}

TEST_CASE("duplication and noise report carries per-case rows plus the Avg row") {
    AblationMetrics data;
    for (const auto cfg : kConfigOrder) {
        data.per_config[std::string(cfg)] = {
            CaseMetrics::from_counts("c1", std::string(cfg), 10, 2, 1),
            CaseMetrics::from_counts("c2", std::string(cfg), 20, 4, 2)};
    }
    const auto rows = csv::parse(render_duplication_noise_csv(data));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].size() == 1 + 24);  // case column + 4 configs x 3 cols x 2 metrics
    CHECK(rows[1][0] == "c1");
    CHECK(rows[1][3] == "20.00");  // 2 of 10 duplicated
    CHECK(rows[3][0] == "Avg");
    CHECK(rows[3][1] == "15.00");  // mean total
    CHECK(rows[3][3] == "20.00");  // mean of 20% and 20%
}

TEST_CASE("aligned text report pads columns consistently") {
    const std::string csv_content = csv::make_row({"a", "long header", "x"}) +
                                    csv::make_row({"wide value", "b", "y"});
    const std::string aligned = csv_to_aligned_text(csv_content);
    const auto lines = text::split_lines(aligned);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].find("a           long header") != std::string::npos);
    CHECK(lines[1].find("wide value  b") != std::string::npos);
}
