#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <random>

#include "corekg/metrics.hpp"
#include "oracles.hpp"

using namespace corekg;

namespace {

RawEntityRecord entity(const std::string& name, EntityType type, int mentions = 1) {
    RawEntityRecord e;
    e.name = name;
    e.normalized_name = text::normalize_name(name);
    e.entity_type = type;
    e.description = "d";
    e.chunk_id = mentions;  // repurposed below
    return e;
}

KnowledgeGraph graph_of(const std::vector<std::pair<std::string, EntityType>>& specs) {
    std::vector<RawEntityRecord> entities;
    for (const auto& [name, type] : specs) entities.push_back(entity(name, type));
    return build_graph(entities, {}, "c", "corekg");
}

std::string random_string(std::mt19937& rng, std::size_t max_len) {
    static const std::string alphabet = "AB C12-";
    const std::size_t len = rng() % (max_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
    return s;
}

}  // namespace

TEST_CASE("indel_ratio basics") {
    CHECK(indel_ratio("Stone", "Stone") == 100.0);
    CHECK(indel_ratio("stone", "STONE") == 100.0);  // normalization first
    CHECK(indel_ratio("", "") == 100.0);
    CHECK(indel_ratio("AB", "CD") == 0.0);
    CHECK(indel_ratio("abc", "") == 0.0);
    // LCS of I-35 and INTERSTATE 35 is "I35": 200 * 3 / (4 + 13).
    CHECK(indel_ratio("I-35", "INTERSTATE 35") == Catch::Approx(200.0 * 3 / 17));
}

TEST_CASE("indel_ratio is symmetric and bounded") {
    std::mt19937 rng(7);
    for (int i = 0; i < 200; ++i) {
        const std::string a = random_string(rng, 20);
        const std::string b = random_string(rng, 20);
        const double r = indel_ratio(a, b);
        CHECK(r >= 0.0);
        CHECK(r <= 100.0);
        CHECK(r == Catch::Approx(indel_ratio(b, a)));
    }
}

TEST_CASE("indel_ratio matches the reference edit distance implementation") {
    std::mt19937 rng(20240812);
    for (int i = 0; i < 500; ++i) {
        const std::string a = random_string(rng, 30);
        const std::string b = random_string(rng, 30);
        CHECK(indel_ratio(a, b) == Catch::Approx(oracles::indel_ratio(a, b)).margin(1e-9));
    }
}

TEST_CASE("partial_ratio basics") {
    CHECK(partial_ratio("MAXIMA", "NISSAN MAXIMA") == 100.0);
    CHECK(partial_ratio("NISSAN MAXIMA", "MAXIMA") == 100.0);  // symmetric
    CHECK(partial_ratio("", "anything") == 100.0);
    // Best substring of NISSAN MAXIM for MAXIMA is MAXIM: 200 * 5 / (6 + 5).
    CHECK(partial_ratio("MAXIMA", "NISSAN MAXIM") == Catch::Approx(1000.0 / 11));
}

TEST_CASE("partial_ratio dominates indel_ratio and matches the exhaustive oracle") {
    std::mt19937 rng(20240813);
    for (int i = 0; i < 200; ++i) {
        const std::string a = random_string(rng, 16);
        const std::string b = random_string(rng, 16);
        const double p = partial_ratio(a, b);
        CHECK(p >= indel_ratio(a, b) - 1e-9);
        CHECK(p == Catch::Approx(oracles::partial_ratio(a, b)).margin(1e-9));
    }
}

TEST_CASE("cluster_duplicates groups near-duplicate names within a type") {
    const auto g = graph_of({{"Interstate 35", EntityType::Routes},
                             {"Interstate Highway 35", EntityType::Routes},
                             {"Laredo", EntityType::Location}});
    const auto clusters = cluster_duplicates(g, 75.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].entity_type == EntityType::Routes);
    CHECK(clusters[0].members.size() == 2);
    CHECK(duplicate_count(clusters) == 1);
}

TEST_CASE("clustering never crosses entity types") {
    const auto g = graph_of({{"Laredo", EntityType::Location},
                             {"Laredo", EntityType::Organization}});
    CHECK(cluster_duplicates(g, 75.0).empty());
}

TEST_CASE("threshold must lie in (0, 100]") {
    const auto g = graph_of({{"A", EntityType::Person}});
    CHECK_THROWS_AS(cluster_duplicates(g, 0.0), ConfigError);
    CHECK_THROWS_AS(cluster_duplicates(g, -5.0), ConfigError);
    CHECK_THROWS_AS(cluster_duplicates(g, 100.5), ConfigError);
    CHECK_NOTHROW(cluster_duplicates(g, 100.0));
}

TEST_CASE("raising the threshold never increases the duplicate count") {
    std::mt19937 rng(99);
    const std::vector<std::string> stems = {"Interstate 35", "I-35", "Interstate Highway 35",
                                            "Highway 59",    "US 59", "Laredo", "Laredo Texas"};
    for (int iter = 0; iter < 20; ++iter) {
        std::vector<std::pair<std::string, EntityType>> specs;
        const std::size_t n = 2 + rng() % 6;
        for (std::size_t i = 0; i < n; ++i)
            specs.push_back({stems[rng() % stems.size()] + (rng() % 2 ? " X" : ""),
                             rng() % 2 ? EntityType::Routes : EntityType::Location});
        const auto g = graph_of(specs);
        std::size_t prev = std::numeric_limits<std::size_t>::max();
        for (double threshold : {60.0, 75.0, 90.0}) {
            const std::size_t count = duplicate_count(cluster_duplicates(g, threshold));
            CHECK(count <= prev);
            prev = count;
        }
    }
}

TEST_CASE("cluster representative has the most mentions") {
    std::vector<RawEntityRecord> entities;
    auto add = [&](const std::string& name, int chunk) {
        auto e = entity(name, EntityType::Routes);
        e.chunk_id = chunk;
        entities.push_back(e);
    };
    add("Interstate 35", 0);
    add("Interstate 35", 1);
    add("Interstate Highway 35", 2);
    const auto g = build_graph(entities, {}, "c", "corekg");
    const auto clusters = cluster_duplicates(g, 75.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].representative == "INTERSTATE 35::ROUTES");
}

TEST_CASE("override directives parse and malformed lines are errors") {
    const std::string content =
        "# comment line\n"
        "\n"
        "merge A::ROUTES\tB::ROUTES|C::ROUTES\n"
        "split D::PERSON\n"
        "noisy E::PERSON\n"
        "clean F::LOCATION\n";
    const auto o = Overrides::parse(content);
    REQUIRE(o.merges.size() == 1);
    CHECK(o.merges[0] == std::vector<std::string>{"A::ROUTES", "B::ROUTES", "C::ROUTES"});
    CHECK(o.splits == std::vector<std::string>{"D::PERSON"});
    CHECK(o.noisy.count("E::PERSON") == 1);
    CHECK(o.clean.count("F::LOCATION") == 1);

    CHECK_THROWS_AS(Overrides::parse("merge OnlyOne::ROUTES\n"), OverrideError);
    CHECK_THROWS_AS(Overrides::parse("split A::X\tB::Y\n"), OverrideError);
    CHECK_THROWS_AS(Overrides::parse("frobnicate A::X\n"), OverrideError);
}

TEST_CASE("merge overrides join clusters; split overrides remove members") {
    const auto g = graph_of({{"Interstate 35", EntityType::Routes},
                             {"Interstate Highway 35", EntityType::Routes},
                             {"I-35", EntityType::Routes}});
    // I-35 does not reach the 75 threshold against either long form.
    CHECK(duplicate_count(cluster_duplicates(g, 75.0)) == 1);

    Overrides merge_override;
    merge_override.merges = {{"I-35::ROUTES", "INTERSTATE 35::ROUTES"}};
    const auto merged = cluster_duplicates(g, 75.0, merge_override);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].members.size() == 3);
    CHECK(duplicate_count(merged) == 2);

    Overrides split_override;
    split_override.splits = {"INTERSTATE HIGHWAY 35::ROUTES"};
    const auto split = cluster_duplicates(g, 75.0, split_override);
    CHECK(duplicate_count(split) == 0);
}

TEST_CASE("overrides referencing unknown ids or crossing types are errors") {
    const auto g = graph_of({{"Interstate 35", EntityType::Routes},
                             {"Laredo", EntityType::Location}});
    Overrides unknown;
    unknown.merges = {{"NOPE::ROUTES", "INTERSTATE 35::ROUTES"}};
    CHECK_THROWS_AS(cluster_duplicates(g, 75.0, unknown), OverrideError);

    Overrides cross;
    cross.merges = {{"INTERSTATE 35::ROUTES", "LAREDO::LOCATION"}};
    CHECK_THROWS_AS(cluster_duplicates(g, 75.0, cross), OverrideError);
}

TEST_CASE("noise scoring matches lexicon terms as whole words only") {
    const auto g = graph_of({{"District Court", EntityType::Organization},
                             {"Courtney Smith", EntityType::Person},
                             {"Court of Appeals", EntityType::Organization},
                             {"Laredo", EntityType::Location}});
    const auto result = score_noise(g, {"court", "appeals"});
    CHECK(result.noisy_count == 2);
    CHECK(std::find(result.noisy_ids.begin(), result.noisy_ids.end(),
                    "COURTNEY SMITH::PERSON") == result.noisy_ids.end());
}

TEST_CASE("noisy and clean overrides adjust the lexicon verdicts") {
    const auto g = graph_of({{"District Court", EntityType::Organization},
                             {"Laredo", EntityType::Location}});
    Overrides o;
    o.clean.insert("DISTRICT COURT::ORGANIZATION");
    o.noisy.insert("LAREDO::LOCATION");
    const auto result = score_noise(g, {"court"}, o);
    REQUIRE(result.noisy_count == 1);
    CHECK(result.noisy_ids[0] == "LAREDO::LOCATION");

    Overrides bad;
    bad.noisy.insert("MISSING::PERSON");
    CHECK_THROWS_AS(score_noise(g, {"court"}, bad), OverrideError);
}

TEST_CASE("default lexicon covers the obvious legal boilerplate") {
    const auto lexicon = default_noise_lexicon();
    for (const std::string term : {"court", "jury", "government", "prosecution"})
        CHECK(std::find(lexicon.begin(), lexicon.end(), term) != lexicon.end());
}

TEST_CASE("case metrics compute rates from counts") {
    const auto m = CaseMetrics::from_counts("c1", "corekg", 32, 8, 4, 2.5);
    CHECK(m.duplication_rate == Catch::Approx(0.25));
    CHECK(m.noise_rate == Catch::Approx(0.125));
    CHECK(m.rn_ratio == 2.5);
    CHECK_THROWS_AS(CaseMetrics::from_counts("c1", "corekg", 0, 0, 0), EmptyGraphError);
}

TEST_CASE("macro_average is the arithmetic mean over cases") {
    const std::vector<CaseMetrics> cases = {
        CaseMetrics::from_counts("a", "corekg", 10, 2, 1, 1.0),
        CaseMetrics::from_counts("b", "corekg", 20, 10, 4, 3.0),
    };
    const auto avg = macro_average(cases);
    CHECK(avg.total_nodes == Catch::Approx(15.0));
    CHECK(avg.duplicate_count == Catch::Approx(6.0));
    CHECK(avg.duplication_rate == Catch::Approx((0.2 + 0.5) / 2));
    CHECK(avg.noise_rate == Catch::Approx((0.1 + 0.2) / 2));
    CHECK(avg.rn_ratio == Catch::Approx(2.0));
    CHECK_THROWS_AS(macro_average({}), ConfigError);
}

TEST_CASE("relative degradation is a signed fraction of the base") {
    CHECK(relative_degradation(30.0, 20.0) == Catch::Approx(0.5));
    CHECK(relative_degradation(15.0, 20.0) == Catch::Approx(-0.25));
    CHECK(relative_degradation(20.0, 20.0) == 0.0);
    CHECK_THROWS_AS(relative_degradation(1.0, 0.0), InvalidBaseError);
    CHECK_THROWS_AS(relative_degradation(1.0, -2.0), InvalidBaseError);
}

TEST_CASE("percent formatting rounds to two decimals") {
    CHECK(format_percent(0.1234) == "12.34");
    CHECK(format_percent(0.5) == "50.00");
    CHECK(format2(3.14159) == "3.14");
}
