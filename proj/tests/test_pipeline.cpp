#include "retrofit/csv.hpp"
#include "retrofit/error.hpp"
#include "retrofit/pipeline.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <set>

using namespace retrofit;
using retrofit::testing::data_path;
using retrofit::testing::TempDir;

namespace {

RunConfig mock_run(const std::filesystem::path &out, std::initializer_list<const char *> models,
                   std::vector<std::string> templates = {"P1", "P2"}) {
    RunConfig cfg;
    cfg.ontology_paths = {data_path("videogame.nt")};
    cfg.templates = std::move(templates);
    for (const char *m : models) cfg.providers.push_back(ProviderConfig::mock(7, m, m));
    cfg.output_dir = out;
    cfg.parallelism = 3;
    return cfg;
}

std::size_t line_count(const std::string &s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("run configuration JSON") {
    const auto cfg = RunConfig::parse_json(R"({
        "ontologies": ["a.nt"], "format": "turtle", "templates": ["P3"], "seed": 11,
        "providers": [{"kind": "mock", "model": "gpt-4"}, {"kind": "http", "model": "gpt-3.5-turbo", "id": "OPENAI"}],
        "filtration": {"dedup_threshold": 85, "strictness": "strict"},
        "matcher": {"threshold": 0.6, "dimension": 256},
        "design_cqs": "d.txt", "output_dir": "out", "parallelism": 2, "global_dedup": true
    })");
    CHECK(cfg.ontology_paths == std::vector<std::string>{"a.nt"});
    CHECK(cfg.format == RdfFormat::turtle);
    CHECK(cfg.templates == std::vector<std::string>{"P3"});
    REQUIRE(cfg.providers.size() == 2);
    CHECK(cfg.providers[0].is_mock());
    CHECK(cfg.providers[0].seed == 11);
    CHECK(cfg.providers[0].model_name == "gpt-4");
    CHECK(cfg.providers[1].provider_id == "OPENAI");
    CHECK(cfg.providers[1].max_tokens == 4096);
    CHECK(cfg.filtration.dedup_ratio_threshold == 85);
    CHECK(cfg.filtration.strictness == Strictness::strict);
    CHECK(cfg.matcher.similarity_threshold == 0.6);
    CHECK(cfg.matcher.dimension == 256);
    CHECK(cfg.design_cq_path == "d.txt");
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.parallelism == 2);
    CHECK(cfg.global_dedup);

    CHECK_THROWS_AS(RunConfig::parse_json(R"({"ontology": []})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_json(R"({"providers": [{"kind": "mock", "temp": 1}]})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_json(R"({"matcher": {"threshhold": 0.5}})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_json(R"({"filtration": {"strictness": "harsh"}})"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_json("[1]"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse_json(R"({"providers": [{"kind": "grpc"}]})"), ConfigError);
}

TEST_CASE("generation config validation") {
    TempDir tmp("validate");
    auto cfg = mock_run(tmp.path(), {"m1", "m1"});
    CHECK_THROWS_AS(cfg.validate_for_generation(), ConfigError);
    cfg = mock_run(tmp.path(), {"m/1", "m:1"});
    CHECK_THROWS_AS(cfg.validate_for_generation(), ConfigError);
    cfg = mock_run(tmp.path(), {"m1"});
    cfg.templates.clear();
    CHECK_THROWS_AS(cfg.validate_for_generation(), ConfigError);
    cfg = mock_run(tmp.path(), {});
    CHECK_THROWS_AS(cfg.validate_for_generation(), ConfigError);
}

TEST_CASE("output file names") {
    CHECK(safe_file_component("Llama-2-70b-chat") == "Llama-2-70b-chat");
    CHECK(safe_file_component("org/model:v1") == "org_model_v1");
    CHECK(questions_file_name("P1", "gpt-3.5-turbo") == "questions_P1_gpt-3.5-turbo.csv");

    RunConfig cfg;
    cfg.output_dir = "out";
    cfg.ontology_paths = {"x/videogame.nt"};
    CHECK(ontology_output_dir(cfg, 0) == std::filesystem::path("out"));
    cfg.ontology_paths.push_back("y/dem care.ttl");
    CHECK(ontology_output_dir(cfg, 0) == std::filesystem::path("out") / "videogame");
    CHECK(ontology_output_dir(cfg, 1) == std::filesystem::path("out") / "dem_care");
}

TEST_CASE("extract writes one row per kept statement") {
    TempDir tmp("extract");
    RunConfig cfg;
    cfg.ontology_paths = {data_path("videogame.nt"), data_path("blank_nodes.nt")};
    cfg.output_dir = tmp.path();
    const auto res = run_extract(cfg);
    REQUIRE(res.files.size() == 2);
    CHECK(line_count(read_file(res.files[0])) == 1 + 20);
    CHECK(line_count(read_file(res.files[1])) == 1 + 2);
    CHECK(read_file(res.files[0]).starts_with("ordinal\tsubject_label\t"));
    CHECK(res.files[1] == tmp / "blank_nodes" / "statements.tsv");
}

TEST_CASE("two templates by three providers give six question files") {
    TempDir tmp("grid");
    const auto cfg = mock_run(tmp.path(), {"gpt-3.5-turbo", "gpt-4", "Llama-2-70b-chat"});
    const auto res = run_generate(cfg);
    CHECK(res.ok());
    REQUIRE(res.files.size() == 6);
    std::set<std::string> names;
    for (const auto &f : res.files) {
        names.insert(f.filename().string());
        const auto text = read_file(f);
        CHECK(text.starts_with("Questions\n"));
        CHECK(line_count(text) > 1);
        auto side = f;
        side.replace_extension(".json");
        const auto j = nlohmann::json::parse(read_file(side));
        CHECK(j["n_triples"] == 20);
        CHECK(j["n_candidates"].get<std::size_t>() + 1 == line_count(text));
        CHECK(j["n_questions"].get<std::size_t>() >= j["n_candidates"].get<std::size_t>());
    }
    CHECK(names.contains("questions_P1_gpt-3.5-turbo.csv"));
    CHECK(names.contains("questions_P2_Llama-2-70b-chat.csv"));
    CHECK(res.provider_calls == 6 * 20);
}

TEST_CASE("generation is byte-identical across runs and cache states") {
    TempDir a("det-a");
    TempDir b("det-b");
    TempDir cache("det-cache");
    auto cfg_a = mock_run(a.path(), {"m1", "m2"}, {"P1", "P2", "P3"});
    auto cfg_b = mock_run(b.path(), {"m1", "m2"}, {"P1", "P2", "P3"});
    cfg_b.cache_dir = cache.path();
    cfg_b.parallelism = 1;
    run_generate(cfg_a);
    run_generate(cfg_b);
    const auto again = run_generate(cfg_b);
    CHECK(again.cache_hits == 2 * 3 * 20);
    CHECK(again.provider_calls == 0);
    for (const auto &f : again.files) {
        CHECK(read_file(f) == read_file(a / f.filename().string()));
    }
    cfg_a.seed = 0;
    cfg_a.providers = {ProviderConfig::mock(8, "m1", "m1")};
    TempDir c("det-c");
    cfg_a.output_dir = c.path();
    run_generate(cfg_a);
    CHECK(read_file(c / "questions_P1_m1.csv") != read_file(a / "questions_P1_m1.csv"));
}

TEST_CASE("a failing provider does not stop the other cells") {
    TempDir tmp("fail");
    auto cfg = mock_run(tmp.path(), {"m1"}, {"P1"});
    auto bad = ProviderConfig::preset("gpt-4");
    bad.endpoint_url = "http://127.0.0.1:9/v1/chat/completions";
    bad.api_key_env = "RETROFIT_TEST_UNSET_VARIABLE";
    cfg.providers.push_back(bad);
    const auto res = run_generate(cfg);
    CHECK_FALSE(res.ok());
    CHECK(res.files.size() == 1);
    CHECK(std::filesystem::exists(tmp / "questions_P1_m1.csv"));
    CHECK_FALSE(std::filesystem::exists(tmp / "questions_P1_gpt-4.csv"));
}

TEST_CASE("run_filter rewrites a questions file") {
    TempDir tmp("filter");
    write_file_atomic(tmp / "in.csv",
                      "Questions\nWhat is a Game?\nwhat is a game?\nIs Game a class?\n\"Which game, if any, is played?\"\n");
    const auto out = run_filter(tmp / "in.csv", tmp / "out.csv", FiltrationConfig{});
    CHECK(out.size() == 4);
    CHECK(read_questions_csv(tmp / "out.csv") ==
          std::vector<std::string>{"What is a Game?", "Which game, if any, is played?"});
}

TEST_CASE("evaluation from a counts fixture") {
    TempDir tmp("fixture");
    RunConfig cfg;
    cfg.output_dir = tmp.path();
    cfg.counts_fixture = data_path("counts_fixture.json");
    const auto res = run_evaluate(cfg);
    CHECK(res.sections == 1);
    const auto j = nlohmann::json::parse(read_file(res.report_json));
    const auto &s = j["sections"][0];
    CHECK(s["metrics_rounded"]["precision"].get<double>() == doctest::Approx(0.5440));
    CHECK(s["metrics_rounded"]["recall"].get<double>() == doctest::Approx(0.9623));
    CHECK(s["metrics_rounded"]["f1"].get<double>() == doctest::Approx(0.6951));
    CHECK(s["mean_q_per_triple_rounded"].get<double>() == doctest::Approx(1.51));
    const auto rows = parse_csv(read_file(res.summary_csv));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][0] == "Ontology");
    CHECK(rows[1][3] == "549");
    CHECK(rows[1][4] == "1.51");
    CHECK(rows[1][7] == "0.5440");
    CHECK(rows[1][11] == "12%");
    const auto text = render_report(read_file(res.report_json));
    CHECK(text.find("0.6951") != std::string::npos);
}

TEST_CASE("candidates equal to the design set score one everywhere") {
    TempDir tmp("identity");
    const auto design = DesignCQSet::load(data_path("videogame_design_cqs.txt"));
    write_file_atomic(tmp / "questions_P1_oracle.csv", questions_csv(design.questions));
    RunConfig cfg;
    cfg.output_dir = tmp.path();
    cfg.ontology_paths = {data_path("videogame.nt")};
    cfg.design_cq_path = data_path("videogame_design_cqs.txt");
    run_evaluate(cfg);
    const auto j = nlohmann::json::parse(read_file(tmp / "report.json"));
    REQUIRE(j["sections"].size() == 1);
    const auto &s = j["sections"][0];
    CHECK(s["model"] == "oracle");
    CHECK(s["counts"]["n_triples"] == 20);
    CHECK(s["metrics"]["precision"].get<double>() == 1.0);
    CHECK(s["metrics"]["recall"].get<double>() == 1.0);
    CHECK(s["metrics"]["f1"].get<double>() == 1.0);
    CHECK(s["unmatched_design"].empty());
    CHECK(s["unmatched_stats"]["mean"].is_null());
}

TEST_CASE("evaluation after mock generation categorises misses") {
    TempDir tmp("evaluate");
    auto cfg = mock_run(tmp.path(), {"m1"}, {"P1"});
    cfg.design_cq_path = data_path("videogame_design_cqs.txt");
    run_generate(cfg);
    const auto res = run_evaluate(cfg);
    CHECK(res.sections == 1);
    const auto j = nlohmann::json::parse(read_file(res.report_json));
    const auto &s = j["sections"][0];
    CHECK(s["template"] == "P1");
    for (const auto &u : s["unmatched_design"]) {
        const auto q = u["question"].get<std::string>();
        const auto cats = u["categories"].get<std::vector<std::string>>();
        if (q.find("UNIKL") != std::string::npos) CHECK(cats == std::vector<std::string>{"ungrounded"});
        if (q.find("top 3") != std::string::npos) CHECK(std::count(cats.begin(), cats.end(), "aggregation") == 1);
    }
    const auto first = read_file(res.report_json);
    run_evaluate(cfg);
    CHECK(read_file(res.report_json) == first);
}

TEST_CASE("label-based evaluation") {
    TempDir tmp("labels");
    write_file_atomic(tmp / "questions_P1_m.csv",
                      questions_csv(std::vector<std::string>{"What is the username of the player?",
                                                             "Is Multiplayer a class?"}));
    RunConfig cfg;
    cfg.output_dir = tmp.path();
    cfg.ontology_paths = {data_path("videogame.nt")};
    cfg.validation_labels = data_path("tiny_labels.csv");
    run_evaluate(cfg);
    const auto j = nlohmann::json::parse(read_file(tmp / "report.json"));
    CHECK(j["mode"] == "labels");
    CHECK(j["sections"][0]["label_precision"].get<double>() == 0.5);
    CHECK_FALSE(j["sections"][0].contains("metrics"));

    RunConfig none;
    none.output_dir = tmp.path();
    CHECK_THROWS_AS(run_evaluate(none), ConfigError);
}
