#include "retrofit/error.hpp"
#include "retrofit/gateway.hpp"
#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace retrofit;
using retrofit::testing::TempDir;

namespace {

Statement labelled(std::string s, std::string p, std::string o, std::size_t ordinal) {
    Statement st;
    st.subject = Term::iri("http://ex.org/" + s);
    st.subject.label = s;
    st.predicate = Term::iri("http://ex.org/" + p);
    st.predicate.label = p;
    st.object = Term::iri("http://ex.org/" + o);
    st.object.label = o;
    st.ordinal = ordinal;
    return st;
}

std::vector<Statement> sample_statements() {
    return {labelled("Player", "playsGame", "Game", 0), labelled("Player", "hasUsername", "Username", 1),
            labelled("Game", "hasAchievement", "Achievement", 2)};
}

}  // namespace

TEST_CASE("prompt digest is SHA-256 over model and prompt") {
    // printf 'gpt-4\0hello' | sha256sum
    CHECK(prompt_digest("gpt-4", "hello") == "8cf237cbda38ad062b447fa12c475fe2f6a2f5b846b468d4d9b2d1aa1258eaf8");
    CHECK(prompt_digest("gpt-4", "hello") != prompt_digest("gpt-3.5-turbo", "hello"));
    CHECK(prompt_digest("ab", "c") != prompt_digest("a", "bc"));
}

TEST_CASE("question extraction") {
    const auto qs = extract_questions(
        "Sure! Here are some questions:\n\n"
        "1. What is the username of the player?\n"
        "2) \"Which game does a player play?\"\n"
        "- Does every player have a username? It seems likely.\n"
        "* **Is Multiplayer a class?**\n"
        "• What   is a   Game?\n"
        "This line has no question.\n"
        "3. ?\n");
    REQUIRE(qs.size() == 5);
    CHECK(qs[0] == "What is the username of the player?");
    CHECK(qs[1] == "Which game does a player play?");
    CHECK(qs[2] == "Does every player have a username?");
    CHECK(qs[3] == "Is Multiplayer a class?");
    CHECK(qs[4] == "What is a Game?");
    CHECK(extract_questions("").empty());
}

TEST_CASE("mock provider is deterministic and seed dependent") {
    const auto s = sample_statements()[0];
    CHECK(mock_generate(s, "P1", 7) == mock_generate(s, "P1", 7));
    std::set<std::string> variants;
    for (std::uint64_t seed = 0; seed < 20; ++seed) variants.insert(mock_generate(s, "P1", seed));
    CHECK(variants.size() > 5);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto qs = extract_questions(mock_generate(s, "P2", seed));
        CHECK(qs.size() >= 2);
        CHECK(qs.size() <= 5);
    }
}

TEST_CASE("response cache stores and reloads entries") {
    TempDir dir("cache");
    ResponseCache cache(dir.path());
    const auto digest = prompt_digest("m", "p");
    CHECK_FALSE(cache.load(digest).has_value());
    cache.store(digest, {"m", "1. What?\n", true});
    const auto hit = cache.load(digest);
    REQUIRE(hit.has_value());
    CHECK(hit->text == "1. What?\n");
    CHECK(hit->truncated);
    CHECK(std::filesystem::exists(dir.path() / digest.substr(0, 2) / (digest + ".json")));
}

TEST_CASE("gateway serves repeated prompts from the cache") {
    TempDir dir("gw");
    const auto statements = sample_statements();
    const std::vector<PromptTemplate> templates{builtin_template("P1"), builtin_template("P2")};
    const std::vector<ProviderConfig> providers{ProviderConfig::mock(3), ProviderConfig::mock(3, "mock-b", "b")};

    Gateway first(dir.path());
    const auto a = generate_all(statements, templates, providers, first, 3);
    CHECK(a.failures.empty());
    CHECK(a.records.size() == 12);
    CHECK(first.provider_calls() == 12);
    CHECK(first.cache_hits() == 0);

    Gateway second(dir.path());
    const auto b = generate_all(statements, templates, providers, second, 1);
    CHECK(second.provider_calls() == 0);
    CHECK(second.cache_hits() == 12);
    REQUIRE(b.records.size() == a.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(b.records[i].questions == a.records[i].questions);
        CHECK(b.records[i].from_cache);
        CHECK(b.records[i].statement_ordinal == a.records[i].statement_ordinal);
        CHECK(b.records[i].template_id == a.records[i].template_id);
        CHECK(b.records[i].provider_id == a.records[i].provider_id);
    }

    // a different seed is a different identity and misses the cache
    Gateway third(dir.path());
    const std::vector<ProviderConfig> reseeded{ProviderConfig::mock(4)};
    generate_all(statements, templates, reseeded, third, 2);
    CHECK(third.provider_calls() == 6);
}

TEST_CASE("generation order is independent of parallelism") {
    const auto statements = sample_statements();
    const std::vector<PromptTemplate> templates{builtin_template("P1"), builtin_template("P3")};
    const std::vector<ProviderConfig> providers{ProviderConfig::mock(11)};
    Gateway g1;
    Gateway g4;
    const auto serial = generate_all(statements, templates, providers, g1, 1);
    const auto parallel = generate_all(statements, templates, providers, g4, 4);
    REQUIRE(serial.records.size() == parallel.records.size());
    for (std::size_t i = 0; i < serial.records.size(); ++i) {
        CHECK(serial.records[i].questions == parallel.records[i].questions);
    }
    CHECK(serial.records[0].template_id == "P1");
    CHECK(serial.records[1].template_id == "P3");
    CHECK(serial.records[2].statement_ordinal == 1);
}

TEST_CASE("a failing provider fails only its own cells") {
    const auto statements = sample_statements();
    const std::vector<PromptTemplate> templates{builtin_template("P1")};
    auto broken = ProviderConfig::preset("gpt-4");
    broken.provider_id = "nokey";
    broken.api_key_env = "RETROFIT_TEST_UNSET_VARIABLE";
    const std::vector<ProviderConfig> providers{ProviderConfig::mock(1), broken};
    Gateway gateway;
    const auto result = generate_all(statements, templates, providers, gateway, 2);
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].provider_id == "nokey");
    CHECK(result.failures[0].message.find("RETROFIT_TEST_UNSET_VARIABLE") != std::string::npos);
    CHECK(result.records.size() == 3);
}

TEST_CASE("provider presets and validation") {
    const auto gpt4 = ProviderConfig::preset("gpt-4");
    CHECK(gpt4.max_tokens == 8192);
    CHECK(ProviderConfig::preset("gpt-3.5-turbo").max_tokens == 4096);
    CHECK(ProviderConfig::preset("Llama-2-70b-chat").max_tokens == 4096);
    CHECK(gpt4.credential_variable() == "RETROFIT_API_KEY_GPT_4");
    CHECK_NOTHROW(gpt4.validate());
    CHECK_THROWS_AS(ProviderConfig::preset("Llama-2-70b-chat").validate(), ConfigError);
    CHECK_NOTHROW(ProviderConfig::mock(0).validate());
    auto bad = ProviderConfig::mock(0);
    bad.max_tokens = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
