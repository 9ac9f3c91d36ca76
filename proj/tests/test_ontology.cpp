#include "retrofit/error.hpp"
#include "retrofit/ontology.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace retrofit;
using retrofit::testing::data_path;

namespace {

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const char *const kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

}  // namespace

TEST_CASE("parse a single N-Triples statement") {
    const auto st = parse_ntriples("<http://ex.org/vg#Player> <http://ex.org/vg#playsGame> <http://ex.org/vg#Game> .\n");
    REQUIRE(st.size() == 1);
    CHECK(st[0].subject == Term::iri("http://ex.org/vg#Player"));
    CHECK(st[0].predicate.lexical == "http://ex.org/vg#playsGame");
    CHECK(st[0].object.kind == TermKind::iri);
}

TEST_CASE("N-Triples literals, escapes and comments") {
    const auto st = parse_ntriples(
        "# leading comment\n"
        "<http://ex.org/a> <http://ex.org/p> \"say \\\"hi\\\"\\n\" . # trailing\n"
        "<http://ex.org/a> <http://ex.org/p> \"caf\\u00E9\"@fr .\n"
        "<http://ex.org/a> <http://ex.org/p> \"7\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
        "\n");
    REQUIRE(st.size() == 3);
    CHECK(st[0].object.lexical == "say \"hi\"\n");
    CHECK(st[1].object.lexical == "caf\xC3\xA9");
    CHECK(st[1].object.language == "fr");
    CHECK(st[2].object.datatype == "http://www.w3.org/2001/XMLSchema#integer");
}

TEST_CASE("duplicate statements collapse at parse time") {
    const auto st = parse_ntriples("<http://e/a> <http://e/p> <http://e/b> .\n<http://e/a> <http://e/p> <http://e/b> .\n");
    CHECK(st.size() == 1);
}

TEST_CASE("parse errors carry line and column") {
    try {
        parse_ntriples("<http://e/a> <http://e/p> <http://e/b> .\n<http://e/a> <http://e/p> .\n");
        FAIL("expected a parse error");
    } catch (const ParseError &e) {
        CHECK(e.line() == 2);
        CHECK(e.column() > 1);
    }
    CHECK_THROWS_AS(parse_ntriples("<http://e/a> <http://e/p> <http://e/b>\n"), ParseError);
    CHECK_THROWS_AS(parse_ntriples("<http://e/a> <http://e/p> \"open\n"), ParseError);
    CHECK_THROWS_AS(parse_ntriples("\"lit\" <http://e/p> <http://e/b> .\n"), ParseError);
}

TEST_CASE("N-Triples round trip on a generated corpus") {
    const auto corpus = retrofit::testing::ntriples_corpus(200);
    const auto first = parse_ntriples(corpus);
    REQUIRE(first.size() == 200);
    const auto text = to_ntriples(first);
    CHECK(text == corpus);
    CHECK(parse_ntriples(text) == first);
}

TEST_CASE("label derivation") {
    CHECK(derive_label("http://ex.org/vg#Player") == "Player");
    CHECK(derive_label("http://ex.org/vg/hasUsername") == "hasUsername");
    CHECK(derive_label("http://ex.org/vg/Space%20Raiders") == "Space Raiders");
    CHECK_THROWS_AS(derive_label("http://ex.org/vg#"), LabelError);
    CHECK_THROWS_AS(derive_label("http://ex.org/vg/"), LabelError);
}

TEST_CASE("opaque label heuristic") {
    CHECK(is_opaque_label("Q42"));
    CHECK(is_opaque_label("P31"));
    CHECK(is_opaque_label("123456"));
    CHECK(is_opaque_label("550e8400-e29b-41d4-a716-446655440000"));
    CHECK_FALSE(is_opaque_label("Player"));
    CHECK_FALSE(is_opaque_label("MultiplayerAchievement"));
    CHECK_FALSE(is_opaque_label("level2"));
}

TEST_CASE("blank-node exclusion counts") {
    const auto set = ingest_file(data_path("blank_nodes.nt"));
    CHECK(set.counts.parsed == 5);
    CHECK(set.counts.excluded_blank == 3);
    CHECK(set.counts.excluded_opaque == 0);
    CHECK(set.counts.kept == 2);
    REQUIRE(set.statements.size() == 2);
    CHECK(set.statements[0].ordinal == 0);
    CHECK(set.statements[1].ordinal == 1);
    for (const auto &s : set.statements) {
        CHECK(s.subject.kind != TermKind::blank);
        CHECK(s.object.kind != TermKind::blank);
    }
}

TEST_CASE("opaque-name exclusion counts") {
    const auto set = ingest_file(data_path("opaque_names.nt"));
    CHECK(set.counts.parsed == 6);
    CHECK(set.counts.excluded_blank == 0);
    CHECK(set.counts.excluded_opaque == 4);
    CHECK(set.counts.kept == 2);
    CHECK(set.statements[0].subject.label == "Player");
    CHECK(set.statements[1].subject.label == "Alice");
}

TEST_CASE("kept statements have labels on every term") {
    const auto set = ingest_file(data_path("videogame.nt"));
    CHECK(set.counts.kept == 20);
    for (const auto &s : set.statements) {
        CHECK(s.subject.label.has_value());
        CHECK(s.predicate.label.has_value());
        CHECK(s.object.label.has_value());
    }
    CHECK(set.statements.back().object.label == "alice_01");
}

TEST_CASE("Turtle fixture equals its N-Triples twin") {
    const auto nt = parse_ntriples(slurp(data_path("videogame.nt")));
    const auto ttl = parse_turtle(slurp(data_path("videogame.ttl")));
    CHECK(nt.size() == 20);
    CHECK(ttl == nt);
    CHECK(ingest_file(data_path("videogame.ttl")).statements == ingest_file(data_path("videogame.nt")).statements);
}

TEST_CASE("Turtle subset features") {
    const auto st = parse_turtle(R"(
        @prefix ex: <http://ex.org/> .
        ex:a a ex:Thing ;
             ex:name "A", 'B'@en ;
             ex:count 42 ;
             ex:ratio 1.5 ;
             ex:flag true ;
             ex:note """multi
line""" .
    )");
    REQUIRE(st.size() == 7);
    CHECK(st[0].predicate.lexical == kRdfType);
    CHECK(st[2].object.language == "en");
    CHECK(st[3].object.datatype == "http://www.w3.org/2001/XMLSchema#integer");
    CHECK(st[4].object.datatype == "http://www.w3.org/2001/XMLSchema#decimal");
    CHECK(st[5].object.datatype == "http://www.w3.org/2001/XMLSchema#boolean");
    CHECK(st[6].object.lexical == "multi\nline");
}

TEST_CASE("Turtle constructs outside the subset are rejected") {
    CHECK_THROWS_AS(ingest_file(data_path("unsupported_collection.ttl")), UnsupportedConstructError);
    CHECK_THROWS_AS(parse_turtle("@prefix ex: <http://e/> .\nex:a ex:b [ ex:c ex:d ] .\n"), UnsupportedConstructError);
    CHECK_THROWS_AS(parse_turtle("@base <http://e/> .\n"), UnsupportedConstructError);
    CHECK_THROWS_AS(parse_turtle("ex:a ex:b ex:c .\n"), ParseError);
}

TEST_CASE("format selection") {
    CHECK(format_from_extension("x/onto.nt") == RdfFormat::ntriples);
    CHECK(format_from_extension("onto.TTL") == RdfFormat::turtle);
    CHECK_FALSE(format_from_extension("onto.owl").has_value());
    CHECK(parse_format_name("turtle") == RdfFormat::turtle);
    CHECK_THROWS_AS(ingest_file(data_path("missing.nt")), Error);
}
