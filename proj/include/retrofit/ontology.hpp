#pragma once

// RDF statement ingestion: N-Triples and a Turtle subset, readable-label
// derivation, and blank-node / opaque-name exclusion.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace retrofit {

enum class TermKind { iri, literal, blank };

struct Term {
    TermKind kind = TermKind::iri;
    /// Full IRI text, literal lexical form, or blank-node id (without "_:").
    std::string lexical;
    /// Readable local name for IRIs; lexical form for literals; absent for blank nodes
    /// and for IRIs without a derivable local name.
    std::optional<std::string> label;
    /// Literal datatype IRI (empty for plain and language-tagged literals).
    std::string datatype;
    /// Literal language tag (empty when absent).
    std::string language;

    static Term iri(std::string value);
    static Term literal(std::string lexical, std::string datatype = {}, std::string language = {});
    static Term blank(std::string id);

    friend bool operator==(const Term &, const Term &) = default;
};

struct Statement {
    Term subject;
    Term predicate;
    Term object;
    std::size_t ordinal = 0;

    friend bool operator==(const Statement &, const Statement &) = default;
};

struct IngestCounts {
    std::size_t parsed = 0;
    std::size_t excluded_blank = 0;
    std::size_t excluded_opaque = 0;
    std::size_t kept = 0;

    friend bool operator==(const IngestCounts &, const IngestCounts &) = default;
};

struct StatementSet {
    std::vector<Statement> statements;
    std::string source_id;
    IngestCounts counts;
};

enum class RdfFormat { ntriples, turtle };

/// Picks the format from a file extension (".nt" / ".ttl"); nullopt when unknown.
std::optional<RdfFormat> format_from_extension(std::string_view path);
std::optional<RdfFormat> parse_format_name(std::string_view name);

/// Parses a whole document. Triples come back in document order with duplicates
/// collapsed to their first occurrence; no other filtering is applied.
std::vector<Statement> parse_ontology(std::string_view source_text, RdfFormat format);

std::vector<Statement> parse_ntriples(std::string_view source_text);
std::vector<Statement> parse_turtle(std::string_view source_text);

/// Readable local name of an absolute http(s) IRI: the fragment after the last '#',
/// otherwise the last path segment, percent-decoded.
std::string derive_label(std::string_view iri);

/// True for labels with no human-readable meaning: letter+digits (Q42), no alphabetic
/// character at all, or UUID-shaped tokens.
bool is_opaque_label(std::string_view label);

bool is_http_iri(std::string_view iri);

StatementSet filter_statements(const std::vector<Statement> &raw, std::string source_id = {});

/// Reads and parses a file, then filters it.
StatementSet ingest_file(const std::string &path, std::optional<RdfFormat> format = std::nullopt);

/// Canonical N-Triples serialisation of one term / statement / document.
std::string to_ntriples(const Term &term);
std::string to_ntriples(const Statement &statement);
std::string to_ntriples(const std::vector<Statement> &statements);

}  // namespace retrofit
