#include "retrofit/ontology.hpp"

#include "rdf_cursor.hpp"
#include "retrofit/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace retrofit {

ParseError::ParseError(const std::string &message, std::size_t line, std::size_t column, const std::string &source)
    : Error(source.empty() ? fmt::format("{}:{}: {}", line, column, message)
                           : fmt::format("{}:{}:{}: {}", source, line, column, message)),
      line_(line),
      column_(column),
      detail_(message),
      source_(source) {}

UnsupportedConstructError::UnsupportedConstructError(const std::string &construct, std::size_t line,
                                                     std::size_t column, const std::string &source)
    : ParseError(fmt::format("unsupported Turtle construct: {}", construct), line, column, source),
      construct_(construct) {}

namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return c - 'A' + 10;
}

std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && is_hex(s[i + 1]) && is_hex(s[i + 2])) {
            out.push_back(static_cast<char>(hex_value(s[i + 1]) * 16 + hex_value(s[i + 2])));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::optional<std::string> try_label(std::string_view iri) {
    if (!is_http_iri(iri)) {
        return std::nullopt;
    }
    try {
        return derive_label(iri);
    } catch (const LabelError &) {
        return std::nullopt;
    }
}

std::string escape_literal(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (const char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string escape_iri(std::string_view s) {
    std::string out;
    for (const char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (u <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' ||
            c == '`' || c == '\\') {
            out += fmt::format("\\u{:04X}", u);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

// --- N-Triples ------------------------------------------------------------

Term read_nt_subject(detail::Cursor &cur) {
    if (cur.peek() == '<') {
        return Term::iri(cur.read_iriref());
    }
    if (cur.peek() == '_') {
        return Term::blank(cur.read_blank_label());
    }
    cur.fail("expected IRI or blank node as subject");
}

Term read_nt_object(detail::Cursor &cur) {
    if (cur.peek() == '<') {
        return Term::iri(cur.read_iriref());
    }
    if (cur.peek() == '_') {
        return Term::blank(cur.read_blank_label());
    }
    if (cur.peek() == '"') {
        std::string lexical = cur.read_string();
        if (cur.peek() == '@') {
            return Term::literal(std::move(lexical), {}, cur.read_langtag());
        }
        if (cur.starts_with("^^")) {
            cur.advance(2);
            return Term::literal(std::move(lexical), cur.read_iriref());
        }
        return Term::literal(std::move(lexical));
    }
    cur.fail("expected IRI, blank node, or literal as object");
}

}  // namespace

Term Term::iri(std::string value) {
    Term t;
    t.kind = TermKind::iri;
    t.label = try_label(value);
    t.lexical = std::move(value);
    return t;
}

Term Term::literal(std::string lexical, std::string datatype, std::string language) {
    Term t;
    t.kind = TermKind::literal;
    t.label = lexical;
    t.lexical = std::move(lexical);
    t.datatype = std::move(datatype);
    t.language = std::move(language);
    return t;
}

Term Term::blank(std::string id) {
    Term t;
    t.kind = TermKind::blank;
    t.lexical = std::move(id);
    return t;
}

std::optional<RdfFormat> format_from_extension(std::string_view path) {
    auto ext = std::filesystem::path(path).extension().string();
    for (auto &c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".nt") return RdfFormat::ntriples;
    if (ext == ".ttl") return RdfFormat::turtle;
    return std::nullopt;
}

std::optional<RdfFormat> parse_format_name(std::string_view name) {
    if (name == "ntriples" || name == "nt") return RdfFormat::ntriples;
    if (name == "turtle" || name == "ttl") return RdfFormat::turtle;
    return std::nullopt;
}

bool is_http_iri(std::string_view iri) {
    return iri.starts_with("http://") || iri.starts_with("https://");
}

std::string derive_label(std::string_view iri) {
    if (!is_http_iri(iri)) {
        throw LabelError(fmt::format("not an absolute http(s) IRI: {}", iri));
    }
    if (const auto hash = iri.rfind('#'); hash != std::string_view::npos) {
        const auto fragment = iri.substr(hash + 1);
        if (fragment.empty()) {
            throw LabelError(fmt::format("empty local name in IRI: {}", iri));
        }
        return percent_decode(fragment);
    }
    const auto authority = iri.find("://") + 3;
    const auto path_start = iri.find('/', authority);
    if (path_start == std::string_view::npos) {
        throw LabelError(fmt::format("IRI has no path to take a local name from: {}", iri));
    }
    auto path = iri.substr(path_start);
    if (const auto query = path.find('?'); query != std::string_view::npos) {
        path = path.substr(0, query);
    }
    if (path.empty() || path.back() == '/') {
        throw LabelError(fmt::format("empty local name in IRI: {}", iri));
    }
    return percent_decode(path.substr(path.rfind('/') + 1));
}

bool is_opaque_label(std::string_view label) {
    // Q-item style: one letter then only digits
    if (label.size() >= 2 && is_ascii_alpha(label[0]) &&
        std::all_of(label.begin() + 1, label.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        return true;
    }
    // non-ASCII bytes count as alphabetic so non-Latin labels stay readable
    const bool has_alpha = std::any_of(label.begin(), label.end(), [](char c) {
        return is_ascii_alpha(c) || static_cast<unsigned char>(c) >= 0x80;
    });
    if (!has_alpha) {
        return true;
    }
    if (label.size() == 36) {
        for (std::size_t i = 0; i < label.size(); ++i) {
            const bool dash_slot = i == 8 || i == 13 || i == 18 || i == 23;
            if (dash_slot ? label[i] != '-' : !is_hex(label[i])) {
                return false;
            }
        }
        return true;
    }
    if (label.size() == 32) {
        return std::all_of(label.begin(), label.end(), is_hex);
    }
    return false;
}

std::vector<Statement> parse_ntriples(std::string_view source_text) {
    std::vector<Statement> out;
    std::unordered_set<std::string> seen;
    detail::Cursor cur(source_text);
    while (true) {
        cur.skip_blank(true);
        if (cur.eof()) {
            break;
        }
        Statement st;
        st.subject = read_nt_subject(cur);
        cur.skip_blank(false);
        if (cur.peek() != '<') {
            cur.fail("expected IRI as predicate");
        }
        st.predicate = Term::iri(cur.read_iriref());
        cur.skip_blank(false);
        st.object = read_nt_object(cur);
        cur.skip_blank(false);
        cur.expect('.');
        cur.skip_blank(false);
        if (cur.peek() == '#') {
            cur.skip_comment();
        }
        if (!cur.eof() && cur.peek() != '\n' && cur.peek() != '\r') {
            cur.fail("unexpected content after statement terminator");
        }
        if (seen.insert(to_ntriples(st)).second) {
            st.ordinal = out.size();
            out.push_back(std::move(st));
        }
    }
    return out;
}

std::vector<Statement> parse_ontology(std::string_view source_text, RdfFormat format) {
    return format == RdfFormat::ntriples ? parse_ntriples(source_text) : parse_turtle(source_text);
}

StatementSet filter_statements(const std::vector<Statement> &raw, std::string source_id) {
    StatementSet set;
    set.source_id = std::move(source_id);
    set.counts.parsed = raw.size();
    const auto readable = [](const Term &t) {
        if (t.kind != TermKind::iri) {
            return true;
        }
        const auto label = t.label ? t.label : try_label(t.lexical);
        return label.has_value() && !label->empty() && !is_opaque_label(*label);
    };
    for (const auto &st : raw) {
        if (st.subject.kind == TermKind::blank || st.object.kind == TermKind::blank) {
            ++set.counts.excluded_blank;
            continue;
        }
        if (!readable(st.subject) || !readable(st.predicate) || !readable(st.object)) {
            ++set.counts.excluded_opaque;
            continue;
        }
        Statement kept = st;
        kept.ordinal = set.statements.size();
        set.statements.push_back(std::move(kept));
    }
    set.counts.kept = set.statements.size();
    return set;
}

StatementSet ingest_file(const std::string &path, std::optional<RdfFormat> format) {
    if (!format) {
        format = format_from_extension(path);
    }
    if (!format) {
        throw ConfigError(fmt::format("cannot infer RDF format from '{}'; pass --format", path));
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open ontology file '{}'", path));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return filter_statements(parse_ontology(buffer.str(), *format), path);
    } catch (const UnsupportedConstructError &e) {
        throw UnsupportedConstructError(e.construct(), e.line(), e.column(), path);
    } catch (const ParseError &e) {
        throw ParseError(e.detail(), e.line(), e.column(), path);
    }
}

std::string to_ntriples(const Term &term) {
    switch (term.kind) {
        case TermKind::iri:
            return "<" + escape_iri(term.lexical) + ">";
        case TermKind::blank:
            return "_:" + term.lexical;
        case TermKind::literal: {
            std::string out = "\"" + escape_literal(term.lexical) + "\"";
            if (!term.language.empty()) {
                out += "@" + term.language;
            } else if (!term.datatype.empty()) {
                out += "^^<" + escape_iri(term.datatype) + ">";
            }
            return out;
        }
    }
    return {};
}

std::string to_ntriples(const Statement &st) {
    return fmt::format("{} {} {} .", to_ntriples(st.subject), to_ntriples(st.predicate), to_ntriples(st.object));
}

std::string to_ntriples(const std::vector<Statement> &statements) {
    std::string out;
    for (const auto &st : statements) {
        out += to_ntriples(st);
        out += '\n';
    }
    return out;
}

}  // namespace retrofit
