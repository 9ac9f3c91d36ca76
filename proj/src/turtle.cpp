// Turtle subset reader: @prefix/PREFIX, `a`, predicate-object lists (;), object
// lists (,), IRIs and prefixed names, plain/typed/language-tagged literals,
// numeric and boolean shorthand, and blank-node labels. Collections, blank-node
// property lists, quoted triples, and @base are rejected by name.

#include "rdf_cursor.hpp"
#include "retrofit/error.hpp"
#include "retrofit/ontology.hpp"

#include <fmt/format.h>

#include <map>
#include <unordered_set>

namespace retrofit {
namespace {

constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

bool is_pn_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           static_cast<unsigned char>(c) >= 0x80;
}

class TurtleReader {
public:
    explicit TurtleReader(std::string_view text) : cur_(text) {}

    std::vector<Statement> run() {
        while (true) {
            cur_.skip_blank(true);
            if (cur_.eof()) {
                break;
            }
            if (directive()) {
                continue;
            }
            triples();
            cur_.skip_blank(true);
            cur_.expect('.');
        }
        return std::move(out_);
    }

private:
    [[noreturn]] void unsupported(const std::string &what) const {
        throw UnsupportedConstructError(what, cur_.line(), cur_.column());
    }

    bool keyword_ahead(std::string_view kw, bool case_insensitive) const {
        for (std::size_t i = 0; i < kw.size(); ++i) {
            char c = cur_.peek(i);
            if (case_insensitive && c >= 'a' && c <= 'z') {
                c = static_cast<char>(c - 'a' + 'A');
            }
            if (c != kw[i]) {
                return false;
            }
        }
        const char after = cur_.peek(kw.size());
        return after == ' ' || after == '\t' || after == '\n' || after == '\r' || after == '<';
    }

    bool directive() {
        bool sparql_style = false;
        if (cur_.starts_with("@prefix")) {
            cur_.advance(7);
        } else if (keyword_ahead("PREFIX", true)) {
            cur_.advance(6);
            sparql_style = true;
        } else if (cur_.starts_with("@base") || keyword_ahead("BASE", true)) {
            unsupported("@base / BASE directive");
        } else {
            return false;
        }
        cur_.skip_blank(true);
        std::string prefix;
        while (!cur_.eof() && cur_.peek() != ':') {
            const char c = cur_.peek();
            if (!is_pn_char(c) && c != '.') {
                cur_.fail("malformed prefix name");
            }
            prefix.push_back(cur_.get());
        }
        cur_.expect(':');
        cur_.skip_blank(true);
        prefixes_[prefix] = cur_.read_iriref();
        if (!sparql_style) {
            cur_.skip_blank(true);
            cur_.expect('.');
        }
        return true;
    }

    void reject_nested() {
        if (cur_.peek() == '[') unsupported("blank node property list '[ ... ]'");
        if (cur_.peek() == '(') unsupported("collection '( ... )'");
        if (cur_.starts_with("<<")) unsupported("quoted triple '<< ... >>'");
        if (cur_.peek() == '{') unsupported("graph block '{ ... }'");
    }

    void triples() {
        reject_nested();
        Term subject;
        if (cur_.peek() == '_' && cur_.peek(1) == ':') {
            subject = Term::blank(cur_.read_blank_label());
        } else {
            subject = Term::iri(iri());
        }
        while (true) {
            cur_.skip_blank(true);
            const Term predicate = verb();
            while (true) {
                cur_.skip_blank(true);
                emit(subject, predicate, object());
                cur_.skip_blank(true);
                if (cur_.peek() != ',') {
                    break;
                }
                cur_.get();
            }
            if (cur_.peek() != ';') {
                break;
            }
            // repeated or trailing semicolons are allowed
            while (cur_.peek() == ';') {
                cur_.get();
                cur_.skip_blank(true);
            }
            if (cur_.peek() == '.' || cur_.peek() == ']') {
                break;
            }
        }
    }

    Term verb() {
        if (cur_.peek() == 'a') {
            const char after = cur_.peek(1);
            if (after == ' ' || after == '\t' || after == '\n' || after == '\r' || after == '<' || after == '"' ||
                after == '_') {
                cur_.get();
                return Term::iri(std::string(kRdfType));
            }
        }
        reject_nested();
        return Term::iri(iri());
    }

    Term object() {
        reject_nested();
        const char c = cur_.peek();
        if (c == '"' || c == '\'') {
            std::string lexical = cur_.read_string();
            if (cur_.peek() == '@') {
                return Term::literal(std::move(lexical), {}, cur_.read_langtag());
            }
            if (cur_.starts_with("^^")) {
                cur_.advance(2);
                return Term::literal(std::move(lexical), iri());
            }
            return Term::literal(std::move(lexical));
        }
        if (c == '_' && cur_.peek(1) == ':') {
            return Term::blank(cur_.read_blank_label());
        }
        if (c == '+' || c == '-' || (c >= '0' && c <= '9') || (c == '.' && cur_.peek(1) >= '0' && cur_.peek(1) <= '9')) {
            return numeric();
        }
        for (const std::string_view kw : {"true", "false"}) {
            if (cur_.starts_with(kw) && !is_pn_char(cur_.peek(kw.size())) && cur_.peek(kw.size()) != ':') {
                cur_.advance(kw.size());
                return Term::literal(std::string(kw), std::string(kXsd) + "boolean");
            }
        }
        return Term::iri(iri());
    }

    Term numeric() {
        std::string text;
        if (cur_.peek() == '+' || cur_.peek() == '-') {
            text.push_back(cur_.get());
        }
        const auto digits = [&] {
            std::size_t n = 0;
            while (cur_.peek() >= '0' && cur_.peek() <= '9') {
                text.push_back(cur_.get());
                ++n;
            }
            return n;
        };
        std::size_t n = digits();
        std::string type = "integer";
        if (cur_.peek() == '.' && cur_.peek(1) >= '0' && cur_.peek(1) <= '9') {
            text.push_back(cur_.get());
            n += digits();
            type = "decimal";
        }
        if (cur_.peek() == 'e' || cur_.peek() == 'E') {
            text.push_back(cur_.get());
            if (cur_.peek() == '+' || cur_.peek() == '-') {
                text.push_back(cur_.get());
            }
            if (digits() == 0) {
                cur_.fail("malformed exponent in numeric literal");
            }
            type = "double";
        }
        if (n == 0) {
            cur_.fail("malformed numeric literal");
        }
        return Term::literal(std::move(text), std::string(kXsd) + type);
    }

    std::string iri() {
        if (cur_.peek() == '<') {
            return cur_.read_iriref();
        }
        const std::size_t line = cur_.line();
        const std::size_t column = cur_.column();
        std::string prefix;
        while (!cur_.eof() && cur_.peek() != ':') {
            const char c = cur_.peek();
            if (!is_pn_char(c) && c != '.') {
                cur_.fail(c == '\0' ? "unexpected end of input" : fmt::format("unexpected character '{}'", c));
            }
            prefix.push_back(cur_.get());
        }
        cur_.expect(':');
        const auto it = prefixes_.find(prefix);
        if (it == prefixes_.end()) {
            throw ParseError(fmt::format("undefined prefix '{}:'", prefix), line, column);
        }
        std::string local;
        while (!cur_.eof()) {
            const char c = cur_.peek();
            if (is_pn_char(c) || c == ':') {
                local.push_back(cur_.get());
            } else if (c == '.') {
                // a dot is part of the name only when more name characters follow
                const char next = cur_.peek(1);
                if (!(is_pn_char(next) || next == ':' || next == '%' || next == '\\')) {
                    break;
                }
                local.push_back(cur_.get());
            } else if (c == '%') {
                local.push_back(cur_.get());
                for (int i = 0; i < 2; ++i) {
                    if (!std::isxdigit(static_cast<unsigned char>(cur_.peek()))) {
                        cur_.fail("malformed percent escape in prefixed name");
                    }
                    local.push_back(cur_.get());
                }
            } else if (c == '\\') {
                cur_.get();
                if (cur_.eof()) {
                    cur_.fail("dangling escape in prefixed name");
                }
                local.push_back(cur_.get());
            } else {
                break;
            }
        }
        return it->second + local;
    }

    void emit(const Term &s, const Term &p, Term o) {
        Statement st{s, p, std::move(o), out_.size()};
        if (seen_.insert(to_ntriples(st)).second) {
            out_.push_back(std::move(st));
        }
    }

    detail::Cursor cur_;
    std::map<std::string, std::string> prefixes_;
    std::vector<Statement> out_;
    std::unordered_set<std::string> seen_;
};

}  // namespace

std::vector<Statement> parse_turtle(std::string_view source_text) {
    return TurtleReader(source_text).run();
}

}  // namespace retrofit
