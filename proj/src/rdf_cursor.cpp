#include "rdf_cursor.hpp"

#include <fmt/format.h>

namespace retrofit::detail {

void append_utf8(std::string &out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

char Cursor::get() {
    const char c = text_[pos_++];
    if (c == '\n') {
        ++line_;
        column_ = 1;
    } else {
        ++column_;
    }
    return c;
}

void Cursor::advance(std::size_t n) {
    for (std::size_t i = 0; i < n && !eof(); ++i) {
        get();
    }
}

void Cursor::skip_comment() {
    while (!eof() && peek() != '\n' && peek() != '\r') {
        get();
    }
}

void Cursor::skip_blank(bool newlines) {
    while (!eof()) {
        const char c = peek();
        if (c == ' ' || c == '\t') {
            get();
        } else if (newlines && (c == '\n' || c == '\r')) {
            get();
        } else if (newlines && c == '#') {
            skip_comment();
        } else {
            break;
        }
    }
}

void Cursor::fail(const std::string &message) const {
    throw ParseError(message, line_, column_);
}

void Cursor::expect(char c) {
    if (eof() || peek() != c) {
        fail(eof() ? fmt::format("expected '{}' but reached end of input", c)
                   : fmt::format("expected '{}' but found '{}'", c, peek()));
    }
    get();
}

std::uint32_t Cursor::read_hex(int digits) {
    std::uint32_t value = 0;
    for (int i = 0; i < digits; ++i) {
        if (eof()) {
            fail("truncated unicode escape");
        }
        const char c = get();
        value <<= 4;
        if (c >= '0' && c <= '9') {
            value |= static_cast<std::uint32_t>(c - '0');
        } else if (c >= 'a' && c <= 'f') {
            value |= static_cast<std::uint32_t>(c - 'a' + 10);
        } else if (c >= 'A' && c <= 'F') {
            value |= static_cast<std::uint32_t>(c - 'A' + 10);
        } else {
            fail(fmt::format("invalid hex digit '{}' in unicode escape", c));
        }
    }
    if (value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
        fail("unicode escape is not a valid code point");
    }
    return value;
}

std::string Cursor::read_iriref() {
    expect('<');
    std::string iri;
    while (true) {
        if (eof()) {
            fail("unterminated IRI");
        }
        const char c = peek();
        if (c == '>') {
            get();
            break;
        }
        if (c == '\\') {
            get();
            const char kind = eof() ? '\0' : get();
            if (kind == 'u') {
                append_utf8(iri, read_hex(4));
            } else if (kind == 'U') {
                append_utf8(iri, read_hex(8));
            } else {
                fail("invalid escape in IRI");
            }
            continue;
        }
        if (c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '<' || c == '"' || c == '{' ||
            c == '}' || c == '|' || c == '^' || c == '`') {
            fail(fmt::format("illegal character '{}' in IRI", c == '\n' ? ' ' : c));
        }
        iri.push_back(get());
    }
    return iri;
}

char Cursor::read_escape(std::string &out) {
    const char kind = eof() ? '\0' : get();
    switch (kind) {
        case 't': out.push_back('\t'); break;
        case 'b': out.push_back('\b'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case 'f': out.push_back('\f'); break;
        case '"': out.push_back('"'); break;
        case '\'': out.push_back('\''); break;
        case '\\': out.push_back('\\'); break;
        case 'u': append_utf8(out, read_hex(4)); break;
        case 'U': append_utf8(out, read_hex(8)); break;
        default: fail("invalid escape sequence in string literal");
    }
    return kind;
}

std::string Cursor::read_string() {
    const char quote = peek();
    if (quote != '"' && quote != '\'') {
        fail("expected string literal");
    }
    const bool long_form = peek(1) == quote && peek(2) == quote;
    advance(long_form ? 3 : 1);
    std::string value;
    while (true) {
        if (eof()) {
            fail("unterminated string literal");
        }
        const char c = peek();
        if (long_form) {
            if (c == quote && peek(1) == quote && peek(2) == quote) {
                advance(3);
                // a long string may end with up to two extra quote characters
                while (peek() == quote) {
                    value.push_back(get());
                }
                break;
            }
        } else if (c == quote) {
            get();
            break;
        } else if (c == '\n' || c == '\r') {
            fail("line break inside string literal");
        }
        if (c == '\\') {
            get();
            read_escape(value);
            continue;
        }
        value.push_back(get());
    }
    return value;
}

std::string Cursor::read_blank_label() {
    expect('_');
    expect(':');
    std::string label;
    while (!eof()) {
        const char c = peek();
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '_' || c == '-' || c == '.' || static_cast<unsigned char>(c) >= 0x80;
        if (!ok) {
            break;
        }
        // a trailing '.' terminates the statement, not the label
        if (c == '.') {
            const char next = peek(1);
            const bool continues = (next >= 'a' && next <= 'z') || (next >= 'A' && next <= 'Z') ||
                                   (next >= '0' && next <= '9') || next == '_' || next == '-' ||
                                   static_cast<unsigned char>(next) >= 0x80;
            if (!continues) {
                break;
            }
        }
        label.push_back(get());
    }
    if (label.empty()) {
        fail("empty blank node label");
    }
    return label;
}

std::string Cursor::read_langtag() {
    expect('@');
    std::string tag;
    while (!eof()) {
        const char c = peek();
        const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        const bool digit = c >= '0' && c <= '9';
        if (alpha || (!tag.empty() && (digit || c == '-'))) {
            tag.push_back(get());
        } else {
            break;
        }
    }
    if (tag.empty() || tag.back() == '-') {
        fail("malformed language tag");
    }
    return tag;
}

}  // namespace retrofit::detail
