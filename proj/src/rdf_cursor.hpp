#pragma once

// Character cursor shared by the N-Triples and Turtle readers.

#include "retrofit/error.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace retrofit::detail {

class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    [[nodiscard]] bool eof() const noexcept { return pos_ >= text_.size(); }
    [[nodiscard]] char peek(std::size_t ahead = 0) const noexcept {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }
    [[nodiscard]] bool starts_with(std::string_view s) const noexcept {
        return text_.substr(pos_).starts_with(s);
    }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

    char get();
    void advance(std::size_t n);

    /// Skips spaces and tabs; when `newlines` is set also CR/LF and '#' comments.
    void skip_blank(bool newlines);
    void skip_comment();

    [[noreturn]] void fail(const std::string &message) const;
    void expect(char c);

    /// Reads `<...>` and returns the IRI text with \u escapes decoded.
    std::string read_iriref();
    /// Reads a quoted string (single, double, or triple-quoted) with escapes decoded.
    std::string read_string();
    /// Reads `_:label` and returns the label without the prefix.
    std::string read_blank_label();
    /// Reads `@lang` and returns the tag without '@'.
    std::string read_langtag();

private:
    std::uint32_t read_hex(int digits);
    char read_escape(std::string &out);

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

void append_utf8(std::string &out, std::uint32_t code_point);

}  // namespace retrofit::detail
