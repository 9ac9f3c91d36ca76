#include "retrofit/csv.hpp"

#include "retrofit/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace retrofit {

std::vector<CsvRow> parse_csv(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) {
        text.remove_prefix(3);
    }
    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field.push_back(c);
        }
    }
    if (quoted) {
        throw Error("unterminated quoted CSV field");
    }
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string csv_line(std::span<const std::string> fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) {
            out.push_back(',');
        }
        out += csv_field(fields[i]);
    }
    out.push_back('\n');
    return out;
}

void write_file_atomic(const std::filesystem::path &path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw Error(fmt::format("cannot write '{}'", tmp.string()));
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(fmt::format("cannot open '{}'", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string questions_csv(std::span<const std::string> questions) {
    std::string out = "Questions\n";
    for (const auto &q : questions) {
        out += csv_field(q);
        out.push_back('\n');
    }
    return out;
}

std::vector<std::string> read_questions_csv(const std::filesystem::path &path) {
    const auto rows = parse_csv(read_file(path));
    if (rows.empty() || rows.front().empty() || rows.front().front() != "Questions") {
        throw Error(fmt::format("'{}' does not start with a Questions header", path.string()));
    }
    std::vector<std::string> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!rows[i].empty() && !rows[i].front().empty()) {
            out.push_back(rows[i].front());
        }
    }
    return out;
}

}  // namespace retrofit
