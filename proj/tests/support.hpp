#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include "retrofit/ontology.hpp"

#include <fmt/format.h>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

namespace retrofit::testing {

inline std::string data_path(std::string_view name) { return std::string(RETROFIT_TEST_DATA) + "/" + std::string(name); }

/// Fresh, empty directory under the system temp dir; removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string_view tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                fmt::format("retrofit-{}-{}-{}", tag, static_cast<long>(::getpid()), counter++);
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    [[nodiscard]] const std::filesystem::path &path() const noexcept { return path_; }
    [[nodiscard]] std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Canonical N-Triples document of `lines` distinct statements mixing IRIs, blank
/// nodes, plain / typed / language-tagged literals and escaped characters.
inline std::string ntriples_corpus(std::size_t lines, std::uint64_t seed = 20240901) {
    std::mt19937_64 rng(seed);
    const auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    static const char *kWords[] = {"Player", "Game", "Achievement", "Character", "Level", "Item", "Score", "Quest"};
    static const char *kEscapes[] = {"", "\\\"quoted\\\"", "tab\\there", "line\\nbreak", "back\\\\slash", "caf\xC3\xA9"};
    std::string out;
    for (std::size_t i = 0; i < lines; ++i) {
        const std::string subject = pick(5) == 0 ? fmt::format("_:b{}", i)
                                                 : fmt::format("<http://example.org/c{}#{}{}>", pick(3),
                                                               kWords[pick(8)], i);
        const std::string predicate = fmt::format("<http://example.org/p#rel{}>", pick(12));
        std::string object;
        switch (pick(5)) {
            case 0: object = fmt::format("<http://example.org/o/{}{}>", kWords[pick(8)], pick(1000)); break;
            case 1: object = fmt::format("_:o{}", pick(50)); break;
            case 2: object = fmt::format("\"{} {}{}\"", kWords[pick(8)], i, kEscapes[pick(6)]); break;
            case 3: object = fmt::format("\"{}\"^^<http://www.w3.org/2001/XMLSchema#integer>", pick(100000)); break;
            default: object = fmt::format("\"{} {}\"@{}", kWords[pick(8)], kEscapes[pick(6)], pick(2) ? "en" : "en-GB");
        }
        out += fmt::format("{} {} {} .\n", subject, predicate, object);
    }
    return out;
}

}  // namespace retrofit::testing
