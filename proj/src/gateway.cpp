#include "retrofit/gateway.hpp"

#include "digest.hpp"
#include "retrofit/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace retrofit {

// --- provider configs ------------------------------------------------------

std::string ProviderConfig::credential_variable() const {
    if (!api_key_env.empty()) {
        return api_key_env;
    }
    std::string var = "RETROFIT_API_KEY_";
    for (const char c : provider_id) {
        var.push_back(std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c)) : '_');
    }
    return var;
}

void ProviderConfig::validate() const {
    if (provider_id.empty()) {
        throw ConfigError("provider_id must not be empty");
    }
    if (model_name.empty()) {
        throw ConfigError(fmt::format("provider '{}' has no model_name", provider_id));
    }
    if (max_tokens <= 0) {
        throw ConfigError(fmt::format("provider '{}': max_tokens must be positive", provider_id));
    }
    if (max_retries < 0) {
        throw ConfigError(fmt::format("provider '{}': max_retries must not be negative", provider_id));
    }
    if (!is_mock() && endpoint_url.empty()) {
        throw ConfigError(fmt::format("provider '{}' needs an endpoint_url", provider_id));
    }
}

ProviderConfig ProviderConfig::preset(std::string_view model_name) {
    ProviderConfig cfg;
    cfg.provider_id = std::string(model_name);
    cfg.model_name = std::string(model_name);
    if (model_name.starts_with("gpt-4")) {
        cfg.max_tokens = 8192;
    } else {
        cfg.max_tokens = 4096;
    }
    if (model_name.starts_with("gpt-")) {
        cfg.endpoint_url = "https://api.openai.com/v1/chat/completions";
    }
    return cfg;
}

ProviderConfig ProviderConfig::mock(std::uint64_t seed, std::string model_name, std::string provider_id) {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::mock;
    cfg.provider_id = std::move(provider_id);
    cfg.model_name = std::move(model_name);
    cfg.seed = seed;
    return cfg;
}

std::string prompt_digest(std::string_view model_name, std::string_view prompt) {
    std::string material;
    material.reserve(model_name.size() + prompt.size() + 1);
    material.append(model_name);
    material.push_back('\0');
    material.append(prompt);
    return detail::sha256_hex(material);
}

// --- cache -----------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path directory) : directory_(std::move(directory)) {
    std::filesystem::create_directories(directory_);
}

std::filesystem::path ResponseCache::path_for(const std::string &digest) const {
    return directory_ / digest.substr(0, 2) / (digest + ".json");
}

std::optional<ResponseCache::Entry> ResponseCache::load(const std::string &digest) const {
    std::shared_lock lock(mutex_);
    std::ifstream in(path_for(digest), std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    const auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("text") || !doc["text"].is_string()) {
        return std::nullopt;
    }
    return Entry{doc.value("model", std::string{}), doc["text"].get<std::string>(), doc.value("truncated", false)};
}

void ResponseCache::store(const std::string &digest, const Entry &entry) {
    std::unique_lock lock(mutex_);
    const auto target = path_for(digest);
    std::filesystem::create_directories(target.parent_path());
    const auto tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << nlohmann::json{{"digest", digest}, {"model", entry.model_name}, {"text", entry.text},
                              {"truncated", entry.truncated}}
                   .dump(1);
        if (!out) {
            throw Error(fmt::format("cannot write cache entry {}", tmp));
        }
    }
    std::filesystem::rename(tmp, target);
}

// --- mock provider -----------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

// {S} subject, {P} predicate, {O} object
constexpr std::array<std::string_view, 10> kFrames{
    "What is a {S} {O}?",
    "Is {S} a kind of {O}?",
    "What is the {P} of {S}?",
    "Which {O} is related to {S}?",
    "How is {S} connected to {O}?",
    "What are the characteristics of {S}?",
    "Which entities have {P} {O}?",
    "What does {S} {P}?",
    "Does every {S} have a {O}?",
    "What kinds of {O} exist besides {S}?",
};

constexpr std::array<std::string_view, 3> kPreambles{
    "Sure! Here are some questions:",
    "Here is a list of relevant questions:",
    "Certainly. Questions based on the statement:",
};

std::string fill_frame(std::string_view frame, const Statement &s) {
    std::string out;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        if (frame[i] == '{' && i + 2 < frame.size() && frame[i + 2] == '}') {
            const Term &t = frame[i + 1] == 'S' ? s.subject : frame[i + 1] == 'P' ? s.predicate : s.object;
            out += t.label.value_or(t.lexical);
            i += 2;
        } else {
            out.push_back(frame[i]);
        }
    }
    return out;
}

// Recovers the three labels from the last "['s', 'p', 'o']" in a rendered prompt.
std::optional<Statement> statement_from_prompt(const PromptInstance &p) {
    const auto &r = p.rendered;
    const auto open = r.rfind("['");
    if (open == std::string::npos) {
        return std::nullopt;
    }
    const auto close = r.find("']", open);
    if (close == std::string::npos) {
        return std::nullopt;
    }
    const auto inner = r.substr(open + 2, close - open - 2);
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (auto pos = inner.find("', '"); pos != std::string::npos; pos = inner.find("', '", start)) {
        parts.push_back(inner.substr(start, pos - start));
        start = pos + 4;
    }
    parts.push_back(inner.substr(start));
    if (parts.size() != 3) {
        return std::nullopt;
    }
    Statement s;
    s.subject = Term::literal(parts[0]);
    s.predicate = Term::literal(parts[1]);
    s.object = Term::literal(parts[2]);
    s.ordinal = p.statement_ordinal;
    return s;
}

}  // namespace

std::string mock_generate(const Statement &s, std::string_view template_id, std::uint64_t seed) {
    std::uint64_t state = splitmix64(seed);
    state = splitmix64(state ^ static_cast<std::uint64_t>(s.ordinal));
    state = splitmix64(state ^ fnv1a(template_id));
    std::mt19937_64 rng(state);

    const std::size_t count = 2 + static_cast<std::size_t>(rng() % 4);
    std::vector<std::size_t> order(kFrames.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    // partial Fisher-Yates with raw engine output keeps the draw portable
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (order.size() - i));
        std::swap(order[i], order[j]);
    }
    std::string text;
    if (rng() % 3 == 0) {
        text += kPreambles[rng() % kPreambles.size()];
        text += "\n\n";
    }
    for (std::size_t i = 0; i < count; ++i) {
        text += fmt::format("{}. {}\n", i + 1, fill_frame(kFrames[order[i]], s));
    }
    return text;
}

// --- extraction -------------------------------------------------------------

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool strip_marker(std::string_view &s) {
    static constexpr std::string_view kBullet = "\xE2\x80\xA2";  // U+2022
    if (s.starts_with(kBullet)) {
        s.remove_prefix(kBullet.size());
        return true;
    }
    if (!s.empty() && (s.front() == '-' || s.front() == '*')) {
        const char marker = s.front();
        std::size_t n = 0;
        while (n < s.size() && s[n] == marker) ++n;
        if (n == s.size() || is_space(s[n]) || marker == '*') {
            s.remove_prefix(n);
            return true;
        }
        return false;
    }
    std::size_t digits = 0;
    while (digits < s.size() && s[digits] >= '0' && s[digits] <= '9') ++digits;
    if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')')) {
        const std::size_t after = digits + 1;
        if (after == s.size() || !(s[after] >= '0' && s[after] <= '9')) {
            s.remove_prefix(after);
            return true;
        }
    }
    return false;
}

bool strip_quotes(std::string_view &s) {
    if (s.size() >= 2) {
        const char a = s.front();
        const char b = s.back();
        if ((a == '"' && b == '"') || (a == '\'' && b == '\'') || (a == '`' && b == '`')) {
            s = s.substr(1, s.size() - 2);
            return true;
        }
    }
    static constexpr std::string_view kOpen = "\xE2\x80\x9C";   // left double quotation mark
    static constexpr std::string_view kClose = "\xE2\x80\x9D";  // right double quotation mark
    if (s.size() >= kOpen.size() + kClose.size() && s.starts_with(kOpen) && s.ends_with(kClose)) {
        s = s.substr(kOpen.size(), s.size() - kOpen.size() - kClose.size());
        return true;
    }
    return false;
}

std::optional<std::string> clean_line(std::string_view line) {
    std::string_view s = trim(line);
    bool changed = true;
    while (changed && !s.empty()) {
        changed = strip_marker(s);
        changed = strip_quotes(s) || changed;
        s = trim(s);
    }
    const auto q = s.find('?');
    if (q == std::string_view::npos) {
        return std::nullopt;
    }
    s = s.substr(0, q + 1);
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (const char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    // quotes or markers left dangling by the truncation
    while (!out.empty() && (out.front() == '"' || out.front() == '\'' || out.front() == '*')) {
        out.erase(out.begin());
    }
    if (out.size() < 2) {
        return std::nullopt;
    }
    return out;
}

}  // namespace

std::vector<std::string> extract_questions(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        if (auto q = clean_line(text.substr(start, end - start))) {
            out.push_back(std::move(*q));
        }
        start = end + 1;
    }
    return out;
}

std::vector<std::string> extract_questions(const RawResponse &response) { return extract_questions(response.text); }

// --- gateway ----------------------------------------------------------------

Gateway::Gateway(std::optional<std::filesystem::path> cache_dir) {
    if (cache_dir) {
        cache_.emplace(*cache_dir);
    }
}

RawResponse Gateway::complete(const PromptInstance &prompt, const ProviderConfig &cfg) {
    // the mock's output depends on its seed, so the seed is part of its identity
    const std::string identity = cfg.is_mock() ? fmt::format("{}#seed={}", cfg.model_name, cfg.seed) : cfg.model_name;
    const std::string digest = prompt_digest(identity, prompt.rendered);

    if (cache_) {
        if (auto hit = cache_->load(digest)) {
            ++cache_hits_;
            RawResponse r;
            r.prompt_digest = digest;
            r.provider_id = cfg.provider_id;
            r.model_name = cfg.model_name;
            r.text = std::move(hit->text);
            r.truncated = hit->truncated;
            r.from_cache = true;
            return r;
        }
    }

    ++provider_calls_;
    RawResponse r;
    if (cfg.is_mock()) {
        const auto statement = statement_from_prompt(prompt);
        if (!statement) {
            throw MalformedResponseError("mock provider could not find a statement in the prompt");
        }
        r.prompt_digest = digest;
        r.provider_id = cfg.provider_id;
        r.model_name = cfg.model_name;
        r.text = mock_generate(*statement, prompt.template_id, cfg.seed);
        r.latency_ms = 0;
    } else {
        r = http_complete(prompt, cfg);
    }
    if (cache_) {
        cache_->store(digest, {cfg.model_name, r.text, r.truncated});
    }
    return r;
}

GenerationResult generate_all(std::span<const Statement> statements, std::span<const PromptTemplate> templates,
                              std::span<const ProviderConfig> providers, Gateway &gateway, std::size_t parallelism) {
    struct Job {
        std::size_t statement;
        std::size_t tmpl;
        std::size_t provider;
    };
    std::vector<Job> jobs;
    jobs.reserve(statements.size() * templates.size() * providers.size());
    for (std::size_t s = 0; s < statements.size(); ++s) {
        for (std::size_t t = 0; t < templates.size(); ++t) {
            for (std::size_t p = 0; p < providers.size(); ++p) {
                jobs.push_back({s, t, p});
            }
        }
    }

    const std::size_t n_cells = templates.size() * providers.size();
    std::vector<std::optional<GenerationRecord>> slots(jobs.size());
    std::vector<std::string> cell_error(n_cells);
    std::vector<std::atomic<bool>> cell_failed(n_cells);
    std::mutex error_mutex;
    std::atomic<std::size_t> next{0};

    const auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const auto &job = jobs[i];
            const std::size_t cell = job.tmpl * providers.size() + job.provider;
            if (cell_failed[cell].load()) {
                continue;
            }
            const auto &st = statements[job.statement];
            const auto &tmpl = templates[job.tmpl];
            const auto &cfg = providers[job.provider];
            try {
                const auto prompt = render_prompt(tmpl, st);
                const auto response = gateway.complete(prompt, cfg);
                GenerationRecord rec;
                rec.statement_ordinal = st.ordinal;
                rec.template_id = tmpl.id;
                rec.provider_id = cfg.provider_id;
                rec.questions = extract_questions(response);
                rec.from_cache = response.from_cache;
                rec.truncated = response.truncated;
                slots[i] = std::move(rec);
            } catch (const std::exception &e) {
                std::lock_guard lock(error_mutex);
                if (!cell_failed[cell].exchange(true)) {
                    cell_error[cell] = fmt::format("statement {}: {}", st.ordinal, e.what());
                }
            }
        }
    };

    const std::size_t n_workers = std::max<std::size_t>(1, std::min(parallelism, jobs.size()));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back(worker);
        }
    }

    GenerationResult result;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::size_t cell = jobs[i].tmpl * providers.size() + jobs[i].provider;
        if (!cell_failed[cell].load() && slots[i]) {
            result.records.push_back(std::move(*slots[i]));
        }
    }
    for (std::size_t t = 0; t < templates.size(); ++t) {
        for (std::size_t p = 0; p < providers.size(); ++p) {
            const std::size_t cell = t * providers.size() + p;
            if (cell_failed[cell].load()) {
                result.failures.push_back({templates[t].id, providers[p].provider_id, cell_error[cell]});
            }
        }
    }
    return result;
}

}  // namespace retrofit
