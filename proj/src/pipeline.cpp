#include "retrofit/pipeline.hpp"

#include "retrofit/csv.hpp"
#include "retrofit/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace retrofit {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json &j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    for (const auto &item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ConfigError(fmt::format("unknown key '{}' in {}", item.key(), where));
        }
    }
}

template <typename T>
T get_or(const json &j, const char *key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(fmt::format("config key '{}': {}", key, e.what()));
    }
}

ProviderConfig provider_from_json(const json &j, std::uint64_t default_seed) {
    reject_unknown_keys(j, "provider",
                        {"kind", "id", "model", "endpoint", "max_tokens", "temperature", "timeout_ms", "max_retries",
                         "backoff_ms", "api_key_env", "seed"});
    const auto kind = get_or<std::string>(j, "kind", "http");
    ProviderConfig p;
    if (kind == "mock") {
        const auto model = get_or<std::string>(j, "model", "mock");
        p = ProviderConfig::mock(get_or<std::uint64_t>(j, "seed", default_seed), model, get_or<std::string>(j, "id", model));
    } else if (kind == "http") {
        if (!j.contains("model")) throw ConfigError("http provider needs a 'model'");
        p = ProviderConfig::preset(j["model"].get<std::string>());
        p.provider_id = get_or<std::string>(j, "id", p.provider_id);
        p.endpoint_url = get_or<std::string>(j, "endpoint", p.endpoint_url);
        p.max_tokens = get_or<int>(j, "max_tokens", p.max_tokens);
        if (j.contains("temperature") && !j["temperature"].is_null()) p.temperature = j["temperature"].get<double>();
        p.request_timeout = std::chrono::milliseconds(get_or<long>(j, "timeout_ms", p.request_timeout.count()));
        p.max_retries = get_or<int>(j, "max_retries", p.max_retries);
        p.initial_backoff = std::chrono::milliseconds(get_or<long>(j, "backoff_ms", p.initial_backoff.count()));
        p.api_key_env = get_or<std::string>(j, "api_key_env", p.api_key_env);
    } else {
        throw ConfigError(fmt::format("unknown provider kind '{}' (expected mock or http)", kind));
    }
    return p;
}

std::string json_path(const std::filesystem::path &p) { return p.generic_string(); }

std::string compact_number(double v) {
    auto s = fmt::format("{:.2f}", round_half_up(v, 2));
    while (s.ends_with('0')) s.pop_back();
    if (s.ends_with('.')) s.pop_back();
    return s;
}

json optional_number(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

json optional_rounded(const std::optional<double> &v, int decimals) {
    return v ? json(round_half_up(*v, decimals)) : json(nullptr);
}

std::string sidecar_name(const std::filesystem::path &csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p.filename().string();
}

// --- evaluation sections ---------------------------------------------------

struct UnmatchedEntry {
    std::string question;
    std::size_t words = 0;
    double best_similarity = 0.0;
    std::vector<std::string> categories;
};

struct Section {
    std::string ontology;
    std::string template_id;
    std::string model;
    std::string provider_id;
    std::string file;
    std::size_t n_questions = 0;
    std::size_t n_triples = 0;
    std::size_t n_candidates = 0;
    std::optional<EvalMetrics> metrics;
    StatsRow stats;
    std::vector<UnmatchedEntry> unmatched;
    std::optional<double> label_precision;
};

json stats_json(const StatsRow &s, bool rounded) {
    const int d = 2;
    const auto num = [&](const std::optional<double> &v) { return rounded ? optional_rounded(v, d) : optional_number(v); };
    return json{{"n_unmatched", s.n_unmatched}, {"pct_unmatched", optional_number(s.pct_unmatched)},
                {"mean", num(s.mean)},           {"std", num(s.std)},
                {"min", num(s.min)},             {"p25", num(s.p25)},
                {"p50", num(s.p50)},             {"max", num(s.max)}};
}

json section_json(const Section &s) {
    json j{{"ontology", s.ontology},   {"template", s.template_id}, {"model", s.model},
           {"provider_id", s.provider_id}, {"file", s.file}};
    j["counts"] = {{"n_questions", s.n_questions}, {"n_triples", s.n_triples}, {"n_candidates", s.n_candidates}};
    const double qt = mean_questions_per_triple(s.n_questions, s.n_triples);
    j["mean_q_per_triple"] = qt;
    j["mean_q_per_triple_rounded"] = round_half_up(qt, 2);
    if (s.metrics) {
        const auto &m = *s.metrics;
        j["counts"]["n_validated"] = m.tp;
        j["counts"]["n_design"] = m.n_design;
        j["counts"]["n_unmatched"] = m.fn;
        j["metrics"] = {{"tp", m.tp},
                        {"fp", m.fp},
                        {"fn", m.fn},
                        {"precision", m.precision},
                        {"recall", m.recall},
                        {"f1", m.f1},
                        {"precision_undefined", m.precision_undefined},
                        {"recall_undefined", m.recall_undefined}};
        j["metrics_rounded"] = {{"precision", round_half_up(m.precision, 4)},
                                {"recall", round_half_up(m.recall, 4)},
                                {"f1", round_half_up(m.f1, 4)}};
        j["unmatched_stats"] = stats_json(s.stats, false);
        j["unmatched_stats_rounded"] = stats_json(s.stats, true);
        json list = json::array();
        for (const auto &u : s.unmatched) {
            list.push_back({{"question", u.question},
                            {"word_count", u.words},
                            {"best_similarity", u.best_similarity},
                            {"categories", u.categories}});
        }
        j["unmatched_design"] = std::move(list);
    }
    if (s.label_precision) {
        j["label_precision"] = *s.label_precision;
        j["label_precision_rounded"] = round_half_up(*s.label_precision, 4);
    }
    return j;
}

const std::vector<std::string> &summary_header() {
    static const std::vector<std::string> header{
        "Ontology",  "Prompt",        "LLM",     "No. Q.", "Mean Q/T", "No. Candidate CQs", "No. Validated CQs",
        "Precision", "Recall",        "F1",      "Unmatched CQs", "Unmatched %", "Mean",  "Std",
        "Min",       "0.25",          "0.50",    "Max",    "Label Precision"};
    return header;
}

std::vector<std::string> summary_row(const json &s) {
    const auto dash = [](const json &v, auto fmt_fn) -> std::string {
        return v.is_null() ? std::string("-") : fmt_fn(v.get<double>());
    };
    const auto four = [](double v) { return fmt::format("{:.4f}", v); };
    const auto compact = [](double v) { return compact_number(v); };
    std::vector<std::string> row{s["ontology"].get<std::string>(), s["template"].get<std::string>(),
                                 s["model"].get<std::string>(), std::to_string(s["counts"]["n_questions"].get<std::size_t>()),
                                 fmt::format("{:.2f}", s["mean_q_per_triple_rounded"].get<double>()),
                                 std::to_string(s["counts"]["n_candidates"].get<std::size_t>())};
    if (s.contains("metrics")) {
        const auto &m = s["metrics_rounded"];
        const auto &st = s["unmatched_stats_rounded"];
        row.push_back(std::to_string(s["counts"]["n_validated"].get<std::size_t>()));
        row.push_back(four(m["precision"].get<double>()));
        row.push_back(four(m["recall"].get<double>()));
        row.push_back(four(m["f1"].get<double>()));
        row.push_back(std::to_string(st["n_unmatched"].get<std::size_t>()));
        row.push_back(st["pct_unmatched"].is_null() ? "-"
                                                    : fmt::format("{}%", compact_number(st["pct_unmatched"].get<double>())));
        for (const char *key : {"mean", "std", "min", "p25", "p50", "max"}) {
            row.push_back(dash(st[key], compact));
        }
    } else {
        row.insert(row.end(), 12, "-");
    }
    row.push_back(s.contains("label_precision_rounded") ? four(s["label_precision_rounded"].get<double>()) : "-");
    return row;
}

std::string summary_csv(const json &report) {
    std::string out = csv_line(summary_header());
    for (const auto &s : report["sections"]) {
        out += csv_line(summary_row(s));
    }
    return out;
}

std::vector<Section> sections_from_fixture(const std::string &path) {
    const auto doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded()) {
        throw ConfigError(fmt::format("counts fixture '{}' is not valid JSON", path));
    }
    const json &rows = doc.is_array() ? doc : doc.value("rows", json::array());
    std::vector<Section> out;
    for (const auto &r : rows) {
        reject_unknown_keys(r, "counts fixture row",
                            {"ontology", "template", "model", "n_questions", "n_triples", "n_candidates", "n_validated",
                             "n_unmatched", "n_design", "unmatched_word_counts"});
        Section s;
        s.ontology = get_or<std::string>(r, "ontology", "");
        s.template_id = get_or<std::string>(r, "template", "");
        s.model = get_or<std::string>(r, "model", "");
        s.provider_id = s.model;
        s.n_questions = r.at("n_questions").get<std::size_t>();
        s.n_triples = r.at("n_triples").get<std::size_t>();
        s.n_candidates = r.at("n_candidates").get<std::size_t>();
        const auto validated = r.at("n_validated").get<std::size_t>();
        const auto unmatched = r.at("n_unmatched").get<std::size_t>();
        const auto design = get_or<std::size_t>(r, "n_design", unmatched);
        s.metrics = metrics_from_counts(s.n_candidates, validated, unmatched, design, s.n_questions, s.n_triples);
        const auto words = get_or<std::vector<std::size_t>>(r, "unmatched_word_counts", {});
        if (!words.empty() && words.size() != unmatched) {
            throw ConfigError("unmatched_word_counts must list one count per unmatched design CQ");
        }
        s.stats = unmatched_stats(words, design);
        s.stats.n_unmatched = unmatched;
        if (words.empty() && unmatched > 0) {
            s.stats.pct_unmatched = round_half_up(100.0 * static_cast<double>(unmatched) / static_cast<double>(design), 0);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::filesystem::path> question_files(const std::filesystem::path &dir) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError(fmt::format("output directory '{}' does not exist", dir.string()));
    }
    for (const auto &entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && name.starts_with("questions_") && name.ends_with(".csv")) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

// --- configuration ---------------------------------------------------------

RunConfig RunConfig::parse_json(std::string_view text) {
    const auto j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("run configuration must be a JSON object");
    }
    reject_unknown_keys(j, "run configuration",
                        {"ontologies", "format", "templates", "template_files", "providers", "filtration", "matcher",
                         "design_cqs", "output_dir", "cache_dir", "parallelism", "seed", "global_dedup",
                         "counts_fixture", "validation_labels"});
    RunConfig cfg;
    cfg.ontology_paths = get_or<std::vector<std::string>>(j, "ontologies", {});
    if (j.contains("format")) {
        cfg.format = parse_format_name(j["format"].get<std::string>());
        if (!cfg.format) throw ConfigError("format must be ntriples or turtle");
    }
    cfg.templates = get_or<std::vector<std::string>>(j, "templates", cfg.templates);
    cfg.template_files = get_or<std::vector<std::string>>(j, "template_files", {});
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    for (const auto &p : j.value("providers", json::array())) {
        cfg.providers.push_back(provider_from_json(p, cfg.seed));
    }
    if (j.contains("filtration")) {
        const auto &f = j["filtration"];
        reject_unknown_keys(f, "filtration",
                            {"dedup_threshold", "strictness", "primitive_lexicon", "narrative_patterns",
                             "strict_keywords"});
        cfg.filtration.dedup_ratio_threshold = get_or<int>(f, "dedup_threshold", cfg.filtration.dedup_ratio_threshold);
        if (f.contains("strictness")) {
            const auto s = parse_strictness(f["strictness"].get<std::string>());
            if (!s) throw ConfigError("strictness must be off, lenient or strict");
            cfg.filtration.strictness = *s;
        }
        if (f.contains("primitive_lexicon")) {
            cfg.filtration.primitive_lexicon = PatternSet::load(f["primitive_lexicon"].get<std::string>());
        }
        if (f.contains("narrative_patterns")) {
            cfg.filtration.narrative_patterns = PatternSet::load(f["narrative_patterns"].get<std::string>());
        }
        cfg.filtration.strict_keywords = get_or(f, "strict_keywords", cfg.filtration.strict_keywords);
    }
    if (j.contains("matcher")) {
        const auto &m = j["matcher"];
        reject_unknown_keys(m, "matcher", {"backend", "threshold", "endpoint", "dimension", "batch_size", "timeout_ms"});
        if (m.contains("backend")) {
            const auto b = parse_embedding_backend(m["backend"].get<std::string>());
            if (!b) throw ConfigError("matcher backend must be lexical_fallback or http_embedding");
            cfg.matcher.backend = *b;
        }
        cfg.matcher.similarity_threshold = get_or<double>(m, "threshold", cfg.matcher.similarity_threshold);
        cfg.matcher.endpoint_url = get_or<std::string>(m, "endpoint", cfg.matcher.endpoint_url);
        cfg.matcher.dimension = get_or<std::size_t>(m, "dimension", cfg.matcher.dimension);
        cfg.matcher.batch_size = get_or<std::size_t>(m, "batch_size", cfg.matcher.batch_size);
        cfg.matcher.request_timeout =
            std::chrono::milliseconds(get_or<long>(m, "timeout_ms", cfg.matcher.request_timeout.count()));
    }
    if (j.contains("design_cqs")) cfg.design_cq_path = j["design_cqs"].get<std::string>();
    cfg.output_dir = get_or<std::string>(j, "output_dir", cfg.output_dir.string());
    if (j.contains("cache_dir") && !j["cache_dir"].is_null()) cfg.cache_dir = j["cache_dir"].get<std::string>();
    cfg.parallelism = get_or<std::size_t>(j, "parallelism", cfg.parallelism);
    cfg.global_dedup = get_or<bool>(j, "global_dedup", false);
    if (j.contains("counts_fixture")) cfg.counts_fixture = j["counts_fixture"].get<std::string>();
    if (j.contains("validation_labels")) cfg.validation_labels = j["validation_labels"].get<std::string>();
    return cfg;
}

RunConfig RunConfig::load(const std::string &path) { return parse_json(read_file(path)); }

void RunConfig::validate_for_generation() const {
    if (ontology_paths.empty()) throw ConfigError("no ontology given");
    if (templates.empty() && template_files.empty()) throw ConfigError("no prompt template selected");
    if (providers.empty()) throw ConfigError("no provider configured");
    if (parallelism == 0) throw ConfigError("parallelism must be at least 1");
    std::set<std::string> models;
    std::set<std::string> ids;
    for (const auto &p : providers) {
        p.validate();
        if (!models.insert(safe_file_component(p.model_name)).second) {
            throw ConfigError(fmt::format("two providers write to the same file name for model '{}'", p.model_name));
        }
        if (!ids.insert(p.provider_id).second) {
            throw ConfigError(fmt::format("provider id '{}' is used twice", p.provider_id));
        }
    }
    filtration.validate();
}

std::string safe_file_component(std::string_view name) {
    std::string out(name);
    for (auto &c : out) {
        const auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || c == '.' || c == '_' || c == '-')) c = '_';
    }
    return out;
}

std::string questions_file_name(std::string_view template_id, std::string_view model_name) {
    return fmt::format("questions_{}_{}.csv", safe_file_component(template_id), safe_file_component(model_name));
}

std::filesystem::path ontology_output_dir(const RunConfig &cfg, std::size_t ontology_index) {
    if (cfg.ontology_paths.size() <= 1) return cfg.output_dir;
    return cfg.output_dir /
           safe_file_component(std::filesystem::path(cfg.ontology_paths.at(ontology_index)).stem().string());
}

std::vector<PromptTemplate> resolve_templates(const RunConfig &cfg) {
    std::vector<PromptTemplate> out;
    for (const auto &id : cfg.templates) out.push_back(builtin_template(id));
    for (const auto &path : cfg.template_files) out.push_back(load_template_file(path));
    std::set<std::string> seen;
    for (const auto &t : out) {
        if (!seen.insert(t.id).second) throw ConfigError(fmt::format("template '{}' selected twice", t.id));
    }
    return out;
}

// --- extract -----------------------------------------------------------------

std::string statements_tsv(const StatementSet &set) {
    const auto esc = [](std::string_view s) {
        std::string out;
        for (const char c : s) {
            switch (c) {
                case '\t': out += "\\t"; break;
                case '\n': out += "\\n"; break;
                case '\r': out += "\\r"; break;
                case '\\': out += "\\\\"; break;
                default: out.push_back(c);
            }
        }
        return out;
    };
    const auto label = [](const Term &t) { return t.label.value_or(t.lexical); };
    std::string out = "ordinal\tsubject_label\tpredicate_label\tobject_label\tsubject\tpredicate\tobject\n";
    for (const auto &s : set.statements) {
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", s.ordinal, esc(label(s.subject)), esc(label(s.predicate)),
                           esc(label(s.object)), esc(s.subject.lexical), esc(s.predicate.lexical),
                           esc(s.object.lexical));
    }
    return out;
}

ExtractResult run_extract(const RunConfig &cfg) {
    if (cfg.ontology_paths.empty()) throw ConfigError("no ontology given");
    ExtractResult result;
    for (std::size_t i = 0; i < cfg.ontology_paths.size(); ++i) {
        auto set = ingest_file(cfg.ontology_paths[i], cfg.format);
        const auto path = ontology_output_dir(cfg, i) / "statements.tsv";
        write_file_atomic(path, statements_tsv(set));
        std::fprintf(stderr, "%s: parsed %zu, excluded_blank %zu, excluded_opaque %zu, kept %zu\n",
                     cfg.ontology_paths[i].c_str(), set.counts.parsed, set.counts.excluded_blank,
                     set.counts.excluded_opaque, set.counts.kept);
        result.files.push_back(path);
        result.sets.push_back(std::move(set));
    }
    return result;
}

// --- generate ----------------------------------------------------------------

GenerateResult run_generate(const RunConfig &cfg) {
    cfg.validate_for_generation();
    const auto templates = resolve_templates(cfg);
    Gateway gateway(cfg.cache_dir);
    GenerateResult result;

    for (std::size_t oi = 0; oi < cfg.ontology_paths.size(); ++oi) {
        const auto &onto_path = cfg.ontology_paths[oi];
        const auto set = ingest_file(onto_path, cfg.format);
        const auto dir = ontology_output_dir(cfg, oi);
        auto gen = generate_all(set.statements, templates, cfg.providers, gateway, cfg.parallelism);

        std::set<std::pair<std::string, std::string>> failed;
        for (const auto &f : gen.failures) {
            failed.emplace(f.template_id, f.provider_id);
            result.failures.push_back(
                fmt::format("{}: template {} / provider {}: {}", onto_path, f.template_id, f.provider_id, f.message));
        }

        // Records per cell, in statement order, for cells that completed.
        std::vector<std::pair<const PromptTemplate *, const ProviderConfig *>> cells;
        std::vector<std::vector<GenerationRecord>> cell_records;
        for (const auto &t : templates) {
            for (const auto &p : cfg.providers) {
                if (failed.contains({t.id, p.provider_id})) continue;
                cells.emplace_back(&t, &p);
                cell_records.emplace_back();
            }
        }
        for (auto &rec : gen.records) {
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (cells[c].first->id == rec.template_id && cells[c].second->provider_id == rec.provider_id) {
                    cell_records[c].push_back(std::move(rec));
                    break;
                }
            }
        }

        std::vector<std::vector<CandidateCQ>> cell_candidates(cells.size());
        if (cfg.global_dedup) {
            std::vector<GenerationRecord> all;
            for (const auto &recs : cell_records) all.insert(all.end(), recs.begin(), recs.end());
            auto filtered = filter_questions(all, cfg.filtration);
            for (auto &cq : filtered) {
                for (std::size_t c = 0; c < cells.size(); ++c) {
                    if (cells[c].first->id == cq.template_id && cells[c].second->provider_id == cq.provider_id) {
                        cell_candidates[c].push_back(std::move(cq));
                        break;
                    }
                }
            }
        } else {
            for (std::size_t c = 0; c < cells.size(); ++c) {
                cell_candidates[c] = filter_questions(cell_records[c], cfg.filtration);
            }
        }

        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto &[tmpl, provider] = cells[c];
            const auto &candidates = cell_candidates[c];
            const auto kept = kept_texts(candidates);
            const auto csv_path = dir / questions_file_name(tmpl->id, provider->model_name);
            write_file_atomic(csv_path, questions_csv(kept));

            std::map<std::string, std::size_t> removed;
            json questions = json::array();
            for (const auto &cq : candidates) {
                json q{{"text", cq.text}, {"statement_ordinal", cq.statement_ordinal}, {"status", cq.kept() ? "kept" : "removed"}};
                if (cq.removal_reason) {
                    q["reason"] = to_string(*cq.removal_reason);
                    ++removed[std::string(to_string(*cq.removal_reason))];
                }
                questions.push_back(std::move(q));
            }
            std::size_t cached = 0;
            std::size_t truncated = 0;
            for (const auto &rec : cell_records[c]) {
                cached += rec.from_cache ? 1 : 0;
                truncated += rec.truncated ? 1 : 0;
            }
            json sidecar{{"ontology", onto_path},
                         {"template", tmpl->id},
                         {"provider_id", provider->provider_id},
                         {"model", provider->model_name},
                         {"provider_kind", provider->is_mock() ? "mock" : "http"},
                         {"n_triples", set.statements.size()},
                         {"n_questions", candidates.size()},
                         {"n_candidates", kept.size()},
                         {"ingest",
                          {{"parsed", set.counts.parsed},
                           {"excluded_blank", set.counts.excluded_blank},
                           {"excluded_opaque", set.counts.excluded_opaque},
                           {"kept", set.counts.kept}}},
                         {"filtration",
                          {{"dedup_threshold", cfg.filtration.dedup_ratio_threshold},
                           {"strictness", to_string(cfg.filtration.strictness)},
                           {"dedup_scope", cfg.global_dedup ? "ontology" : "file"}}},
                         {"removed", removed},
                         {"responses", cell_records[c].size()},
                         {"cache_hits", cached},
                         {"truncated_responses", truncated},
                         {"questions", std::move(questions)}};
            if (provider->is_mock()) sidecar["seed"] = provider->seed;
            write_file_atomic(dir / sidecar_name(csv_path), sidecar.dump(2) + "\n");
            result.files.push_back(csv_path);
        }
    }
    result.provider_calls = gateway.provider_calls();
    result.cache_hits = gateway.cache_hits();
    return result;
}

// --- filter ------------------------------------------------------------------

std::vector<CandidateCQ> run_filter(const std::filesystem::path &input, const std::filesystem::path &output,
                                    const FiltrationConfig &cfg) {
    cfg.validate();
    std::vector<CandidateCQ> candidates;
    for (auto &q : read_questions_csv(input)) {
        CandidateCQ cq;
        cq.text = std::move(q);
        candidates.push_back(std::move(cq));
    }
    auto filtered = filter_candidates(std::move(candidates), cfg);
    write_file_atomic(output, questions_csv(kept_texts(filtered)));
    return filtered;
}

// --- evaluate ----------------------------------------------------------------

EvaluateResult run_evaluate(const RunConfig &cfg) {
    std::vector<Section> sections;
    json header;
    if (cfg.counts_fixture) {
        sections = sections_from_fixture(*cfg.counts_fixture);
        header = {{"mode", "counts_fixture"}};
    } else {
        if (!cfg.design_cq_path && !cfg.validation_labels) {
            throw ConfigError("evaluation needs design CQs, validation labels or a counts fixture");
        }
        std::optional<DesignCQSet> design;
        if (cfg.design_cq_path) {
            design = DesignCQSet::load(*cfg.design_cq_path);
            if (design->questions.empty()) throw ConfigError("design CQ set is empty");
            cfg.matcher.validate();
        }
        std::optional<ValidationLabels> labels;
        if (cfg.validation_labels) labels = ValidationLabels::load(*cfg.validation_labels);

        header = {{"mode", design ? "matching" : "labels"}};
        if (design) {
            header["design_cqs"] = *cfg.design_cq_path;
            header["n_design"] = design->questions.size();
            header["matcher"] = {{"backend", to_string(cfg.matcher.backend)},
                                 {"threshold", cfg.matcher.similarity_threshold},
                                 {"dimension", cfg.matcher.dimension}};
        }

        const std::size_t n_dirs = std::max<std::size_t>(1, cfg.ontology_paths.size());
        std::map<std::string, Vocabulary> vocabularies;
        for (std::size_t oi = 0; oi < n_dirs; ++oi) {
            const auto dir = cfg.ontology_paths.empty() ? cfg.output_dir : ontology_output_dir(cfg, oi);
            for (const auto &csv_path : question_files(dir)) {
                Section s;
                const auto kept = read_questions_csv(csv_path);
                s.n_candidates = kept.size();
                s.file = json_path(std::filesystem::relative(csv_path, cfg.output_dir));
                std::string onto_path = cfg.ontology_paths.empty() ? std::string() : cfg.ontology_paths[oi];
                const auto side = csv_path.parent_path() / sidecar_name(csv_path);
                if (std::filesystem::exists(side)) {
                    const auto j = json::parse(read_file(side));
                    s.template_id = j.at("template").get<std::string>();
                    s.model = j.at("model").get<std::string>();
                    s.provider_id = j.value("provider_id", s.model);
                    s.n_questions = j.at("n_questions").get<std::size_t>();
                    s.n_triples = j.at("n_triples").get<std::size_t>();
                    if (onto_path.empty()) onto_path = j.value("ontology", "");
                } else {
                    if (onto_path.empty()) {
                        throw ConfigError(fmt::format("'{}' has no sidecar and no ontology was given to count triples",
                                                      csv_path.string()));
                    }
                    auto stem = csv_path.stem().string().substr(std::string_view("questions_").size());
                    const auto cut = stem.find('_');
                    s.template_id = stem.substr(0, cut);
                    s.model = cut == std::string::npos ? std::string() : stem.substr(cut + 1);
                    s.provider_id = s.model;
                    s.n_questions = kept.size();
                    s.n_triples = ingest_file(onto_path, cfg.format).statements.size();
                }
                s.ontology = onto_path.empty() ? dir.filename().string()
                                               : std::filesystem::path(onto_path).stem().string();

                if (design) {
                    const auto report = match_candidates(kept, *design, cfg.matcher);
                    s.metrics = compute_metrics(report, s.n_questions, s.n_triples);
                    const Vocabulary *vocab = nullptr;
                    if (!onto_path.empty() && std::filesystem::exists(onto_path)) {
                        auto it = vocabularies.find(onto_path);
                        if (it == vocabularies.end()) {
                            it = vocabularies.emplace(onto_path, build_vocabulary(ingest_file(onto_path, cfg.format)))
                                     .first;
                        }
                        vocab = &it->second;
                    }
                    std::vector<std::size_t> words;
                    for (const auto idx : report.unmatched_design()) {
                        UnmatchedEntry u;
                        u.question = design->questions[idx];
                        u.words = word_count(u.question);
                        u.best_similarity = report.design_coverage[idx].similarity;
                        if (is_aggregation_question(u.question)) u.categories.emplace_back("aggregation");
                        if (vocab && !grounding_check(u.question, *vocab).grounded) {
                            u.categories.emplace_back("ungrounded");
                        }
                        words.push_back(u.words);
                        s.unmatched.push_back(std::move(u));
                    }
                    s.stats = unmatched_stats(words, design->questions.size());
                }
                if (labels) s.label_precision = precision_from_labels(std::span<const std::string>(kept), *labels);
                sections.push_back(std::move(s));
            }
        }
        if (sections.empty()) {
            throw ConfigError(fmt::format("no questions_*.csv files found under '{}'", cfg.output_dir.string()));
        }
    }

    json report = header;
    report["sections"] = json::array();
    for (const auto &s : sections) report["sections"].push_back(section_json(s));

    EvaluateResult result;
    result.report_json = cfg.output_dir / "report.json";
    result.summary_csv = cfg.output_dir / "summary.csv";
    result.sections = sections.size();
    write_file_atomic(result.report_json, report.dump(2) + "\n");
    write_file_atomic(result.summary_csv, summary_csv(report));
    return result;
}

// --- report ------------------------------------------------------------------

std::string render_report(std::string_view report_json) {
    const auto report = json::parse(report_json, nullptr, false);
    if (report.is_discarded() || !report.contains("sections")) {
        throw ConfigError("not a report.json document");
    }
    std::vector<std::vector<std::string>> rows{summary_header()};
    for (const auto &s : report["sections"]) rows.push_back(summary_row(s));

    const auto render = [&](std::initializer_list<std::size_t> columns) {
        std::vector<std::size_t> width;
        for (const auto c : columns) {
            std::size_t w = 0;
            for (const auto &r : rows) w = std::max(w, r[c].size());
            width.push_back(w);
        }
        std::string out;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            std::size_t k = 0;
            std::string line;
            for (const auto c : columns) {
                if (k > 0) line += "  ";
                line += k < 3 ? fmt::format("{:<{}}", rows[r][c], width[k]) : fmt::format("{:>{}}", rows[r][c], width[k]);
                ++k;
            }
            while (line.ends_with(' ')) line.pop_back();
            out += line + "\n";
            if (r == 0) {
                std::size_t total = 0;
                for (const auto w : width) total += w;
                out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
            }
        }
        return out;
    };
    std::string out = "Performance\n";
    out += render({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 18});
    out += "\nUnmatched design CQs (word counts)\n";
    out += render({0, 1, 2, 10, 11, 12, 13, 14, 15, 16, 17});
    return out;
}

}  // namespace retrofit
