// retrofit-cq: command-line front end of the CQ retrofitting pipeline.

#include "retrofit/csv.hpp"
#include "retrofit/error.hpp"
#include "retrofit/pipeline.hpp"
#include "retrofit/prompts.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <map>

namespace {

using namespace retrofit;

struct FilterFlags {
    std::string strictness;
    std::optional<int> dedup_threshold;
    std::string primitive_lexicon;
    std::string narrative_patterns;

    void attach(CLI::App *app) {
        app->add_option("--strictness", strictness, "Filtration strictness: off, lenient or strict")
            ->check(CLI::IsMember({"off", "lenient", "strict"}));
        app->add_option("--dedup-threshold", dedup_threshold, "Token-sort ratio (0-100) at which questions are duplicates")
            ->check(CLI::Range(0, 100));
        app->add_option("--primitive-lexicon", primitive_lexicon, "Modelling-primitive pattern file")
            ->check(CLI::ExistingFile);
        app->add_option("--narrative-patterns", narrative_patterns, "Subjective/narrative pattern file")
            ->check(CLI::ExistingFile);
    }

    void apply(FiltrationConfig &f) const {
        if (!strictness.empty()) f.strictness = *parse_strictness(strictness);
        if (dedup_threshold) f.dedup_ratio_threshold = *dedup_threshold;
        if (!primitive_lexicon.empty()) f.primitive_lexicon = PatternSet::load(primitive_lexicon);
        if (!narrative_patterns.empty()) f.narrative_patterns = PatternSet::load(narrative_patterns);
    }
};

// "mock", "mock:<model>" or a model name resolved through the presets.
ProviderConfig provider_from_flag(const std::string &spec, std::uint64_t seed) {
    if (spec == "mock") return ProviderConfig::mock(seed);
    if (spec.starts_with("mock:")) {
        const auto model = spec.substr(5);
        return ProviderConfig::mock(seed, model, model);
    }
    return ProviderConfig::preset(spec);
}

RunConfig base_config(const std::string &config_path) {
    return config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Retrofit competency questions onto an existing ontology"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration; flags override its values")
        ->check(CLI::ExistingFile);

    // extract
    auto *extract = app.add_subcommand("extract", "List the readable statements of ontologies as statements.tsv");
    std::vector<std::string> extract_inputs;
    std::string extract_format;
    std::string extract_out;
    extract->add_option("ontologies", extract_inputs, "Ontology files (.nt, .ttl)")->check(CLI::ExistingFile);
    extract->add_option("--format", extract_format, "ntriples or turtle; inferred from the extension when omitted")
        ->check(CLI::IsMember({"ntriples", "turtle"}));
    extract->add_option("-o,--output-dir", extract_out, "Output directory");

    // generate
    auto *generate = app.add_subcommand("generate", "Prompt providers for every statement and write question CSVs");
    std::vector<std::string> gen_inputs;
    std::vector<std::string> gen_templates;
    std::vector<std::string> gen_template_files;
    std::vector<std::string> gen_providers;
    std::string gen_format;
    std::string gen_out;
    std::string gen_cache;
    std::optional<std::uint64_t> gen_seed;
    std::optional<std::size_t> gen_parallelism;
    bool gen_global_dedup = false;
    FilterFlags gen_filter;
    generate->add_option("ontologies", gen_inputs, "Ontology files")->check(CLI::ExistingFile);
    generate->add_option("--format", gen_format, "ntriples or turtle")->check(CLI::IsMember({"ntriples", "turtle"}));
    generate->add_option("-t,--template", gen_templates, "Built-in template id (repeatable; default P1 P2 P3)");
    generate->add_option("--template-file", gen_template_files, "Extra template file with one <statement> slot")
        ->check(CLI::ExistingFile);
    generate->add_option("-p,--provider", gen_providers,
                         "Provider: mock, mock:<model>, or a model name such as gpt-4 (repeatable)");
    generate->add_option("--seed", gen_seed, "Mock provider seed");
    generate->add_option("-o,--output-dir", gen_out, "Output directory");
    generate->add_option("--cache-dir", gen_cache, "Response cache directory");
    generate->add_option("-j,--parallelism", gen_parallelism, "Requests in flight")->check(CLI::PositiveNumber);
    generate->add_flag("--global-dedup", gen_global_dedup, "Deduplicate across all files of an ontology");
    gen_filter.attach(generate);

    // filter
    auto *filter = app.add_subcommand("filter", "Re-run filtration over an existing questions CSV");
    std::string filter_in;
    std::string filter_out;
    FilterFlags filter_flags;
    filter->add_option("input", filter_in, "Questions CSV")->required()->check(CLI::ExistingFile);
    filter->add_option("-o,--output", filter_out, "Filtered CSV")->required();
    filter_flags.attach(filter);

    // evaluate
    auto *evaluate = app.add_subcommand("evaluate", "Match candidates against design CQs and write report files");
    std::string eval_out;
    std::string eval_design;
    std::string eval_fixture;
    std::string eval_labels;
    std::string eval_backend;
    std::string eval_endpoint;
    std::string eval_format;
    std::optional<double> eval_threshold;
    std::vector<std::string> eval_ontologies;
    evaluate->add_option("-o,--output-dir", eval_out, "Directory holding questions_*.csv; reports go here too");
    evaluate->add_option("--design-cqs", eval_design, "Design CQs (text or CSV)")->check(CLI::ExistingFile);
    evaluate->add_option("--counts-fixture", eval_fixture, "JSON counts to audit the metric formulas without matching")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--validation-labels", eval_labels, "CSV with header question,verdict")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--threshold", eval_threshold, "Similarity threshold")->check(CLI::Range(0.0, 1.0));
    evaluate->add_option("--embedding-backend", eval_backend, "lexical_fallback or http_embedding")
        ->check(CLI::IsMember({"lexical_fallback", "http_embedding"}));
    evaluate->add_option("--embedding-endpoint", eval_endpoint, "URL of the embedding service");
    evaluate->add_option("--ontology", eval_ontologies, "Ontology files, for grounding and triple counts")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--format", eval_format, "ntriples or turtle")->check(CLI::IsMember({"ntriples", "turtle"}));

    // report
    auto *report = app.add_subcommand("report", "Print the tables of a report.json");
    std::string report_path;
    report->add_option("report", report_path, "report.json, or the directory holding it")->required();

    // templates list
    auto *templates = app.add_subcommand("templates", "Prompt templates");
    templates->require_subcommand(1);
    auto *templates_list = templates->add_subcommand("list", "Print template ids and bodies");

    CLI11_PARSE(app, argc, argv);

    try {
        if (templates_list->parsed()) {
            for (const auto &t : list_templates()) {
                std::printf("%s\t%s\n", t.id.c_str(), t.body.c_str());
            }
            return 0;
        }

        if (extract->parsed()) {
            auto cfg = base_config(config_path);
            if (!extract_inputs.empty()) cfg.ontology_paths = extract_inputs;
            if (!extract_format.empty()) cfg.format = parse_format_name(extract_format);
            if (!extract_out.empty()) cfg.output_dir = extract_out;
            const auto result = run_extract(cfg);
            for (const auto &f : result.files) std::printf("%s\n", f.string().c_str());
            return 0;
        }

        if (generate->parsed()) {
            auto cfg = base_config(config_path);
            if (!gen_inputs.empty()) cfg.ontology_paths = gen_inputs;
            if (!gen_format.empty()) cfg.format = parse_format_name(gen_format);
            if (!gen_templates.empty() || !gen_template_files.empty()) {
                cfg.templates = gen_templates;
                cfg.template_files = gen_template_files;
            }
            if (gen_seed) {
                cfg.seed = *gen_seed;
                for (auto &p : cfg.providers) {
                    if (p.is_mock()) p.seed = *gen_seed;
                }
            }
            if (!gen_providers.empty()) {
                cfg.providers.clear();
                for (const auto &spec : gen_providers) cfg.providers.push_back(provider_from_flag(spec, cfg.seed));
            }
            if (!gen_out.empty()) cfg.output_dir = gen_out;
            if (!gen_cache.empty()) cfg.cache_dir = gen_cache;
            if (gen_parallelism) cfg.parallelism = *gen_parallelism;
            if (gen_global_dedup) cfg.global_dedup = true;
            gen_filter.apply(cfg.filtration);

            const auto result = run_generate(cfg);
            for (const auto &f : result.files) std::printf("%s\n", f.string().c_str());
            std::fprintf(stderr, "provider calls %zu, cache hits %zu\n", result.provider_calls, result.cache_hits);
            for (const auto &f : result.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
            return result.ok() ? 0 : 1;
        }

        if (filter->parsed()) {
            auto cfg = base_config(config_path);
            filter_flags.apply(cfg.filtration);
            const auto filtered = run_filter(filter_in, filter_out, cfg.filtration);
            std::map<std::string, std::size_t> reasons;
            std::size_t kept = 0;
            for (const auto &cq : filtered) {
                if (cq.kept()) {
                    ++kept;
                } else {
                    ++reasons[std::string(to_string(*cq.removal_reason))];
                }
            }
            std::printf("kept %zu of %zu\n", kept, filtered.size());
            for (const auto &[reason, n] : reasons) std::printf("removed %s: %zu\n", reason.c_str(), n);
            return 0;
        }

        if (evaluate->parsed()) {
            auto cfg = base_config(config_path);
            if (!eval_out.empty()) cfg.output_dir = eval_out;
            if (!eval_design.empty()) cfg.design_cq_path = eval_design;
            if (!eval_fixture.empty()) cfg.counts_fixture = eval_fixture;
            if (!eval_labels.empty()) cfg.validation_labels = eval_labels;
            if (eval_threshold) cfg.matcher.similarity_threshold = *eval_threshold;
            if (!eval_backend.empty()) cfg.matcher.backend = *parse_embedding_backend(eval_backend);
            if (!eval_endpoint.empty()) cfg.matcher.endpoint_url = eval_endpoint;
            if (!eval_ontologies.empty()) cfg.ontology_paths = eval_ontologies;
            if (!eval_format.empty()) cfg.format = parse_format_name(eval_format);
            const auto result = run_evaluate(cfg);
            std::fputs(render_report(read_file(result.report_json)).c_str(), stdout);
            std::fprintf(stderr, "wrote %s and %s\n", result.report_json.string().c_str(),
                         result.summary_csv.string().c_str());
            return 0;
        }

        if (report->parsed()) {
            std::filesystem::path p = report_path;
            if (std::filesystem::is_directory(p)) p /= "report.json";
            std::fputs(render_report(read_file(p)).c_str(), stdout);
            return 0;
        }
    } catch (const std::exception &e) {
        std::fprintf(stderr, "retrofit-cq: %s\n", e.what());
        return 2;
    }
    return 0;
}
