#pragma once

// End-to-end orchestration behind the retrofit-cq subcommands.

#include "retrofit/filtration.hpp"
#include "retrofit/gateway.hpp"
#include "retrofit/matcher.hpp"
#include "retrofit/metrics.hpp"
#include "retrofit/ontology.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace retrofit {

struct RunConfig {
    std::vector<std::string> ontology_paths;
    std::optional<RdfFormat> format;
    std::vector<std::string> templates{"P1", "P2", "P3"};
    /// Extra templates loaded from files; their id is the file stem.
    std::vector<std::string> template_files;
    std::vector<ProviderConfig> providers;
    FiltrationConfig filtration;
    MatcherConfig matcher;
    std::optional<std::string> design_cq_path;
    std::filesystem::path output_dir = "retrofit-out";
    std::optional<std::filesystem::path> cache_dir;
    std::size_t parallelism = 4;
    std::uint64_t seed = 0;
    /// Deduplicate across every (template, provider) file of an ontology instead of per file.
    bool global_dedup = false;
    std::optional<std::string> counts_fixture;
    std::optional<std::string> validation_labels;

    /// Reads the JSON run configuration. Unknown keys are rejected.
    static RunConfig parse_json(std::string_view text);
    static RunConfig load(const std::string &path);

    void validate_for_generation() const;
};

/// Model names as they appear in file names: characters outside [A-Za-z0-9._-] become '_'.
std::string safe_file_component(std::string_view name);
std::string questions_file_name(std::string_view template_id, std::string_view model_name);

/// Output directory of one ontology: output_dir itself for single-ontology runs,
/// otherwise a subdirectory named after the ontology file stem.
std::filesystem::path ontology_output_dir(const RunConfig &cfg, std::size_t ontology_index);

std::vector<PromptTemplate> resolve_templates(const RunConfig &cfg);

/// Tab-separated statement listing with a header row.
std::string statements_tsv(const StatementSet &set);

struct ExtractResult {
    std::vector<std::filesystem::path> files;
    std::vector<StatementSet> sets;
};
ExtractResult run_extract(const RunConfig &cfg);

struct GenerateResult {
    std::vector<std::filesystem::path> files;
    std::vector<std::string> failures;
    std::size_t provider_calls = 0;
    std::size_t cache_hits = 0;

    [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
};
GenerateResult run_generate(const RunConfig &cfg);

/// Re-filters an existing questions CSV into another one.
std::vector<CandidateCQ> run_filter(const std::filesystem::path &input, const std::filesystem::path &output,
                                    const FiltrationConfig &cfg);

struct EvaluateResult {
    std::filesystem::path report_json;
    std::filesystem::path summary_csv;
    std::size_t sections = 0;
};
EvaluateResult run_evaluate(const RunConfig &cfg);

/// Plain-text tables rebuilt from a report.json document.
std::string render_report(std::string_view report_json);

}  // namespace retrofit
