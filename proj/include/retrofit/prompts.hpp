#pragma once

#include "retrofit/ontology.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace retrofit {

/// Placeholder replaced by the bracketed statement rendering.
inline constexpr std::string_view kStatementSlot = "<statement>";

struct PromptTemplate {
    /// "P1", "P2", "P3", or the name of a user-supplied template.
    std::string id;
    std::string body;
    /// Built-in templates also append the statement after the sentence.
    bool append_statement = false;
};

struct PromptInstance {
    std::string template_id;
    std::size_t statement_ordinal = 0;
    std::string rendered;
};

/// The three built-in templates, in order P1, P2, P3.
std::span<const PromptTemplate> list_templates();

/// Looks up a built-in template; throws TemplateError for unknown ids.
const PromptTemplate &builtin_template(std::string_view id);

/// Loads a user template from a text file; the body must contain exactly one slot.
PromptTemplate load_template_file(const std::string &path, std::string id = {});

/// `['subject', 'predicate', 'object']` using the derived labels.
std::string render_statement(const Statement &s);

PromptInstance render_prompt(const PromptTemplate &tmpl, const Statement &s);
PromptInstance render_prompt(std::string_view template_id, const Statement &s);

}  // namespace retrofit
