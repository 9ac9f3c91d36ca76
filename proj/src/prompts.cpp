#include "retrofit/prompts.hpp"

#include "retrofit/error.hpp"

#include <fmt/format.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace retrofit {
namespace {

// Texts are kept verbatim, including the singular "relevant question" and the
// missing final period of P3.
const std::array<PromptTemplate, 3> kTemplates{{
    {"P1", "Based on <statement>, generate a list of relevant question", true},
    {"P2",
     "Based on the <statement>, generate a list of competency question. Definition of competency questions: "
     "the questions that outline the scope of an ontology and provide an idea about the knowledge that needs "
     "to be entailed in the ontology.",
     true},
    {"P3",
     "As an ontology engineer, generate a list of competency questions based on the <statement>. Definition "
     "of competency questions: the questions that outline the scope of ontology and provide an idea about the "
     "knowledge that needs to be entailed in the ontology",
     true},
}};

std::size_t count_slots(std::string_view body) {
    std::size_t n = 0;
    for (auto pos = body.find(kStatementSlot); pos != std::string_view::npos;
         pos = body.find(kStatementSlot, pos + kStatementSlot.size())) {
        ++n;
    }
    return n;
}

const std::string &label_of(const Term &t, std::string_view role) {
    if (!t.label || t.label->empty()) {
        throw LabelError(fmt::format("statement {} has no readable label: {}", role, t.lexical));
    }
    return *t.label;
}

}  // namespace

std::span<const PromptTemplate> list_templates() { return kTemplates; }

const PromptTemplate &builtin_template(std::string_view id) {
    for (const auto &t : kTemplates) {
        if (t.id == id) {
            return t;
        }
    }
    throw TemplateError(fmt::format("unknown prompt template '{}'", id));
}

PromptTemplate load_template_file(const std::string &path, std::string id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TemplateError(fmt::format("cannot open template file '{}'", path));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    std::string body = buffer.str();
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) {
        body.pop_back();
    }
    if (count_slots(body) != 1) {
        throw TemplateError(fmt::format("template file '{}' must contain exactly one {} slot", path, kStatementSlot));
    }
    if (id.empty()) {
        id = std::filesystem::path(path).stem().string();
    }
    for (const auto &t : kTemplates) {
        if (t.id == id) {
            throw TemplateError(fmt::format("template id '{}' clashes with a built-in template", id));
        }
    }
    return PromptTemplate{std::move(id), std::move(body), false};
}

std::string render_statement(const Statement &s) {
    return fmt::format("['{}', '{}', '{}']", label_of(s.subject, "subject"), label_of(s.predicate, "predicate"),
                       label_of(s.object, "object"));
}

PromptInstance render_prompt(const PromptTemplate &tmpl, const Statement &s) {
    const std::string statement = render_statement(s);
    std::string rendered = tmpl.body;
    const auto slot = rendered.find(kStatementSlot);
    if (slot == std::string::npos) {
        throw TemplateError(fmt::format("template '{}' has no {} slot", tmpl.id, kStatementSlot));
    }
    rendered.replace(slot, kStatementSlot.size(), statement);
    if (tmpl.append_statement) {
        rendered += ' ';
        rendered += statement;
    }
    return PromptInstance{tmpl.id, s.ordinal, std::move(rendered)};
}

PromptInstance render_prompt(std::string_view template_id, const Statement &s) {
    return render_prompt(builtin_template(template_id), s);
}

}  // namespace retrofit
