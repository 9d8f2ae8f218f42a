#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "tfheval/toolchain.hpp"

namespace tfheval {

/// Instruction repeated in the system prompt and in every revision prompt.
std::string_view output_format_requirement();

/// Role instructions for the generating model.
std::string_view base_system_prompt();

struct CompileFailure {
    const CompileReport* report;
};
struct FunctionalFailure {
    const FuncReport* report;
};
struct LinkFailure {
    const LinkReport* report;
};
struct WrongFormat {};

using RevisionContext = std::variant<CompileFailure, FunctionalFailure, LinkFailure, WrongFormat>;

struct RevisionBudget {
    std::size_t max_bytes = 4000;
    std::size_t max_error_lines = 20;
};

/// Follow-up user message after a failed iteration: failure class, the first
/// error diagnostics verbatim within the budget, a note on hallucinated API
/// names and the output-format reminder.
std::string build_revision_prompt(const RevisionContext& context, const RevisionBudget& budget = {});

}  // namespace tfheval
