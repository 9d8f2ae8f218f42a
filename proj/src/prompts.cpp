#include "tfheval/prompts.hpp"

#include <sstream>

namespace tfheval {

namespace {

// Keeps whole lines, first ones first, until either budget is hit.
std::string take_lines(const std::vector<std::string>& lines, const RevisionBudget& budget, bool& truncated) {
    std::string out;
    std::size_t taken = 0;
    truncated = false;
    for (const auto& line : lines) {
        if (taken == budget.max_error_lines || out.size() + line.size() + 1 > budget.max_bytes) {
            truncated = true;
            break;
        }
        out += line;
        out += '\n';
        ++taken;
    }
    return out;
}

void hallucination_note(std::ostringstream& os, const std::vector<std::string>& names) {
    if (names.empty()) return;
    os << "\nThe following identifiers are not part of the TFHE library API: ";
    for (std::size_t i = 0; i < names.size(); ++i) {
        os << (i ? ", " : "") << names[i];
    }
    os << ".\nUse only functions documented in the TFHE library API.\n";
}

}  // namespace

std::string_view output_format_requirement() {
    return "Output format: reply with the complete C source file in exactly one fenced code block "
           "that starts with ```c and ends with ```. Do not define main().";
}

std::string_view base_system_prompt() {
    return "You are an expert C programmer specialising in fully homomorphic encryption with the TFHE "
           "library (gate bootstrapping over the torus). You write C code that operates on encrypted "
           "bits through the TFHE API, using the cloud key for homomorphic gate evaluation.";
}

std::string build_revision_prompt(const RevisionContext& context, const RevisionBudget& budget) {
    std::ostringstream os;
    std::visit(
        [&](const auto& ctx) {
            using T = std::decay_t<decltype(ctx)>;
            if constexpr (std::is_same_v<T, WrongFormat>) {
                os << "Your previous response did not contain a code block that could be extracted.\n";
            } else if constexpr (std::is_same_v<T, CompileFailure>) {
                const auto& r = *ctx.report;
                os << "Your previous code failed to compile"
                   << (r.timed_out ? " (the compiler timed out)" : "") << ". Compiler report:\n";
                std::vector<std::string> lines;
                for (const auto& d : r.diagnostics) {
                    if (d.severity == Severity::error) lines.push_back(d.text);
                }
                if (lines.empty()) {
                    lines = r.unparsed_lines;
                }
                bool truncated = false;
                os << take_lines(lines, budget, truncated);
                if (truncated) os << "[further diagnostics omitted]\n";
                hallucination_note(os, r.hallucinated_api_candidates);
                os << "Fix the errors and return the corrected program.\n";
            } else if constexpr (std::is_same_v<T, LinkFailure>) {
                const auto& r = *ctx.report;
                os << "Your previous code compiled but could not be linked against the TFHE library "
                      "and the test driver.\n";
                if (!r.undefined_symbols.empty()) {
                    os << "Undefined symbols:";
                    for (const auto& s : r.undefined_symbols) os << ' ' << s;
                    os << '\n';
                }
                hallucination_note(os, r.hallucinated_api_candidates);
                os << "Fix the errors and return the corrected program.\n";
            } else {
                const auto& r = *ctx.report;
                os << "Your previous code compiled but failed the functional tests";
                if (r.timed_out) os << " (the test run timed out)";
                os << ": " << r.passed_cases << "/" << r.total_cases << " cases passed.\n";
                for (const auto& [index, ok] : r.per_case) {
                    if (!ok) os << "Case " << index << " failed.\n";
                }
                os << "Fix the logic and return the corrected program.\n";
            }
        },
        context);
    os << output_format_requirement();
    return os.str();
}

}  // namespace tfheval
