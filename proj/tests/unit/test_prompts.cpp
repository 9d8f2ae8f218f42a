#include <gtest/gtest.h>

#include "tfheval/prompts.hpp"

using namespace tfheval;

namespace {

Diagnostic error_at(int line, std::string message) {
    Diagnostic d;
    d.file = "candidate.c";
    d.line = line;
    d.column = 3;
    d.message = std::move(message);
    d.text = "candidate.c:" + std::to_string(line) + ":3: error: " + d.message;
    return d;
}

bool contains(const std::string& hay, std::string_view needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(RevisionPrompt, CompileFailureQuotesDiagnosticsVerbatim) {
    CompileReport r;
    r.diagnostics = {error_at(4, "expected ';' before '}' token"), error_at(9, "'bk' undeclared")};
    const auto p = build_revision_prompt(CompileFailure{&r});
    EXPECT_TRUE(contains(p, r.diagnostics[0].text));
    EXPECT_TRUE(contains(p, r.diagnostics[1].text));
    EXPECT_LT(p.find(r.diagnostics[0].text), p.find(r.diagnostics[1].text));
    EXPECT_TRUE(contains(p, output_format_requirement()));
}

TEST(RevisionPrompt, WarningsAreNotQuoted) {
    CompileReport r;
    auto w = error_at(2, "unused variable 'x'");
    w.severity = Severity::warning;
    r.diagnostics = {w, error_at(5, "boom")};
    const auto p = build_revision_prompt(CompileFailure{&r});
    EXPECT_FALSE(contains(p, "unused variable"));
    EXPECT_TRUE(contains(p, "boom"));
}

TEST(RevisionPrompt, WrongFormatHasOnlyTheReminder) {
    const auto p = build_revision_prompt(WrongFormat{});
    EXPECT_TRUE(contains(p, output_format_requirement()));
    EXPECT_FALSE(contains(p, "error:"));
    EXPECT_FALSE(contains(p, "compile"));
}

TEST(RevisionPrompt, HallucinatedNamesAreCalledOut) {
    CompileReport r;
    r.diagnostics = {error_at(3, "implicit declaration of function 'bootsXNOR'")};
    r.hallucinated_api_candidates = {"bootsXNOR"};
    const auto p = build_revision_prompt(CompileFailure{&r});
    EXPECT_TRUE(contains(p, "not part of the TFHE library API: bootsXNOR"));
    EXPECT_TRUE(contains(p, "Use only functions documented in the TFHE library API"));
}

TEST(RevisionPrompt, RespectsLineBudget) {
    CompileReport r;
    for (int i = 1; i <= 30; ++i) r.diagnostics.push_back(error_at(i, "error number " + std::to_string(i)));
    const auto p = build_revision_prompt(CompileFailure{&r}, {.max_bytes = 4000, .max_error_lines = 20});
    EXPECT_TRUE(contains(p, "error number 20\n"));
    EXPECT_FALSE(contains(p, "error number 21\n"));
    EXPECT_TRUE(contains(p, "[further diagnostics omitted]"));
}

TEST(RevisionPrompt, RespectsByteBudgetWithWholeLines) {
    CompileReport r;
    for (int i = 1; i <= 10; ++i) r.diagnostics.push_back(error_at(i, std::string(100, 'x')));
    const auto p = build_revision_prompt(CompileFailure{&r}, {.max_bytes = 350, .max_error_lines = 20});
    std::size_t quoted = 0;
    for (const auto& d : r.diagnostics) quoted += contains(p, d.text + "\n");
    EXPECT_EQ(quoted, 2u);  // each quoted line is about 130 bytes
}

TEST(RevisionPrompt, FallsBackToUnparsedOutput) {
    CompileReport r;
    r.unparsed_lines = {"cc1: fatal error: candidate.c: No such file or directory"};
    EXPECT_TRUE(contains(build_revision_prompt(CompileFailure{&r}), r.unparsed_lines[0]));
}

TEST(RevisionPrompt, FunctionalFailureListsFailingCases) {
    FuncReport f;
    f.total_cases = 4;
    f.passed_cases = 2;
    f.per_case = {{1, true}, {2, false}, {3, false}, {4, true}};
    const auto p = build_revision_prompt(FunctionalFailure{&f});
    EXPECT_TRUE(contains(p, "2/4 cases passed"));
    EXPECT_TRUE(contains(p, "Case 2 failed."));
    EXPECT_FALSE(contains(p, "Case 1 failed."));
}

TEST(RevisionPrompt, LinkFailureNamesUndefinedSymbols) {
    LinkReport l;
    l.undefined_symbols = {"bootsSELECT"};
    l.hallucinated_api_candidates = {"bootsSELECT"};
    const auto p = build_revision_prompt(LinkFailure{&l});
    EXPECT_TRUE(contains(p, "Undefined symbols: bootsSELECT"));
}
