#include <gtest/gtest.h>

#include "support/test_support.hpp"
#include "tfheval/process.hpp"
#include "tfheval/toolchain.hpp"

using namespace tfheval;
using namespace tfheval::testing;

namespace {

const char* kOrAsAnd = R"(#include <tfhe/tfhe.h>

void or_gate(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk) {
    bootsAND(result, a, b, bk);
}
)";

const char* kMissingSemicolon = R"(#include <tfhe/tfhe.h>

void and_gate(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk) {
    LweSample* tmp = new_gate_bootstrapping_ciphertext(bk->params);
    bootsAND(tmp, a, b, bk);
    bootsCOPY(result, tmp, bk);
    delete_gate_bootstrapping_ciphertext(tmp)
}
)";

const char* kHallucinated = R"(#include <tfhe/tfhe.h>

void and_gate(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk) {
    bootsNAND_typo(result, a, b, bk);
}
)";

const char* kDeclaredButMissing = R"(#include <tfhe/tfhe.h>

void bootsSELECT(LweSample* r, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk);

void and_gate(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk) {
    bootsSELECT(result, a, b, bk);
}
)";

const char* kInfiniteLoop = R"(#include <tfhe/tfhe.h>

void or_gate(LweSample* result, const LweSample* a, const LweSample* b, const TFheGateBootstrappingCloudKeySet* bk) {
    volatile int spin = 1;
    while (spin) {
    }
    bootsOR(result, a, b, bk);
}
)";

class ToolchainTest : public ::testing::Test {
protected:
    ToolchainTest() : tc_(stub_toolchain_config(dir_.path()), load_api_surface(corpus_dir() / "api_surface.txt")) {}

    WorkspaceKey key(const std::string& task, int iteration = 1) { return {task, "m", "baseline", 1, iteration}; }

    TempDir dir_;
    CompilerToolchain tc_;
};

}  // namespace

// ---- process runner -------------------------------------------------------------

TEST(Process, CapturesOutputAndExitCode) {
    const auto r = run_process({"sh", "-c", "echo out; echo err 1>&2; exit 3"}, {});
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_EQ(r.out, "out\n");
    EXPECT_EQ(r.err, "err\n");
    EXPECT_FALSE(r.ok());
}

TEST(Process, MergesStderr) {
    ProcessOptions o;
    o.merge_stderr = true;
    const auto r = run_process({"sh", "-c", "echo a; echo b 1>&2"}, o);
    EXPECT_EQ(r.out, "a\nb\n");
}

TEST(Process, TimesOutAndKillsGroup) {
    ProcessOptions o;
    o.timeout = std::chrono::milliseconds(300);
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_process({"sh", "-c", "sleep 30 & sleep 30"}, o);
    EXPECT_TRUE(r.timed_out);
    EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
}

TEST(Process, PassesEnvironmentAndCwd) {
    TempDir dir;
    ProcessOptions o;
    o.cwd = dir.path();
    o.env = {{"TFHEVAL_PROBE", "42"}};
    const auto r = run_process({"sh", "-c", "echo $TFHEVAL_PROBE; pwd"}, o);
    EXPECT_EQ(r.out, "42\n" + fs::canonical(dir.path()).string() + "\n");
}

TEST(Process, MissingExecutableThrows) {
    EXPECT_THROW(run_process({"tfheval-no-such-binary"}, {}), ProcessError);
    EXPECT_TRUE(find_executable("tfheval-no-such-binary").empty());
    EXPECT_FALSE(find_executable("sh").empty());
}

// ---- command templates ----------------------------------------------------------

TEST(Templates, ExpandsListPlaceholders) {
    const auto argv = expand_command("cc -c {src} -o {out} {include_dirs}",
                                     {{"{src}", {"a.c"}}, {"{out}", {"a.o"}}, {"{include_dirs}", {"-Ix", "-Iy"}}});
    EXPECT_EQ(argv, (std::vector<std::string>{"cc", "-c", "a.c", "-o", "a.o", "-Ix", "-Iy"}));
    EXPECT_EQ(expand_command("cc {include_dirs} x", {{"{include_dirs}", {}}}), (std::vector<std::string>{"cc", "x"}));
}

TEST(Templates, EmbeddedSingleValue) {
    EXPECT_EQ(expand_command("cc -o{out}", {{"{out}", {"bin"}}}), (std::vector<std::string>{"cc", "-obin"}));
    EXPECT_THROW(expand_command("cc -I{include_dirs}", {{"{include_dirs}", {"a", "b"}}}), ToolchainError);
}

TEST(Templates, RejectsMissingOrRepeatedPlaceholder) {
    EXPECT_THROW(expand_command("cc {src} {src}", {{"{src}", {"a"}}}), ToolchainError);
    EXPECT_THROW(expand_command("cc", {{"{src}", {"a"}}}), ToolchainError);
    ToolchainConfig c;
    c.compile_command_template = "cc {src}";
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

// ---- driver protocol -------------------------------------------------------------

TEST(DriverProtocol, ParsesCasesAndTotal) {
    const auto r = parse_driver_output("CASE 1 PASS\nCASE 2 FAIL\nnoise\nCASE 3 PASS\nCASE 4 FAIL\nTOTAL 2/4\n", 4, 1, false);
    EXPECT_EQ(r.passed_cases, 2);
    EXPECT_EQ(r.per_case.size(), 4u);
    EXPECT_EQ(r.reported_total, std::make_pair(2, 4));
    EXPECT_FALSE(r.passed());
}

TEST(DriverProtocol, PassNeedsMatchingTotalAndExitZero) {
    const std::string all = "CASE 1 PASS\nCASE 2 PASS\nTOTAL 2/2\n";
    EXPECT_TRUE(parse_driver_output(all, 2, 0, false).passed());
    EXPECT_FALSE(parse_driver_output(all, 2, 1, false).passed());
    EXPECT_FALSE(parse_driver_output(all, 2, 0, true).passed());
    EXPECT_FALSE(parse_driver_output("CASE 1 PASS\nCASE 2 PASS\n", 2, 0, false).passed());
    EXPECT_FALSE(parse_driver_output(all, 4, 0, false).passed());
}

TEST(DriverProtocol, DuplicatePassesCountOnce) {
    const auto r = parse_driver_output("CASE 1 PASS\nCASE 1 PASS\nCASE 1 PASS\nTOTAL 3/3\n", 3, 0, false);
    EXPECT_EQ(r.passed_cases, 1);
    EXPECT_FALSE(r.passed());
}

// ---- compile / link / run against the stub ------------------------------------------

TEST_F(ToolchainTest, GroundTruthCompilesCleanAndPasses) {
    const auto task = corpus_task("and_gate");
    const auto r = tc_.compile(read_file(task.ground_truth_tfhe), task, key("and_gate"));
    ASSERT_TRUE(r.success) << r.raw_output;
    EXPECT_EQ(r.error_count(), 0u);
    const auto out = tc_.link_and_run(r, task, key("and_gate"));
    ASSERT_TRUE(out.func.has_value());
    EXPECT_EQ(out.func->passed_cases, 4);
    EXPECT_TRUE(out.func->passed());
}

TEST_F(ToolchainTest, HallucinatedGateIsFlagged) {
    const auto task = corpus_task("and_gate");
    const auto r = tc_.compile(kHallucinated, task, key("and_gate"));
    EXPECT_FALSE(r.success);
    EXPECT_EQ(r.hallucinated_api_candidates, (std::vector<std::string>{"bootsNAND_typo"}));
    ASSERT_GE(r.error_count(), 1u);
    EXPECT_EQ(r.diagnostics[0].line, 4);
}

TEST_F(ToolchainTest, MissingSemicolonReportsLineSeven) {
    const auto task = corpus_task("and_gate");
    const auto r = tc_.compile(kMissingSemicolon, task, key("and_gate"));
    EXPECT_FALSE(r.success);
    ASSERT_EQ(r.error_count(), 1u);
    EXPECT_EQ(r.diagnostics[0].line, 7);
    EXPECT_NE(r.diagnostics[0].message.find("expected ';'"), std::string::npos);
    EXPECT_TRUE(r.hallucinated_api_candidates.empty());
}

TEST_F(ToolchainTest, OrAsAndSabotagePassesHalf) {
    const auto task = corpus_task("or_gate");
    const auto r = tc_.compile(kOrAsAnd, task, key("or_gate"));
    ASSERT_TRUE(r.success) << r.raw_output;
    const auto out = tc_.link_and_run(r, task, key("or_gate"));
    ASSERT_TRUE(out.func.has_value());
    EXPECT_EQ(out.func->passed_cases, 2);
    EXPECT_EQ(out.func->reported_total, std::make_pair(2, 4));
    EXPECT_EQ(out.func->exit_code, 1);
    EXPECT_FALSE(out.func->passed());
}

TEST_F(ToolchainTest, InfiniteLoopTimesOut) {
    auto config = stub_toolchain_config(dir_.path());
    config.run_timeout = std::chrono::milliseconds(500);
    CompilerToolchain tc(config, load_api_surface(corpus_dir() / "api_surface.txt"));
    const auto task = corpus_task("or_gate");
    const auto r = tc.compile(kInfiniteLoop, task, key("or_gate"));
    ASSERT_TRUE(r.success) << r.raw_output;
    const auto out = tc.link_and_run(r, task, key("or_gate"));
    ASSERT_TRUE(out.func.has_value());
    EXPECT_TRUE(out.func->timed_out);
    EXPECT_FALSE(out.func->passed());
}

TEST_F(ToolchainTest, UndefinedApiAtLinkTimeIsFlagged) {
    const auto task = corpus_task("and_gate");
    const auto r = tc_.compile(kDeclaredButMissing, task, key("and_gate"));
    ASSERT_TRUE(r.success) << r.raw_output;
    const auto out = tc_.link_and_run(r, task, key("and_gate"));
    ASSERT_TRUE(out.link_failure.has_value());
    EXPECT_FALSE(out.func.has_value());
    EXPECT_EQ(out.link_failure->undefined_symbols, (std::vector<std::string>{"bootsSELECT"}));
    EXPECT_EQ(out.link_failure->hallucinated_api_candidates, (std::vector<std::string>{"bootsSELECT"}));
}

TEST_F(ToolchainTest, WorkspacesAreSeparatedByKey) {
    const auto task = corpus_task("and_gate");
    tc_.compile(read_file(task.ground_truth_tfhe), task, key("and_gate", 1));
    tc_.compile(kMissingSemicolon, task, key("and_gate", 2));
    EXPECT_TRUE(fs::exists(dir_ / key("and_gate", 1).relative_path() / "candidate.o"));
    EXPECT_FALSE(fs::exists(dir_ / key("and_gate", 2).relative_path() / "candidate.o"));
    EXPECT_EQ(WorkspaceKey({"t/x", "a b", "rag", 2, 3}).relative_path(), fs::path("t_x/a_b/rag/r2/i3"));
}

TEST_F(ToolchainTest, LinkAndRunRequiresSuccessfulCompile) {
    CompileReport failed;
    EXPECT_THROW(tc_.link_and_run(failed, corpus_task("and_gate"), key("and_gate")), ToolchainError);
}

TEST(CompilerToolchain, MissingCompilerIsToolchainError) {
    TempDir dir;
    auto config = stub_toolchain_config(dir.path());
    config.compile_command_template = "tfheval-no-such-cc -c {src} -o {out} {include_dirs} {lib_dirs} {libs}";
    CompilerToolchain tc(config, {});
    EXPECT_THROW(tc.compile("int x;", corpus_task("and_gate"), {"and_gate", "m", "baseline", 1, 1}), ToolchainError);
}
