#include <gtest/gtest.h>

#include "support/test_support.hpp"
#include "tfheval/process.hpp"

using namespace tfheval;
using namespace tfheval::testing;

namespace {

std::string corpus_error(const fs::path& root) {
    try {
        load_manifests(root);
    } catch (const CorpusError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Manifest, ShippedCorpusLoadsSorted) {
    const auto tasks = corpus_tasks();
    std::vector<std::string> ids;
    for (const auto& t : tasks) ids.push_back(t.task_id);
    EXPECT_EQ(ids, (std::vector<std::string>{"and_gate", "not_gate", "or_gate", "relu"}));
    for (const auto& t : tasks) {
        EXPECT_TRUE(fs::is_regular_file(t.driver)) << t.task_id;
        EXPECT_TRUE(t.ground_truth_tfhe.is_absolute());
        EXPECT_FALSE(t.description.empty());
    }
    EXPECT_EQ(corpus_task("relu").expected_cases, 8);
    EXPECT_EQ(corpus_task("not_gate").expected_cases, 2);
}

TEST(Manifest, DescriptionEscapesBecomeNewlines) {
    const auto t = parse_manifest(
        "task_id = x\n# comment\ntitle = X\ndescription = a\\nb\nreference_plaintext = r.c\n"
        "ground_truth_tfhe = g.c\ndriver = d.c\nexpected_cases = 4\n",
        "/base");
    EXPECT_EQ(t.driver, fs::path("/base/d.c"));
    EXPECT_EQ(t.description, "a\nb");
    EXPECT_EQ(t.task_id, "x");
}

TEST(Manifest, UnknownKeyRejected) {
    EXPECT_THROW(parse_manifest("task_id = x\ncolour = red\n", "/base"), CorpusError);
    EXPECT_THROW(parse_manifest("just text\n", "/base"), CorpusError);
}

TEST(Manifest, MissingDriverNamesTaskAndPath) {
    TempDir dir;
    write_fixture_task(dir.path(), "xor_gate", 4);
    fs::remove(dir / "xor_gate" / "driver.c");
    const auto err = corpus_error(dir.path());
    EXPECT_NE(err.find("xor_gate"), std::string::npos) << err;
    EXPECT_NE(err.find("driver.c"), std::string::npos) << err;
}

TEST(Manifest, EmptyGroundTruthRejected) {
    TempDir dir;
    write_fixture_task(dir.path(), "xor_gate", 4);
    write_file(dir / "xor_gate" / "ground_truth.c", "");
    EXPECT_NE(corpus_error(dir.path()).find("ground_truth.c"), std::string::npos);
}

TEST(Manifest, KnownTruthTableSizesEnforced) {
    TempDir dir;
    write_fixture_task(dir.path(), "and_gate", 3);
    EXPECT_NE(corpus_error(dir.path()).find("and_gate"), std::string::npos);
}

TEST(ApiSurface, ParsesNamesAndHeader) {
    const auto api = parse_api_surface("# c\nheader = inc/tfhe.h\n\nbootsAND\n  bootsOR  \n", "/root");
    EXPECT_EQ(api.header, fs::path("/root/inc/tfhe.h"));
    EXPECT_EQ(api.function_names, (std::set<std::string>{"bootsAND", "bootsOR"}));
    EXPECT_TRUE(api.contains("bootsOR"));
    EXPECT_FALSE(api.contains("bootsXOR"));
}

TEST(ApiSurface, ShippedSurfaceMatchesHeader) {
    const auto api = load_api_surface(corpus_dir() / "api_surface.txt");
    EXPECT_GE(api.function_names.size(), 20u);
    const auto header = read_file(api.header);
    for (const auto& name : api.function_names) {
        EXPECT_NE(header.find(" " + name + "("), std::string::npos) << name;
    }
}

// ---- ground truths through the real compiler and stub ----------------------

TEST(GroundTruth, EveryTaskPassesAllCases) {
    TempDir dir;
    CompilerToolchain toolchain(stub_toolchain_config(dir.path()), load_api_surface(corpus_dir() / "api_surface.txt"));
    for (const auto& task : corpus_tasks()) {
        SCOPED_TRACE(task.task_id);
        const WorkspaceKey key{task.task_id, "truth", "check", 1, 1};
        const auto report = toolchain.compile(read_file(task.ground_truth_tfhe), task, key);
        ASSERT_TRUE(report.success) << report.raw_output;
        const auto outcome = toolchain.link_and_run(report, task, key);
        ASSERT_TRUE(outcome.func) << (outcome.link_failure ? outcome.link_failure->raw_output : "");
        EXPECT_EQ(outcome.func->passed_cases, task.expected_cases);
        EXPECT_EQ(outcome.func->total_cases, task.expected_cases);
        EXPECT_EQ(outcome.func->reported_total, std::make_pair(task.expected_cases, task.expected_cases));
        EXPECT_EQ(outcome.func->exit_code, 0);
    }
}

TEST(GroundTruth, DriversRejectWrongGates) {
    TempDir dir;
    CompilerToolchain toolchain(stub_toolchain_config(dir.path()), load_api_surface(corpus_dir() / "api_surface.txt"));
    struct Case {
        const char* task;
        const char* from;
        const char* to;
        int expect_pass;
    };
    for (const auto& c : {Case{"or_gate", "bootsOR", "bootsAND", 2}, Case{"and_gate", "bootsAND", "bootsXOR", 1},
                          Case{"not_gate", "bootsNOT", "bootsCOPY", 0}}) {
        SCOPED_TRACE(c.task);
        const auto task = corpus_task(c.task);
        auto code = read_file(task.ground_truth_tfhe);
        const auto pos = code.find(c.from);
        ASSERT_NE(pos, std::string::npos);
        code.replace(pos, std::string(c.from).size(), c.to);
        const WorkspaceKey key{task.task_id, "mutant", "check", 1, 1};
        const auto report = toolchain.compile(code, task, key);
        ASSERT_TRUE(report.success) << report.raw_output;
        const auto outcome = toolchain.link_and_run(report, task, key);
        ASSERT_TRUE(outcome.func);
        EXPECT_EQ(outcome.func->passed_cases, c.expect_pass);
        EXPECT_FALSE(outcome.func->passed());
    }
}

// ---- stub truth tables ------------------------------------------------------

TEST(Stub, GatesMatchTruthTables) {
    const auto cc = find_executable("cc");
    ASSERT_FALSE(cc.empty());
    TempDir dir;
    write_file(dir / "tables.c", R"(#include <stdio.h>
#include <tfhe/tfhe.h>

typedef void (*gate2)(LweSample*, const LweSample*, const LweSample*, const TFheGateBootstrappingCloudKeySet*);

int main(void) {
    TFheGateBootstrappingParameterSet* params = new_default_gate_bootstrapping_parameters(110);
    TFheGateBootstrappingSecretKeySet* key = new_random_gate_bootstrapping_secret_keyset(params);
    const TFheGateBootstrappingCloudKeySet* bk = key->cloud;
    LweSample* in = new_gate_bootstrapping_ciphertext_array(3, params);
    LweSample* out = new_gate_bootstrapping_ciphertext(params);
    const char* names[] = {"AND", "OR", "XOR", "NAND", "NOR", "XNOR", "ANDNY", "ANDYN", "ORNY", "ORYN"};
    gate2 gates[] = {bootsAND, bootsOR, bootsXOR, bootsNAND, bootsNOR, bootsXNOR, bootsANDNY, bootsANDYN, bootsORNY, bootsORYN};
    for (int g = 0; g < 10; ++g) {
        printf("%s", names[g]);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                bootsSymEncrypt(&in[0], a, key);
                bootsSymEncrypt(&in[1], b, key);
                gates[g](out, &in[0], &in[1], bk);
                printf(" %d", bootsSymDecrypt(out, key));
            }
        printf("\n");
    }
    printf("NOT");
    for (int a = 0; a < 2; ++a) {
        bootsSymEncrypt(&in[0], a, key);
        bootsNOT(out, &in[0], bk);
        printf(" %d", bootsSymDecrypt(out, key));
    }
    printf("\nCOPY");
    for (int a = 0; a < 2; ++a) {
        bootsSymEncrypt(&in[0], a, key);
        bootsCOPY(out, &in[0], bk);
        printf(" %d", bootsSymDecrypt(out, key));
    }
    printf("\nCONSTANT");
    for (int a = 0; a < 2; ++a) {
        bootsCONSTANT(out, a, bk);
        printf(" %d", bootsSymDecrypt(out, key));
    }
    printf("\nMUX");
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                bootsSymEncrypt(&in[0], s, key);
                bootsSymEncrypt(&in[1], a, key);
                bootsSymEncrypt(&in[2], b, key);
                bootsMUX(out, &in[0], &in[1], &in[2], bk);
                printf(" %d", bootsSymDecrypt(out, key));
            }
    printf("\n");
    delete_gate_bootstrapping_ciphertext(out);
    delete_gate_bootstrapping_ciphertext_array(3, in);
    delete_gate_bootstrapping_secret_keyset(key);
    delete_gate_bootstrapping_parameters(params);
    return 0;
}
)");
    const ProcessOptions opts{.cwd = dir.path(), .timeout = std::chrono::seconds(60), .merge_stderr = true, .env = {}};
    const auto build = run_process({cc.string(), "tables.c", "-I", (corpus_dir() / "stub" / "include").string(), "-L",
                                    stub_lib_dir().string(), "-ltfhe_stub", "-o", "tables"},
                                   opts);
    ASSERT_TRUE(build.ok()) << build.out;
    const auto run = run_process({(dir / "tables").string()}, opts);
    ASSERT_TRUE(run.ok()) << run.out;
    // inputs (a,b) in order 00 01 10 11; MUX(s,a,b) = s ? a : b
    EXPECT_EQ(run.out,
              "AND 0 0 0 1\n"
              "OR 0 1 1 1\n"
              "XOR 0 1 1 0\n"
              "NAND 1 1 1 0\n"
              "NOR 1 0 0 0\n"
              "XNOR 1 0 0 1\n"
              "ANDNY 0 1 0 0\n"
              "ANDYN 0 0 1 0\n"
              "ORNY 1 1 0 1\n"
              "ORYN 1 0 1 1\n"
              "NOT 1 0\n"
              "COPY 0 1\n"
              "CONSTANT 0 1\n"
              "MUX 0 1 0 1 0 0 1 1\n");
}
