#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tfheval/corpus.hpp"

namespace tfheval {

enum class LibraryMode { stub, real };

std::string_view to_string(LibraryMode mode);
LibraryMode library_mode_from_string(std::string_view name);

struct LibraryFlags {
    std::vector<std::string> include_dirs;
    std::vector<std::string> lib_dirs;
    std::vector<std::string> libs;  // bare names get "-l"; anything with '/' or a leading '-' is verbatim
};

struct ToolchainConfig {
    /// Whitespace-separated argv. Placeholders: {src} {out} {include_dirs}
    /// {lib_dirs} {libs}, each exactly once. The list placeholders must be
    /// standalone words.
    std::string compile_command_template =
        "cc -std=c11 -Wall -Werror=implicit-function-declaration -c {src} -o {out} {include_dirs} {lib_dirs} {libs}";
    /// Placeholders: {objs} {out} {lib_dirs} {libs}, each exactly once.
    std::string link_command_template = "cc {objs} -o {out} {lib_dirs} {libs}";
    LibraryMode library_mode = LibraryMode::stub;
    LibraryFlags stub;
    LibraryFlags real;
    std::filesystem::path workspace_root = "work";
    std::chrono::milliseconds compile_timeout{std::chrono::seconds(60)};
    std::chrono::milliseconds run_timeout{std::chrono::seconds(10)};
    std::string source_file_name = "candidate.c";

    void validate() const;
    const LibraryFlags& active_flags() const { return library_mode == LibraryMode::stub ? stub : real; }
};

enum class Severity { error, warning, note };

std::string_view to_string(Severity s);
Severity severity_from_string(std::string_view s);

struct Diagnostic {
    std::string file;
    int line = 1;
    std::optional<int> column;
    Severity severity = Severity::error;
    std::string message;
    std::string text;  // the original output line

    bool operator==(const Diagnostic&) const = default;
};

struct ParsedOutput {
    std::vector<Diagnostic> diagnostics;
    std::vector<std::string> unparsed;  // every other non-empty line, in order
};

/// Parses `file:line[:col]: severity: message` lines. Nothing is dropped:
/// lines that do not match land in `unparsed`.
ParsedOutput parse_diagnostics(std::string_view output);

/// Identifier named by an undeclared-identifier / implicit-declaration /
/// unknown-type diagnostic from gcc or clang, if any.
std::optional<std::string> undeclared_identifier(const Diagnostic& diag);

/// `boots*` prefix, or containing `tfhe` / `lwe`, case-insensitively.
bool looks_like_tfhe_api(std::string_view identifier);

/// An undeclared TFHE-looking identifier that the API does not export.
std::optional<std::string> classify_hallucination(const Diagnostic& diag, const ApiSurface& api);

struct CompileReport {
    bool success = false;
    int exit_code = -1;
    bool timed_out = false;
    std::vector<Diagnostic> diagnostics;
    std::vector<std::string> unparsed_lines;
    std::string raw_output;
    std::vector<std::string> hallucinated_api_candidates;
    /// Real API names reported as undeclared (typically a missing include).
    std::vector<std::string> undeclared_api_names;
    std::chrono::milliseconds duration{0};
    std::filesystem::path object_path;  // set on success

    std::size_t error_count() const;
};

struct FuncReport {
    int total_cases = 0;
    int passed_cases = 0;
    std::vector<std::pair<int, bool>> per_case;
    std::optional<std::pair<int, int>> reported_total;  // from the TOTAL line
    bool timed_out = false;
    int exit_code = -1;
    std::string output;

    /// Counted as a functional pass.
    bool passed() const noexcept;
};

/// Reads the driver's line protocol (`CASE <i> PASS|FAIL`, `TOTAL <p>/<t>`).
/// `expected_cases` comes from the task manifest and fixes total_cases.
FuncReport parse_driver_output(std::string_view stdout_text, int expected_cases, int exit_code, bool timed_out);

struct LinkReport {
    int exit_code = -1;
    std::string raw_output;
    std::vector<std::string> undefined_symbols;
    std::vector<std::string> hallucinated_api_candidates;
};

/// Candidate compiled fine but the functional binary could not be built.
struct FuncOutcome {
    std::optional<FuncReport> func;
    std::optional<LinkReport> link_failure;
};

/// Directory name components for one attempt.
struct WorkspaceKey {
    std::string task_id;
    std::string model_id;
    std::string method;
    int repeat = 0;
    int iteration = 0;

    std::filesystem::path relative_path() const;
};

class ToolchainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Compile-and-test backend used by the evaluation loop.
class Toolchain {
public:
    virtual ~Toolchain() = default;

    virtual CompileReport compile(const std::string& code, const TaskManifest& task, const WorkspaceKey& key) = 0;

    /// Only called after a successful compile() of the same key.
    virtual FuncOutcome link_and_run(const CompileReport& compiled, const TaskManifest& task,
                                     const WorkspaceKey& key) = 0;

    virtual const ApiSurface& api() const = 0;
};

/// Expands a command template into argv. Throws ToolchainError on a missing
/// or repeated placeholder.
std::vector<std::string> expand_command(std::string_view command_template,
                                        const std::vector<std::pair<std::string, std::vector<std::string>>>& values);

/// Runs the configured compiler/linker as subprocesses.
class CompilerToolchain final : public Toolchain {
public:
    CompilerToolchain(ToolchainConfig config, ApiSurface api);

    CompileReport compile(const std::string& code, const TaskManifest& task, const WorkspaceKey& key) override;
    FuncOutcome link_and_run(const CompileReport& compiled, const TaskManifest& task,
                             const WorkspaceKey& key) override;
    const ApiSurface& api() const override { return api_; }

    const ToolchainConfig& config() const noexcept { return config_; }

private:
    CompileReport compile_file(const std::filesystem::path& src, const std::filesystem::path& obj,
                               const std::filesystem::path& workdir);

    ToolchainConfig config_;
    ApiSurface api_;
};

/// Fills the hallucination fields of `report` from its diagnostics.
void classify_report(CompileReport& report, const ApiSurface& api);

}  // namespace tfheval
