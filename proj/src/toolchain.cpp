#include "tfheval/toolchain.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "tfheval/process.hpp"

namespace tfheval {

namespace fs = std::filesystem;

std::string_view to_string(LibraryMode mode) { return mode == LibraryMode::stub ? "stub" : "real"; }

LibraryMode library_mode_from_string(std::string_view name) {
    if (name == "stub") return LibraryMode::stub;
    if (name == "real") return LibraryMode::real;
    throw std::invalid_argument("unknown library_mode: " + std::string(name));
}

std::string_view to_string(Severity s) {
    switch (s) {
        case Severity::error: return "error";
        case Severity::warning: return "warning";
        case Severity::note: return "note";
    }
    return "?";
}

Severity severity_from_string(std::string_view s) {
    if (s == "error" || s == "fatal error") return Severity::error;
    if (s == "warning") return Severity::warning;
    if (s == "note") return Severity::note;
    throw std::invalid_argument("unknown severity: " + std::string(s));
}

namespace {

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
    std::size_t n = 0;
    for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) ++n;
    return n;
}

void require_placeholders(std::string_view tmpl, std::initializer_list<std::string_view> names, const char* what) {
    for (auto name : names) {
        if (count_occurrences(tmpl, name) != 1) {
            throw std::invalid_argument(std::string(what) + " must contain " + std::string(name) + " exactly once");
        }
    }
}

// gcc quotes identifiers with U+2018/U+2019 under UTF-8 locales.
std::string ascii_quotes(std::string_view s) {
    std::string out(s);
    for (std::string_view q : {"\xE2\x80\x98", "\xE2\x80\x99"}) {
        for (auto pos = out.find(q); pos != std::string::npos; pos = out.find(q, pos + 1)) {
            out.replace(pos, q.size(), "'");
        }
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

std::string sanitize(std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
        out.push_back(std::isalnum(c) || c == '-' || c == '_' || c == '.' ? static_cast<char>(c) : '_');
    }
    return out.empty() ? "_" : out;
}

void write_file(const fs::path& p, std::string_view content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw ToolchainError("cannot write " + p.string());
    }
}

std::vector<std::string> lib_args(const std::vector<std::string>& libs) {
    std::vector<std::string> out;
    for (const auto& l : libs) {
        out.push_back(l.starts_with('-') || l.find('/') != std::string::npos ? l : "-l" + l);
    }
    return out;
}

std::vector<std::string> prefixed(std::string_view prefix, const std::vector<std::string>& dirs) {
    std::vector<std::string> out;
    for (const auto& d : dirs) out.push_back(std::string(prefix) + d);
    return out;
}

}  // namespace

void ToolchainConfig::validate() const {
    require_placeholders(compile_command_template, {"{src}", "{out}", "{include_dirs}", "{lib_dirs}", "{libs}"},
                         "compile_command_template");
    require_placeholders(link_command_template, {"{objs}", "{out}", "{lib_dirs}", "{libs}"}, "link_command_template");
    if (compile_timeout.count() <= 0 || run_timeout.count() <= 0) {
        throw std::invalid_argument("toolchain timeouts must be positive");
    }
    if (source_file_name.empty() || source_file_name.find('/') != std::string::npos) {
        throw std::invalid_argument("source_file_name must be a plain file name");
    }
}

std::vector<std::string> expand_command(std::string_view command_template,
                                        const std::vector<std::pair<std::string, std::vector<std::string>>>& values) {
    for (const auto& [name, _] : values) {
        if (count_occurrences(command_template, name) != 1) {
            throw ToolchainError("command template must contain " + name + " exactly once: " +
                                 std::string(command_template));
        }
    }
    std::vector<std::string> argv;
    std::istringstream words{std::string(command_template)};
    for (std::string word; words >> word;) {
        bool handled = false;
        for (const auto& [name, list] : values) {
            if (word == name) {
                argv.insert(argv.end(), list.begin(), list.end());
                handled = true;
                break;
            }
            if (const auto pos = word.find(name); pos != std::string::npos) {
                if (list.size() != 1) {
                    throw ToolchainError(name + " expands to several words and must stand alone");
                }
                word.replace(pos, name.size(), list.front());
            }
        }
        if (!handled) argv.push_back(word);
    }
    return argv;
}

ParsedOutput parse_diagnostics(std::string_view output) {
    static const std::regex pattern(R"(^(.+?):(\d+):(?:(\d+):)?\s*(fatal error|error|warning|note):\s?(.*)$)");
    ParsedOutput parsed;
    std::istringstream in{std::string(output)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::smatch m;
        if (std::regex_match(line, m, pattern)) {
            Diagnostic d;
            d.file = m[1].str();
            d.line = std::stoi(m[2].str());
            if (m[3].matched) d.column = std::stoi(m[3].str());
            d.severity = severity_from_string(m[4].str());
            d.message = m[5].str();
            d.text = line;
            if (d.line > 0 && !(d.severity == Severity::error && d.message.empty())) {
                parsed.diagnostics.push_back(std::move(d));
                continue;
            }
        }
        parsed.unparsed.push_back(std::move(line));
    }
    return parsed;
}

std::optional<std::string> undeclared_identifier(const Diagnostic& diag) {
    static const std::regex patterns[] = {
        std::regex(R"(implicit declaration of function '([A-Za-z_]\w*)')"),
        std::regex(R"(call to undeclared function '([A-Za-z_]\w*)')"),
        std::regex(R"(use of undeclared identifier '([A-Za-z_]\w*)')"),
        std::regex(R"('([A-Za-z_]\w*)' undeclared)"),
        std::regex(R"('([A-Za-z_]\w*)' was not declared in this scope)"),
        std::regex(R"('([A-Za-z_]\w*)' has not been declared)"),
        std::regex(R"(unknown type name '([A-Za-z_]\w*)')"),
    };
    if (diag.severity == Severity::note) return std::nullopt;
    const auto msg = ascii_quotes(diag.message);
    for (const auto& re : patterns) {
        std::smatch m;
        if (std::regex_search(msg, m, re)) return m[1].str();
    }
    return std::nullopt;
}

bool looks_like_tfhe_api(std::string_view identifier) {
    const auto id = lower(identifier);
    return id.starts_with("boots") || id.find("tfhe") != std::string::npos || id.find("lwe") != std::string::npos;
}

std::optional<std::string> classify_hallucination(const Diagnostic& diag, const ApiSurface& api) {
    auto id = undeclared_identifier(diag);
    if (!id || !looks_like_tfhe_api(*id) || api.contains(*id)) return std::nullopt;
    return id;
}

void classify_report(CompileReport& report, const ApiSurface& api) {
    report.hallucinated_api_candidates.clear();
    report.undeclared_api_names.clear();
    for (const auto& d : report.diagnostics) {
        if (auto id = classify_hallucination(d, api)) {
            push_unique(report.hallucinated_api_candidates, *id);
        } else if (auto name = undeclared_identifier(d); name && api.contains(*name)) {
            push_unique(report.undeclared_api_names, *name);
        }
    }
}

std::size_t CompileReport::error_count() const {
    return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(),
                                                  [](const Diagnostic& d) { return d.severity == Severity::error; }));
}

bool FuncReport::passed() const noexcept {
    return !timed_out && exit_code == 0 && total_cases > 0 && passed_cases == total_cases &&
           reported_total == std::make_pair(total_cases, total_cases);
}

FuncReport parse_driver_output(std::string_view stdout_text, int expected_cases, int exit_code, bool timed_out) {
    static const std::regex case_line(R"(^CASE (\d+) (PASS|FAIL)$)");
    static const std::regex total_line(R"(^TOTAL (\d+)/(\d+)$)");
    FuncReport report;
    report.total_cases = expected_cases;
    report.exit_code = exit_code;
    report.timed_out = timed_out;
    report.output = std::string(stdout_text);

    std::set<int> passed;
    std::istringstream in{std::string(stdout_text)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::smatch m;
        if (std::regex_match(line, m, case_line)) {
            const int index = std::stoi(m[1].str());
            const bool ok = m[2].str() == "PASS";
            report.per_case.emplace_back(index, ok);
            if (ok) passed.insert(index);
        } else if (std::regex_match(line, m, total_line)) {
            report.reported_total = std::make_pair(std::stoi(m[1].str()), std::stoi(m[2].str()));
        }
    }
    report.passed_cases = std::min(static_cast<int>(passed.size()), report.total_cases);
    return report;
}

fs::path WorkspaceKey::relative_path() const {
    return fs::path(sanitize(task_id)) / sanitize(model_id) / sanitize(method) / ("r" + std::to_string(repeat)) /
           ("i" + std::to_string(iteration));
}

CompilerToolchain::CompilerToolchain(ToolchainConfig config, ApiSurface api)
    : config_(std::move(config)), api_(std::move(api)) {
    config_.validate();
}

CompileReport CompilerToolchain::compile_file(const fs::path& src, const fs::path& obj, const fs::path& workdir) {
    const auto& flags = config_.active_flags();
    const auto argv = expand_command(config_.compile_command_template,
                                     {{"{src}", {src.string()}},
                                      {"{out}", {obj.string()}},
                                      {"{include_dirs}", prefixed("-I", flags.include_dirs)},
                                      {"{lib_dirs}", prefixed("-L", flags.lib_dirs)},
                                      {"{libs}", lib_args(flags.libs)}});
    ProcessOptions opts;
    opts.cwd = workdir;
    opts.timeout = config_.compile_timeout;
    opts.merge_stderr = true;
    opts.env = {{"LC_ALL", "C"}};

    ProcessResult proc;
    try {
        proc = run_process(argv, opts);
    } catch (const ProcessError& e) {
        throw ToolchainError(std::string("toolchain unavailable: ") + e.what());
    }

    CompileReport report;
    report.exit_code = proc.exit_code;
    report.timed_out = proc.timed_out;
    report.raw_output = proc.out;
    report.duration = proc.elapsed;
    auto parsed = parse_diagnostics(proc.out);
    report.diagnostics = std::move(parsed.diagnostics);
    report.unparsed_lines = std::move(parsed.unparsed);
    if (proc.timed_out) {
        Diagnostic d;
        d.file = src.filename().string();
        d.line = 1;
        d.severity = Severity::error;
        d.message = "compilation timed out after " + std::to_string(config_.compile_timeout.count()) + " ms";
        d.text = d.file + ":1: error: " + d.message;
        report.diagnostics.push_back(std::move(d));
    }
    report.success = proc.ok() && report.error_count() == 0;
    if (report.success) report.object_path = obj;
    classify_report(report, api_);
    return report;
}

CompileReport CompilerToolchain::compile(const std::string& code, const TaskManifest&, const WorkspaceKey& key) {
    const auto dir = config_.workspace_root / key.relative_path();
    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::create_directories(dir, ec);
    if (ec) {
        throw ToolchainError("cannot create workspace " + dir.string() + ": " + ec.message());
    }
    const auto src = dir / config_.source_file_name;
    write_file(src, code);
    return compile_file(fs::absolute(src), fs::absolute(dir / "candidate.o"), fs::absolute(dir));
}

FuncOutcome CompilerToolchain::link_and_run(const CompileReport& compiled, const TaskManifest& task,
                                            const WorkspaceKey& key) {
    if (!compiled.success || compiled.object_path.empty()) {
        throw ToolchainError("link_and_run requires a successfully compiled candidate");
    }
    const auto dir = fs::absolute(config_.workspace_root / key.relative_path());
    FuncOutcome outcome;

    auto driver = compile_file(fs::absolute(task.driver), dir / "driver.o", dir);
    if (!driver.success) {
        LinkReport link;
        link.exit_code = driver.exit_code;
        link.raw_output = "driver compilation failed:\n" + driver.raw_output;
        outcome.link_failure = std::move(link);
        return outcome;
    }

    const auto& flags = config_.active_flags();
    const auto exe = dir / "driver_bin";
    const auto argv = expand_command(config_.link_command_template,
                                     {{"{objs}", {compiled.object_path.string(), driver.object_path.string()}},
                                      {"{out}", {exe.string()}},
                                      {"{lib_dirs}", prefixed("-L", flags.lib_dirs)},
                                      {"{libs}", lib_args(flags.libs)}});
    ProcessOptions opts;
    opts.cwd = dir;
    opts.timeout = config_.compile_timeout;
    opts.merge_stderr = true;
    opts.env = {{"LC_ALL", "C"}};
    ProcessResult link_proc;
    try {
        link_proc = run_process(argv, opts);
    } catch (const ProcessError& e) {
        throw ToolchainError(std::string("toolchain unavailable: ") + e.what());
    }
    if (!link_proc.ok()) {
        static const std::regex undefined(R"(undefined reference to [`']([A-Za-z_]\w*)')");
        LinkReport link;
        link.exit_code = link_proc.exit_code;
        link.raw_output = link_proc.out;
        const auto text = ascii_quotes(link_proc.out);
        for (std::sregex_iterator it(text.begin(), text.end(), undefined), end; it != end; ++it) {
            const auto sym = (*it)[1].str();
            push_unique(link.undefined_symbols, sym);
            if (looks_like_tfhe_api(sym) && !api_.contains(sym)) push_unique(link.hallucinated_api_candidates, sym);
        }
        outcome.link_failure = std::move(link);
        return outcome;
    }

    ProcessOptions run_opts;
    run_opts.cwd = dir;
    run_opts.timeout = config_.run_timeout;
    ProcessResult run;
    try {
        run = run_process({exe.string()}, run_opts);
    } catch (const ProcessError& e) {
        throw ToolchainError(std::string("cannot execute test binary: ") + e.what());
    }
    outcome.func = parse_driver_output(run.out, task.expected_cases, run.exit_code, run.timed_out);
    return outcome;
}

}  // namespace tfheval
