#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfheval/extraction.hpp"
#include "tfheval/llm_gateway.hpp"
#include "tfheval/toolchain.hpp"

namespace tfheval {

inline constexpr int kRecordSchemaVersion = 1;

struct IterationRecord {
    int index = 0;  // 1-based
    std::string prompt_message;
    std::string response;
    Usage usage;
    ExtractionResult extraction;
    bool repetition_flag = false;
    std::optional<CompileReport> compile_report;  // present iff code was extracted
};

enum class TerminalStatus { compile_success, iteration_budget_exhausted, errored };

std::string_view to_string(TerminalStatus s);
TerminalStatus terminal_status_from_string(std::string_view s);

struct RunRecord {
    std::string task_id;
    std::string model_id;
    std::string method;
    int repeat_index = 0;
    std::vector<IterationRecord> iterations;
    TerminalStatus terminal_status = TerminalStatus::iteration_budget_exhausted;
    std::optional<FuncReport> func_report;   // present iff the functional binary ran
    std::optional<LinkReport> link_report;   // present iff linking the test binary failed
    std::optional<std::string> final_code;
    double crystal_bleu = 0.0;
    Usage totals;
    std::chrono::milliseconds wall_time{0};
    std::optional<std::string> error;  // set iff terminal_status == errored
    nlohmann::json config_snapshot = nlohmann::json::object();

    bool compiled() const noexcept { return terminal_status == TerminalStatus::compile_success; }
    bool functional_pass() const noexcept { return func_report && func_report->passed(); }
};

nlohmann::json to_json(const Diagnostic& d);
nlohmann::json to_json(const CompileReport& r);
nlohmann::json to_json(const FuncReport& r);
nlohmann::json to_json(const LinkReport& r);
nlohmann::json to_json(const IterationRecord& r);
nlohmann::json to_json(const RunRecord& r);

/// Inverse of to_json(RunRecord). Throws std::runtime_error on a schema
/// version mismatch or malformed record.
RunRecord run_record_from_json(const nlohmann::json& j);

/// Reads a JSONL file of run records (blank lines skipped).
std::vector<RunRecord> read_run_records(const std::filesystem::path& file);

/// Same record with timing fields zeroed; used to compare replays.
nlohmann::json without_timing(const RunRecord& r);

}  // namespace tfheval
