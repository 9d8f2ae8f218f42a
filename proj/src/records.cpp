#include "tfheval/records.hpp"

#include <fstream>

namespace tfheval {

using json = nlohmann::json;

std::string_view to_string(TerminalStatus s) {
    switch (s) {
        case TerminalStatus::compile_success: return "CompileSuccess";
        case TerminalStatus::iteration_budget_exhausted: return "IterationBudgetExhausted";
        case TerminalStatus::errored: return "Errored";
    }
    return "?";
}

TerminalStatus terminal_status_from_string(std::string_view s) {
    if (s == "CompileSuccess") return TerminalStatus::compile_success;
    if (s == "IterationBudgetExhausted") return TerminalStatus::iteration_budget_exhausted;
    if (s == "Errored") return TerminalStatus::errored;
    throw std::runtime_error("unknown terminal status: " + std::string(s));
}

namespace {

json usage_json(const Usage& u) { return {{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}}; }

Usage usage_from(const json& j) {
    return {j.at("input_tokens").get<std::uint64_t>(), j.at("output_tokens").get<std::uint64_t>()};
}

template <typename T, typename F>
std::optional<T> optional_from(const json& j, const char* key, F&& f) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return f(j[key]);
}

Diagnostic diagnostic_from(const json& j) {
    Diagnostic d;
    d.file = j.at("file").get<std::string>();
    d.line = j.at("line").get<int>();
    if (j.contains("column") && !j["column"].is_null()) d.column = j["column"].get<int>();
    d.severity = severity_from_string(j.at("severity").get<std::string>());
    d.message = j.at("message").get<std::string>();
    d.text = j.value("text", "");
    return d;
}

CompileReport compile_report_from(const json& j) {
    CompileReport r;
    r.success = j.at("success").get<bool>();
    r.exit_code = j.at("exit_code").get<int>();
    r.timed_out = j.at("timed_out").get<bool>();
    for (const auto& d : j.at("diagnostics")) r.diagnostics.push_back(diagnostic_from(d));
    r.unparsed_lines = j.at("unparsed_lines").get<std::vector<std::string>>();
    r.raw_output = j.at("raw_output").get<std::string>();
    r.hallucinated_api_candidates = j.at("hallucinated_api_candidates").get<std::vector<std::string>>();
    r.undeclared_api_names = j.at("undeclared_api_names").get<std::vector<std::string>>();
    r.duration = std::chrono::milliseconds(j.at("duration_ms").get<std::int64_t>());
    return r;
}

FuncReport func_report_from(const json& j) {
    FuncReport r;
    r.total_cases = j.at("total_cases").get<int>();
    r.passed_cases = j.at("passed_cases").get<int>();
    for (const auto& c : j.at("per_case")) {
        r.per_case.emplace_back(c.at("index").get<int>(), c.at("pass").get<bool>());
    }
    if (j.contains("reported_total") && !j["reported_total"].is_null()) {
        r.reported_total = std::make_pair(j["reported_total"].at(0).get<int>(), j["reported_total"].at(1).get<int>());
    }
    r.timed_out = j.at("timed_out").get<bool>();
    r.exit_code = j.at("exit_code").get<int>();
    r.output = j.value("output", "");
    return r;
}

LinkReport link_report_from(const json& j) {
    LinkReport r;
    r.exit_code = j.at("exit_code").get<int>();
    r.raw_output = j.at("raw_output").get<std::string>();
    r.undefined_symbols = j.at("undefined_symbols").get<std::vector<std::string>>();
    r.hallucinated_api_candidates = j.at("hallucinated_api_candidates").get<std::vector<std::string>>();
    return r;
}

IterationRecord iteration_from(const json& j) {
    IterationRecord it;
    it.index = j.at("index").get<int>();
    it.prompt_message = j.at("prompt_message").get<std::string>();
    it.response = j.at("response").get<std::string>();
    it.usage = usage_from(j.at("usage"));
    const auto& ex = j.at("extraction");
    it.extraction.block_count = ex.at("block_count").get<std::size_t>();
    if (ex.at("outcome").get<std::string>() == "Code") it.extraction.code = ex.at("code").get<std::string>();
    it.repetition_flag = j.at("repetition_flag").get<bool>();
    it.compile_report = optional_from<CompileReport>(j, "compile_report", compile_report_from);
    return it;
}

}  // namespace

json to_json(const Diagnostic& d) {
    return {{"file", d.file},
            {"line", d.line},
            {"column", d.column ? json(*d.column) : json(nullptr)},
            {"severity", to_string(d.severity)},
            {"message", d.message},
            {"text", d.text}};
}

json to_json(const CompileReport& r) {
    json diags = json::array();
    for (const auto& d : r.diagnostics) diags.push_back(to_json(d));
    return {{"success", r.success},
            {"exit_code", r.exit_code},
            {"timed_out", r.timed_out},
            {"diagnostics", std::move(diags)},
            {"unparsed_lines", r.unparsed_lines},
            {"raw_output", r.raw_output},
            {"hallucinated_api_candidates", r.hallucinated_api_candidates},
            {"undeclared_api_names", r.undeclared_api_names},
            {"duration_ms", r.duration.count()}};
}

json to_json(const FuncReport& r) {
    json cases = json::array();
    for (const auto& [index, pass] : r.per_case) cases.push_back({{"index", index}, {"pass", pass}});
    return {{"total_cases", r.total_cases},
            {"passed_cases", r.passed_cases},
            {"per_case", std::move(cases)},
            {"reported_total",
             r.reported_total ? json::array({r.reported_total->first, r.reported_total->second}) : json(nullptr)},
            {"timed_out", r.timed_out},
            {"exit_code", r.exit_code},
            {"passed", r.passed()},
            {"output", r.output}};
}

json to_json(const LinkReport& r) {
    return {{"exit_code", r.exit_code},
            {"raw_output", r.raw_output},
            {"undefined_symbols", r.undefined_symbols},
            {"hallucinated_api_candidates", r.hallucinated_api_candidates}};
}

json to_json(const IterationRecord& r) {
    json extraction{{"outcome", r.extraction.wrong_format() ? "WrongFormat" : "Code"},
                    {"block_count", r.extraction.block_count}};
    if (r.extraction.code) extraction["code"] = *r.extraction.code;
    return {{"index", r.index},
            {"prompt_message", r.prompt_message},
            {"response", r.response},
            {"usage", usage_json(r.usage)},
            {"extraction", std::move(extraction)},
            {"repetition_flag", r.repetition_flag},
            {"compile_report", r.compile_report ? to_json(*r.compile_report) : json(nullptr)}};
}

json to_json(const RunRecord& r) {
    json iterations = json::array();
    for (const auto& it : r.iterations) iterations.push_back(to_json(it));
    return {{"schema_version", kRecordSchemaVersion},
            {"task_id", r.task_id},
            {"model_id", r.model_id},
            {"method", r.method},
            {"repeat_index", r.repeat_index},
            {"terminal_status", to_string(r.terminal_status)},
            {"error", r.error ? json(*r.error) : json(nullptr)},
            {"iterations", std::move(iterations)},
            {"func_report", r.func_report ? to_json(*r.func_report) : json(nullptr)},
            {"link_report", r.link_report ? to_json(*r.link_report) : json(nullptr)},
            {"final_code", r.final_code ? json(*r.final_code) : json(nullptr)},
            {"crystal_bleu", r.crystal_bleu},
            {"totals", usage_json(r.totals)},
            {"wall_time_ms", r.wall_time.count()},
            {"config_snapshot", r.config_snapshot}};
}

RunRecord run_record_from_json(const json& j) {
    const auto version = j.value("schema_version", -1);
    if (version != kRecordSchemaVersion) {
        throw std::runtime_error("run record schema version " + std::to_string(version) + " (expected " +
                                 std::to_string(kRecordSchemaVersion) + ")");
    }
    RunRecord r;
    try {
        r.task_id = j.at("task_id").get<std::string>();
        r.model_id = j.at("model_id").get<std::string>();
        r.method = j.at("method").get<std::string>();
        r.repeat_index = j.at("repeat_index").get<int>();
        r.terminal_status = terminal_status_from_string(j.at("terminal_status").get<std::string>());
        r.error = optional_from<std::string>(j, "error", [](const json& v) { return v.get<std::string>(); });
        for (const auto& it : j.at("iterations")) r.iterations.push_back(iteration_from(it));
        r.func_report = optional_from<FuncReport>(j, "func_report", func_report_from);
        r.link_report = optional_from<LinkReport>(j, "link_report", link_report_from);
        r.final_code = optional_from<std::string>(j, "final_code", [](const json& v) { return v.get<std::string>(); });
        r.crystal_bleu = j.at("crystal_bleu").get<double>();
        r.totals = usage_from(j.at("totals"));
        r.wall_time = std::chrono::milliseconds(j.at("wall_time_ms").get<std::int64_t>());
        r.config_snapshot = j.value("config_snapshot", json::object());
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed run record: ") + e.what());
    }
    return r;
}

std::vector<RunRecord> read_run_records(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + file.string());
    std::vector<RunRecord> records;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            records.push_back(run_record_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

json without_timing(const RunRecord& r) {
    auto j = to_json(r);
    j["wall_time_ms"] = 0;
    for (auto& it : j["iterations"]) {
        if (!it["compile_report"].is_null()) it["compile_report"]["duration_ms"] = 0;
    }
    return j;
}

}  // namespace tfheval
