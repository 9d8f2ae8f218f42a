#include "tfheval/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace tfheval {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unescape_newlines(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == 'n') {
            out.push_back('\n');
            ++i;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

void require_file(const TaskManifest& task, std::string_view field, const fs::path& p) {
    std::error_code ec;
    if (p.empty()) {
        throw CorpusError(task.task_id, task.manifest_path, std::string(field) + " is missing");
    }
    if (!fs::is_regular_file(p, ec)) {
        throw CorpusError(task.task_id, p, std::string(field) + " does not exist");
    }
    if (fs::file_size(p, ec) == 0 || ec) {
        throw CorpusError(task.task_id, p, std::string(field) + " is empty");
    }
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TaskManifest parse_manifest(std::string_view text, const fs::path& base_dir, const fs::path& manifest_path) {
    std::map<std::string, std::string, std::less<>> fields;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw CorpusError("?", manifest_path, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = std::string(trim(line.substr(0, eq)));
        if (!fields.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
            throw CorpusError("?", manifest_path, "duplicate key " + key);
        }
    }

    static constexpr std::string_view known[] = {"task_id", "title", "description", "reference_plaintext",
                                                 "ground_truth_tfhe", "driver", "expected_cases"};
    const std::string id = fields.contains("task_id") ? fields["task_id"] : "?";
    for (const auto& [key, value] : fields) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw CorpusError(id, manifest_path, "unknown key " + key);
        }
    }
    for (auto key : known) {
        auto it = fields.find(key);
        if (it == fields.end() || it->second.empty()) {
            throw CorpusError(id, manifest_path, "missing field " + std::string(key));
        }
    }

    TaskManifest task;
    task.task_id = fields["task_id"];
    task.title = fields["title"];
    task.description = unescape_newlines(fields["description"]);
    task.reference_plaintext = base_dir / fields["reference_plaintext"];
    task.ground_truth_tfhe = base_dir / fields["ground_truth_tfhe"];
    task.driver = base_dir / fields["driver"];
    task.manifest_path = manifest_path;
    const auto& cases = fields["expected_cases"];
    const auto [ptr, ec] = std::from_chars(cases.data(), cases.data() + cases.size(), task.expected_cases);
    if (ec != std::errc() || ptr != cases.data() + cases.size()) {
        throw CorpusError(task.task_id, manifest_path, "expected_cases is not an integer: " + cases);
    }
    return task;
}

void validate_manifest(const TaskManifest& task) {
    require_file(task, "reference_plaintext", task.reference_plaintext);
    require_file(task, "ground_truth_tfhe", task.ground_truth_tfhe);
    require_file(task, "driver", task.driver);
    if (task.expected_cases < 1) {
        throw CorpusError(task.task_id, task.manifest_path, "expected_cases must be >= 1");
    }
    const int truth_table = task.task_id == "not_gate"                              ? 2
                            : (task.task_id == "and_gate" || task.task_id == "or_gate") ? 4
                                                                                        : 0;
    if (truth_table != 0 && task.expected_cases != truth_table) {
        throw CorpusError(task.task_id, task.manifest_path,
                          "expected_cases must be " + std::to_string(truth_table) + " (full truth table)");
    }
}

std::vector<TaskManifest> load_manifests(const fs::path& root) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw CorpusError("*", root, "corpus root is not a directory");
    }
    std::vector<TaskManifest> tasks;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        const auto manifest = entry.path() / kManifestFileName;
        if (!fs::is_regular_file(manifest, ec)) continue;
        auto task = parse_manifest(read_file(manifest), entry.path(), manifest);
        validate_manifest(task);
        tasks.push_back(std::move(task));
    }
    std::sort(tasks.begin(), tasks.end(),
              [](const TaskManifest& a, const TaskManifest& b) { return a.task_id < b.task_id; });
    for (std::size_t i = 1; i < tasks.size(); ++i) {
        if (tasks[i].task_id == tasks[i - 1].task_id) {
            throw CorpusError(tasks[i].task_id, tasks[i].manifest_path, "duplicate task_id");
        }
    }
    if (tasks.empty()) {
        throw CorpusError("*", root, "no task manifests found");
    }
    return tasks;
}

ApiSurface parse_api_surface(std::string_view text, const fs::path& base_dir) {
    ApiSurface api;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (const auto eq = line.find('='); eq != std::string_view::npos) {
            if (trim(line.substr(0, eq)) == "header") {
                api.header = base_dir / std::string(trim(line.substr(eq + 1)));
                continue;
            }
            throw std::runtime_error("api surface: unexpected line: " + std::string(line));
        }
        api.function_names.emplace(line);
    }
    return api;
}

ApiSurface load_api_surface(const fs::path& file) {
    return parse_api_surface(read_file(file), file.parent_path());
}

}  // namespace tfheval
