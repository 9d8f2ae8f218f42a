#pragma once

#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tfheval {

/// One benchmark task as described by its `task.manifest` file.
///
/// The manifest is a flat `key = value` file, one field per line, `#` starts
/// a comment line. Recognised keys are exactly the field names below; path
/// values are relative to the manifest's directory. Inside `description`,
/// the two-character sequence `\n` stands for a line break.
struct TaskManifest {
    std::string task_id;
    std::string title;
    std::string description;
    std::filesystem::path reference_plaintext;
    std::filesystem::path ground_truth_tfhe;
    std::filesystem::path driver;
    int expected_cases = 0;
    std::filesystem::path manifest_path;
};

class CorpusError : public std::runtime_error {
public:
    CorpusError(const std::string& task_id, const std::filesystem::path& path, const std::string& what)
        : std::runtime_error(task_id + " (" + path.string() + "): " + what), task_id_(task_id), path_(path) {}

    const std::string& task_id() const noexcept { return task_id_; }
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::string task_id_;
    std::filesystem::path path_;
};

inline constexpr std::string_view kManifestFileName = "task.manifest";
inline constexpr std::string_view kApiSurfaceFileName = "api_surface.txt";

/// Parses manifest text; relative paths are resolved against `base_dir`.
TaskManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir,
                            const std::filesystem::path& manifest_path = {});

/// Structural checks: required fields, referenced files exist and are
/// non-empty, expected_cases matches the task's truth table where known.
void validate_manifest(const TaskManifest& task);

/// Reads `<root>/*/task.manifest`, validates each and returns them sorted by
/// task_id. Throws CorpusError naming the task and path on the first problem.
std::vector<TaskManifest> load_manifests(const std::filesystem::path& root);

/// The identifiers the TFHE header (stub or real) exports.
struct ApiSurface {
    std::set<std::string> function_names;
    std::filesystem::path header;

    bool contains(std::string_view name) const { return function_names.contains(std::string(name)); }
};

/// One identifier per line; blank lines and `#` comments ignored. A line
/// `header = <path>` names the public header.
ApiSurface parse_api_surface(std::string_view text, const std::filesystem::path& base_dir);
ApiSurface load_api_surface(const std::filesystem::path& file);

std::string read_file(const std::filesystem::path& path);

}  // namespace tfheval
