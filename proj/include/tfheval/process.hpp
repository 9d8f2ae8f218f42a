#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tfheval {

struct ProcessResult {
    int exit_code = -1;       // valid when !signaled && !timed_out
    int term_signal = 0;      // nonzero when killed by a signal
    bool timed_out = false;
    std::string out;          // stdout, or stdout+stderr when merged
    std::string err;
    std::chrono::milliseconds elapsed{0};

    bool ok() const noexcept { return !timed_out && term_signal == 0 && exit_code == 0; }
};

struct ProcessOptions {
    std::filesystem::path cwd;
    std::chrono::milliseconds timeout{std::chrono::seconds(30)};
    bool merge_stderr = false;
    /// Added to (or overriding) the inherited environment.
    std::map<std::string, std::string> env;
};

class ProcessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs argv[0] (resolved through PATH) without a shell. The child gets its own
/// process group, which is killed with SIGKILL on timeout. Throws ProcessError
/// when the executable cannot be found or started.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options);

/// PATH lookup; empty when not found.
std::filesystem::path find_executable(const std::string& name);

}  // namespace tfheval
