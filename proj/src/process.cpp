#include "tfheval/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

extern char** environ;

namespace tfheval {

namespace fs = std::filesystem;

namespace {

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& other) noexcept : fd_(other.release()) {}
    Fd& operator=(Fd&& other) noexcept {
        reset(other.release());
        return *this;
    }
    ~Fd() { reset(); }

    int get() const noexcept { return fd_; }
    int release() noexcept { return std::exchange(fd_, -1); }
    void reset(int fd = -1) noexcept {
        if (fd_ >= 0) ::close(fd_);
        fd_ = fd;
    }

private:
    int fd_ = -1;
};

struct Pipe {
    Fd read;
    Fd write;
};

Pipe make_pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) {
        throw ProcessError(std::string("pipe2: ") + std::strerror(errno));
    }
    return {Fd(fds[0]), Fd(fds[1])};
}

bool is_executable(const fs::path& p) {
    struct stat st {};
    return ::stat(p.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(p.c_str(), X_OK) == 0;
}

}  // namespace

fs::path find_executable(const std::string& name) {
    if (name.find('/') != std::string::npos) {
        return is_executable(name) ? fs::path(name) : fs::path();
    }
    const char* path_env = std::getenv("PATH");
    std::string_view path = path_env ? path_env : "/usr/local/bin:/usr/bin:/bin";
    while (true) {
        const auto colon = path.find(':');
        const auto dir = path.substr(0, colon);
        const fs::path candidate = fs::path(dir.empty() ? "." : std::string(dir)) / name;
        if (is_executable(candidate)) return candidate;
        if (colon == std::string_view::npos) break;
        path.remove_prefix(colon + 1);
    }
    return {};
}

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
    if (argv.empty()) {
        throw ProcessError("empty command line");
    }
    const auto exe = find_executable(argv[0]);
    if (exe.empty()) {
        throw ProcessError("executable not found: " + argv[0]);
    }

    // Everything the child touches is prepared before fork.
    std::vector<char*> c_argv;
    for (const auto& a : argv) c_argv.push_back(const_cast<char*>(a.c_str()));
    c_argv.push_back(nullptr);

    std::vector<std::string> env_storage;
    for (char** e = environ; *e != nullptr; ++e) {
        std::string_view entry(*e);
        const auto key = entry.substr(0, entry.find('='));
        if (!options.env.contains(std::string(key))) env_storage.emplace_back(entry);
    }
    for (const auto& [k, v] : options.env) env_storage.push_back(k + "=" + v);
    std::vector<char*> c_env;
    for (auto& e : env_storage) c_env.push_back(e.data());
    c_env.push_back(nullptr);

    const std::string cwd = options.cwd.empty() ? std::string() : options.cwd.string();
    const std::string exe_str = exe.string();

    Pipe out = make_pipe();
    Pipe err = make_pipe();
    Pipe status = make_pipe();

    const auto start = std::chrono::steady_clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) {
        throw ProcessError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        ::dup2(out.write.get(), STDOUT_FILENO);
        ::dup2(options.merge_stderr ? out.write.get() : err.write.get(), STDERR_FILENO);
        if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
            int e = errno;
            [[maybe_unused]] auto n = ::write(status.write.get(), &e, sizeof e);
            ::_exit(127);
        }
        ::execve(exe_str.c_str(), c_argv.data(), c_env.data());
        int e = errno;
        [[maybe_unused]] auto n = ::write(status.write.get(), &e, sizeof e);
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    out.write.reset();
    err.write.reset();
    status.write.reset();

    int child_errno = 0;
    if (::read(status.read.get(), &child_errno, sizeof child_errno) == static_cast<ssize_t>(sizeof child_errno)) {
        int ignored = 0;
        ::waitpid(pid, &ignored, 0);
        throw ProcessError("cannot start " + argv[0] + ": " + std::strerror(child_errno));
    }

    ProcessResult result;
    const auto deadline = start + options.timeout;
    pollfd fds[2] = {{out.read.get(), POLLIN, 0}, {err.read.get(), POLLIN, 0}};
    std::string* sinks[2] = {&result.out, &result.err};
    int open_fds = 2;
    bool killed = false;
    char buf[8192];
    while (open_fds > 0) {
        int wait_ms = -1;
        if (!killed) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) {
                ::kill(-pid, SIGKILL);
                killed = true;
                result.timed_out = true;
                continue;
            }
            wait_ms = static_cast<int>(left.count());
        }
        const int rc = ::poll(fds, 2, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0 || fds[i].revents == 0) continue;
            const ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
            if (n > 0) {
                sinks[i]->append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || errno != EINTR) {
                fds[i].fd = -1;
                --open_fds;
            }
        }
    }

    int wstatus = 0;
    while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
    }
    // Descendants may outlive the direct child; the group is torn down either way.
    ::kill(-pid, SIGKILL);
    result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    if (WIFEXITED(wstatus)) {
        result.exit_code = WEXITSTATUS(wstatus);
    } else if (WIFSIGNALED(wstatus)) {
        result.term_signal = WTERMSIG(wstatus);
        result.exit_code = 128 + result.term_signal;
    }
    return result;
}

}  // namespace tfheval
