#include "tfheval/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "tfheval/extraction.hpp"
#include "tfheval/lexer.hpp"

#ifndef TFHEVAL_DEFAULT_STUB_LIB_DIR
#define TFHEVAL_DEFAULT_STUB_LIB_DIR ""
#endif

namespace tfheval {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were consumed so that
// leftovers can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_[key].is_null();
    }

    template <typename T>
    T get(const std::string& key, T fallback) {
        if (!has(key)) return fallback;
        try {
            return j_[key].get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + ": wrong type");
        }
    }

    Section child(const std::string& key) {
        seen_.insert(key);
        return Section(j_.contains(key) ? j_[key] : empty(), where(key));
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.contains(key)) throw ConfigError(where(key) + ": unknown key");
        }
    }

    std::string where(const std::string& key = {}) const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    static const json& empty() {
        static const json e = json::object();
        return e;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const fs::path& p) {
    if (p.empty() || p.is_absolute()) return p;
    return (base / p).lexically_normal();
}

std::chrono::milliseconds ms(Section& s, const std::string& key, std::chrono::milliseconds fallback) {
    const auto v = s.get<std::int64_t>(key, fallback.count());
    if (v <= 0) throw ConfigError(s.where(key) + ": must be positive");
    return std::chrono::milliseconds(v);
}

LibraryFlags parse_flags(Section s, const fs::path& base) {
    LibraryFlags f;
    for (const auto& d : s.get<std::vector<std::string>>("include_dirs", {})) {
        f.include_dirs.push_back(resolve(base, d).string());
    }
    for (const auto& d : s.get<std::vector<std::string>>("lib_dirs", {})) f.lib_dirs.push_back(resolve(base, d).string());
    for (const auto& l : s.get<std::vector<std::string>>("libs", {})) {
        const bool is_path = l.find('/') != std::string::npos && l.front() != '-';
        f.libs.push_back(is_path ? resolve(base, l).string() : l);
    }
    s.finish();
    return f;
}

std::vector<std::string> parse_script(Section& s, const std::string& key, const fs::path& base) {
    if (!s.has(key)) return {};
    const json& v = s.raw(key);
    if (v.is_string()) {
        // A path to a JSON array of replies.
        const auto file = resolve(base, v.get<std::string>());
        try {
            return json::parse(read_file(file)).get<std::vector<std::string>>();
        } catch (const std::exception& e) {
            throw ConfigError(s.where(key) + ": cannot load script " + file.string() + ": " + e.what());
        }
    }
    try {
        return v.get<std::vector<std::string>>();
    } catch (const json::exception&) {
        throw ConfigError(s.where(key) + ": expected a list of strings or a file path");
    }
}

ModelEntry parse_model(Section s, const fs::path& base) {
    ModelEntry e;
    auto& m = e.config;
    m.model_id = s.get<std::string>("model_id", "");
    try {
        m.provider_kind = provider_kind_from_string(s.get<std::string>("provider_kind", "mock"));
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(s.where("provider_kind") + ": " + ex.what());
    }
    m.endpoint = s.get<std::string>("endpoint", "");
    m.credential_ref = s.get<std::string>("credential_ref", "");
    m.temperature = s.get<double>("temperature", m.temperature);
    m.top_p = s.get<double>("top_p", m.top_p);
    m.max_output_tokens = s.get<std::uint32_t>("max_output_tokens", m.max_output_tokens);
    m.request_timeout = ms(s, "request_timeout_ms", m.request_timeout);
    m.max_retries = s.get<std::uint32_t>("max_retries", m.max_retries);
    m.mock_script = parse_script(s, "mock_script", base);
    if (s.has("task_scripts")) {
        Section ts(s.raw("task_scripts"), s.where("task_scripts"));
        for (const auto& [task, _] : s.raw("task_scripts").items()) e.task_scripts[task] = parse_script(ts, task, base);
        ts.finish();
    }
    s.finish();
    try {
        if (m.provider_kind == ProviderKind::mock && m.mock_script.empty() && !e.task_scripts.empty()) {
            for (const auto& [task, script] : e.task_scripts) {
                auto per_task = m;
                per_task.mock_script = script;
                per_task.validate();
            }
        } else {
            m.validate();
        }
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(s.where() + ": " + ex.what());
    }
    return e;
}

}  // namespace

const std::vector<std::string>& ModelEntry::script_for(const std::string& task_id) const {
    const auto it = task_scripts.find(task_id);
    return it == task_scripts.end() ? config.mock_script : it->second;
}

const ModelEntry& AppConfig::model(const std::string& id) const {
    for (const auto& m : models) {
        if (m.config.model_id == id) return m;
    }
    throw ConfigError("unknown model: " + id);
}

AppConfig parse_config(const json& j, const fs::path& base_dir) {
    AppConfig c;
    Section root(j, "");
    c.corpus_root = resolve(base_dir, root.get<std::string>("corpus_root", "corpus"));
    c.api_surface = resolve(base_dir, root.get<std::string>("api_surface", ""));
    if (c.api_surface.empty()) c.api_surface = c.corpus_root / kApiSurfaceFileName;

    {
        auto fs_sec = root.child("fewshot");
        c.fewshot_exemplar = resolve(base_dir, fs_sec.get<std::string>("exemplar", ""));
        c.loop.exclude_fewshot_for_or_gate = fs_sec.get<bool>("exclude_for_or_gate", false);
        fs_sec.finish();
        if (c.fewshot_exemplar.empty()) c.fewshot_exemplar = c.corpus_root / "or_gate" / "ground_truth.c";
    }

    if (root.has("models")) {
        const json& models = root.raw("models");
        if (!models.is_array()) throw ConfigError("models: expected a list");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < models.size(); ++i) {
            auto entry = parse_model(Section(models[i], "models[" + std::to_string(i) + "]"), base_dir);
            if (!ids.insert(entry.config.model_id).second) {
                throw ConfigError("models: duplicate model_id " + entry.config.model_id);
            }
            c.models.push_back(std::move(entry));
        }
    }

    {
        auto t = root.child("toolchain");
        auto& tc = c.toolchain;
        tc.compile_command_template = t.get<std::string>("compile_command_template", tc.compile_command_template);
        tc.link_command_template = t.get<std::string>("link_command_template", tc.link_command_template);
        try {
            tc.library_mode = library_mode_from_string(t.get<std::string>("library_mode", "stub"));
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(t.where("library_mode") + ": " + ex.what());
        }
        tc.stub = parse_flags(t.child("stub"), base_dir);
        tc.real = parse_flags(t.child("real"), base_dir);
        if (!t.has("stub")) {
            tc.stub.include_dirs = {(c.corpus_root / "stub" / "include").string()};
            if (std::string_view(TFHEVAL_DEFAULT_STUB_LIB_DIR).size() > 0) {
                tc.stub.lib_dirs = {TFHEVAL_DEFAULT_STUB_LIB_DIR};
            }
            tc.stub.libs = {"tfhe_stub"};
        }
        if (!t.has("real")) {
            tc.real.libs = {"tfhe-spqlios-fma"};
        }
        tc.workspace_root = resolve(base_dir, t.get<std::string>("workspace_root", "work"));
        tc.compile_timeout = ms(t, "compile_timeout_ms", tc.compile_timeout);
        tc.run_timeout = ms(t, "run_timeout_ms", tc.run_timeout);
        tc.source_file_name = t.get<std::string>("source_file_name", tc.source_file_name);
        t.finish();
        try {
            tc.validate();
        } catch (const std::invalid_argument& ex) {
            throw ConfigError("toolchain: " + std::string(ex.what()));
        }
    }

    {
        auto r = root.child("retrieval");
        auto& rs = c.retrieval;
        rs.index_path = resolve(base_dir, r.get<std::string>("index", rs.index_path.string()));
        rs.embedder = r.get<std::string>("embedder", rs.embedder);
        if (rs.embedder != "mock" && rs.embedder != "http") {
            throw ConfigError("retrieval.embedder: expected mock or http");
        }
        rs.mock_dimension = r.get<std::size_t>("mock_dimension", rs.mock_dimension);
        rs.rag.top_k = r.get<std::size_t>("top_k", rs.rag.top_k);
        rs.rag.budget_chars = r.get<std::size_t>("budget_chars", rs.rag.budget_chars);
        rs.chunking.max_chunk_chars = r.get<std::size_t>("max_chunk_chars", rs.chunking.max_chunk_chars);
        rs.chunking.overlap_chars = r.get<std::size_t>("overlap_chars", rs.chunking.overlap_chars);
        {
            auto h = r.child("http");
            rs.http.model_id = h.get<std::string>("model_id", rs.http.model_id);
            rs.http.endpoint = h.get<std::string>("endpoint", rs.http.endpoint);
            rs.http.credential_ref = h.get<std::string>("credential_ref", rs.http.credential_ref);
            rs.http.request_timeout = ms(h, "request_timeout_ms", rs.http.request_timeout);
            rs.http.max_retries = h.get<std::uint32_t>("max_retries", rs.http.max_retries);
            rs.http.batch_size = h.get<std::size_t>("batch_size", rs.http.batch_size);
            h.finish();
        }
        r.finish();
        if (rs.rag.top_k == 0) throw ConfigError("retrieval.top_k: must be >= 1");
        if (rs.mock_dimension == 0) throw ConfigError("retrieval.mock_dimension: must be >= 1");
        if (rs.chunking.overlap_chars >= rs.chunking.max_chunk_chars) {
            throw ConfigError("retrieval.overlap_chars: must be smaller than max_chunk_chars");
        }
    }

    {
        auto m = root.child("metrics");
        c.metrics.trivial_k = m.get<std::size_t>("trivial_k", c.metrics.trivial_k);
        c.metrics.trivial_max_order = m.get<std::size_t>("trivial_max_order", c.metrics.trivial_max_order);
        for (const auto& p : m.get<std::vector<std::string>>("trivial_corpus", {})) {
            c.metrics.trivial_corpus.push_back(resolve(base_dir, p));
        }
        c.loop.bleu.max_order = m.get<std::size_t>("bleu_max_order", c.loop.bleu.max_order);
        c.loop.bleu.epsilon = m.get<double>("bleu_epsilon", c.loop.bleu.epsilon);
        m.finish();
    }

    {
        auto l = root.child("loop");
        c.loop.max_iterations = l.get<int>("max_iterations", c.loop.max_iterations);
        try {
            c.loop.history = history_policy_from_string(l.get<std::string>("history", "keep_all"));
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(l.where("history") + ": " + ex.what());
        }
        c.loop.keep_last_exchanges = l.get<std::size_t>("keep_last_exchanges", c.loop.keep_last_exchanges);
        c.loop.revision_budget.max_bytes = l.get<std::size_t>("revision_max_bytes", c.loop.revision_budget.max_bytes);
        c.loop.revision_budget.max_error_lines =
            l.get<std::size_t>("revision_max_error_lines", c.loop.revision_budget.max_error_lines);
        l.finish();
        try {
            c.loop.validate();
        } catch (const std::invalid_argument& ex) {
            throw ConfigError("loop: " + std::string(ex.what()));
        }
    }

    {
        auto r = root.child("retry");
        c.retry.initial_backoff = ms(r, "initial_backoff_ms", c.retry.initial_backoff);
        c.retry.multiplier = r.get<double>("multiplier", c.retry.multiplier);
        c.retry.max_backoff = ms(r, "max_backoff_ms", c.retry.max_backoff);
        r.finish();
        if (!(c.retry.multiplier >= 1.0)) throw ConfigError("retry.multiplier: must be >= 1");
    }

    root.finish();
    return c;
}

AppConfig load_config(const fs::path& file) {
    json j;
    try {
        j = json::parse(read_file(file));
    } catch (const json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
    }
    const auto base = fs::absolute(file).parent_path();
    return parse_config(j, base);
}

std::vector<fs::path> trivial_corpus_files(const AppConfig& config) {
    if (!config.metrics.trivial_corpus.empty()) return config.metrics.trivial_corpus;
    std::vector<fs::path> files;
    std::error_code ec;
    for (fs::recursive_directory_iterator it(config.corpus_root, ec), end; !ec && it != end; it.increment(ec)) {
        if (!it->is_regular_file()) continue;
        const auto& p = it->path();
        const bool ground_truth = p.filename() == "ground_truth.c";
        const bool doc = p.extension() == ".md" && p.parent_path().filename() == "docs";
        if (ground_truth || doc) files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    return files;
}

TrivialNgramSet build_trivial_set(const AppConfig& config) {
    const auto files = trivial_corpus_files(config);
    if (files.empty()) throw ConfigError("metrics.trivial_corpus: no source files found");
    std::vector<TokenSequence> corpus;
    std::string all;
    for (const auto& f : files) {
        auto text = read_file(f);
        if (f.extension() == ".md") {
            for (const auto& block : fenced_blocks(text)) corpus.push_back(lex(block));
        } else {
            corpus.push_back(lex(text));
        }
        all += text;
    }
    if (corpus.empty()) throw ConfigError("metrics.trivial_corpus: no code found in " + std::to_string(files.size()) + " file(s)");
    const auto id = std::to_string(files.size()) + " files, sha256:" + fingerprint(all).hex().substr(0, 16);
    return trivial_ngrams(corpus, config.metrics.trivial_k, config.metrics.trivial_max_order, id);
}

json AppConfig::snapshot() const {
    auto flags = [](const LibraryFlags& f) {
        return json{{"include_dirs", f.include_dirs}, {"lib_dirs", f.lib_dirs}, {"libs", f.libs}};
    };
    return {{"toolchain",
             {{"compile_command_template", toolchain.compile_command_template},
              {"link_command_template", toolchain.link_command_template},
              {"library_mode", to_string(toolchain.library_mode)},
              {"flags", flags(toolchain.active_flags())},
              {"compile_timeout_ms", toolchain.compile_timeout.count()},
              {"run_timeout_ms", toolchain.run_timeout.count()}}},
            {"fewshot_exemplar", fewshot_exemplar.generic_string()}};
}

}  // namespace tfheval
