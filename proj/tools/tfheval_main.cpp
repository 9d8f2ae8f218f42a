// tfheval command-line front end.
//
//   tfheval validate-corpus [--config cfg] [--corpus dir]
//   tfheval index-docs <paths...> --out index.bin [--config cfg]
//   tfheval run --config cfg --out runs.jsonl [--tasks ..] [--models ..] [--methods ..]
//               [--repeats 5] [--max-iters 10] [--parallelism N]
//   tfheval report --in runs.jsonl --format csv|md|jsonl-summary [--out file] [--plots dir]
//
// Exit codes: 0 success, 1 some runs errored, 2 configuration or corpus error.

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "tfheval/config.hpp"
#include "tfheval/corpus.hpp"
#include "tfheval/http_transport.hpp"
#include "tfheval/orchestrator.hpp"
#include "tfheval/report.hpp"
#include "tfheval/retrieval.hpp"
#include "tfheval/toolchain.hpp"

namespace fs = std::filesystem;
using namespace tfheval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

void log_line(std::string_view msg) { std::cerr << "tfheval: " << msg << '\n'; }

std::vector<std::string> split_list(const std::vector<std::string>& values) {
    std::vector<std::string> out;
    for (const auto& v : values) {
        std::stringstream ss(v);
        for (std::string item; std::getline(ss, item, ',');) {
            if (!item.empty()) out.push_back(item);
        }
    }
    return out;
}

AppConfig load_or_default(const std::string& config_path) {
    if (!config_path.empty()) return load_config(config_path);
    return parse_config(nlohmann::json::object(), fs::current_path());
}

std::unique_ptr<Embedder> make_embedder(const AppConfig& cfg) {
    if (cfg.retrieval.embedder == "http") {
        return std::make_unique<HttpEmbedder>(cfg.retrieval.http, std::make_shared<HttplibTransport>());
    }
    return std::make_unique<MockEmbedder>(cfg.retrieval.mock_dimension);
}

// ---- validate-corpus --------------------------------------------------------

int cmd_validate(const std::string& config_path, const std::string& corpus_override) {
    auto cfg = load_or_default(config_path);
    if (!corpus_override.empty()) {
        cfg.corpus_root = corpus_override;
        cfg.api_surface = cfg.corpus_root / kApiSurfaceFileName;
        cfg.toolchain.stub.include_dirs = {(cfg.corpus_root / "stub" / "include").string()};
    }
    const auto tasks = load_manifests(cfg.corpus_root);
    const auto api = load_api_surface(cfg.api_surface);
    if (!api.header.empty()) {
        const auto header = read_file(api.header);
        for (const auto& name : api.function_names) {
            if (header.find(name) == std::string::npos) {
                throw CorpusError("*", api.header, "API name " + name + " is not declared in the header");
            }
        }
    }

    auto tc_config = cfg.toolchain;
    tc_config.workspace_root = fs::temp_directory_path() / ("tfheval-validate-" + std::to_string(::getpid()));
    CompilerToolchain toolchain(tc_config, api);
    bool ok = true;
    for (const auto& task : tasks) {
        const WorkspaceKey key{task.task_id, "ground_truth", "validate", 0, 0};
        const auto report = toolchain.compile(read_file(task.ground_truth_tfhe), task, key);
        std::string status;
        if (!report.success) {
            status = "ground truth does not compile:\n" + report.raw_output;
        } else {
            const auto outcome = toolchain.link_and_run(report, task, key);
            if (outcome.link_failure) {
                status = "link failed:\n" + outcome.link_failure->raw_output;
            } else if (!outcome.func->passed()) {
                status = "driver reports " + std::to_string(outcome.func->passed_cases) + "/" +
                         std::to_string(outcome.func->total_cases);
            }
        }
        if (status.empty()) {
            std::cout << "ok    " << task.task_id << " (" << task.expected_cases << "/" << task.expected_cases
                      << ")\n";
        } else {
            ok = false;
            std::cout << "FAIL  " << task.task_id << " [" << task.manifest_path.string() << "]: " << status << "\n";
        }
    }
    std::error_code ec;
    fs::remove_all(tc_config.workspace_root, ec);
    return ok ? kExitOk : kExitConfig;
}

// ---- index-docs -------------------------------------------------------------

int cmd_index(const std::string& config_path, const std::vector<std::string>& inputs, const std::string& out) {
    const auto cfg = load_or_default(config_path);
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            for (const auto& e : fs::recursive_directory_iterator(in)) {
                const auto ext = e.path().extension();
                if (e.is_regular_file() && (ext == ".md" || ext == ".txt" || ext == ".h" || ext == ".c")) {
                    files.push_back(e.path());
                }
            }
        } else if (fs::is_regular_file(in)) {
            files.emplace_back(in);
        } else {
            throw ConfigError("no such document: " + in);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no documents to index");

    std::vector<DocChunk> chunks;
    for (const auto& f : files) {
        auto part = chunk_document(read_file(f), f.generic_string(), cfg.retrieval.chunking, chunks.size());
        chunks.insert(chunks.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    auto embedder = make_embedder(cfg);
    const auto index = RetrievalIndex::build(std::move(chunks), *embedder);
    index.save(out);
    std::cout << "indexed " << files.size() << " file(s), " << index.size() << " chunk(s) with "
              << index.embedder_id() << " -> " << out << "\n";
    return kExitOk;
}

// ---- run --------------------------------------------------------------------

struct RunOptions {
    std::string config;
    std::vector<std::string> tasks, models, methods;
    int repeats = 5;
    int max_iters = 0;  // 0: from config
    int parallelism = 1;
    std::string out = "runs.jsonl";
    bool append = false;
};

int cmd_run(const RunOptions& opt) {
    auto cfg = load_config(opt.config);
    if (opt.max_iters > 0) cfg.loop.max_iterations = opt.max_iters;
    cfg.loop.validate();

    MatrixSpec spec;
    spec.repeats = opt.repeats;
    spec.parallelism = opt.parallelism;
    spec.loop = cfg.loop;

    auto all_tasks = load_manifests(cfg.corpus_root);
    const auto task_ids = split_list(opt.tasks);
    if (task_ids.empty()) {
        spec.tasks = all_tasks;
    } else {
        for (const auto& id : task_ids) {
            auto it = std::find_if(all_tasks.begin(), all_tasks.end(), [&](const auto& t) { return t.task_id == id; });
            if (it == all_tasks.end()) throw ConfigError("unknown task: " + id);
            spec.tasks.push_back(*it);
        }
    }

    // Mock models with only per-task scripts get a stand-in default script so
    // that matrix validation passes; the provider factory picks the real one.
    auto add_model = [&](const ModelEntry& entry) {
        auto m = entry.config;
        if (m.provider_kind == ProviderKind::mock && m.mock_script.empty() && !entry.task_scripts.empty()) {
            m.mock_script = entry.task_scripts.begin()->second;
        }
        spec.models.push_back(std::move(m));
    };
    const auto model_ids = split_list(opt.models);
    if (model_ids.empty()) {
        for (const auto& m : cfg.models) add_model(m);
    } else {
        for (const auto& id : model_ids) add_model(cfg.model(id));
    }
    if (spec.models.empty()) throw ConfigError("no models configured");

    auto method_names = split_list(opt.methods);
    if (method_names.empty()) method_names = {"baseline", "rag", "fewshot", "rag_fewshot"};
    bool needs_index = false;
    for (const auto& name : method_names) {
        MethodName m;
        try {
            m = method_name_from_string(name);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        spec.methods.push_back(MethodConfig::make(m, cfg.retrieval.rag, cfg.fewshot_exemplar));
        needs_index = needs_index || spec.methods.back().uses_rag();
        if (spec.methods.back().uses_fewshot() && !fs::is_regular_file(cfg.fewshot_exemplar)) {
            throw ConfigError("few-shot exemplar not found: " + cfg.fewshot_exemplar.string());
        }
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    std::unique_ptr<Embedder> embedder;
    std::optional<RetrievalIndex> index;
    if (needs_index) {
        embedder = make_embedder(cfg);
        if (!fs::is_regular_file(cfg.retrieval.index_path)) {
            throw ConfigError("retrieval index not found: " + cfg.retrieval.index_path.string() +
                              " (build it with index-docs)");
        }
        index = RetrievalIndex::load(cfg.retrieval.index_path, embedder->id());
    }

    const auto api = load_api_surface(cfg.api_surface);
    CompilerToolchain toolchain(cfg.toolchain, api);
    const auto trivial = build_trivial_set(cfg);

    RunDeps deps;
    deps.toolchain = &toolchain;
    deps.index = index ? &*index : nullptr;
    deps.embedder = embedder.get();
    deps.trivial = &trivial;
    deps.retry = cfg.retry;
    deps.log = log_line;
    deps.extra_snapshot = cfg.snapshot();

    auto transport = std::make_shared<HttplibTransport>();
    ProviderFactory providers = [&](const ModelConfig& model, const TaskManifest& task) {
        if (model.provider_kind == ProviderKind::mock) {
            auto scripted = model;
            scripted.mock_script = cfg.model(model.model_id).script_for(task.task_id);
            return make_provider(scripted, transport, log_line);
        }
        return make_provider(model, transport, log_line);
    };

    JsonlSink sink(opt.out, opt.append);
    std::mutex progress_mutex;
    std::size_t done = 0;
    const auto total = spec.run_count();
    auto record_sink = [&](const RunRecord& r) {
        sink.write(r);
        std::lock_guard lock(progress_mutex);
        ++done;
        std::cerr << "[" << done << "/" << total << "] " << r.task_id << " " << r.model_id << " " << r.method
                  << " r" << r.repeat_index << ": " << to_string(r.terminal_status) << " after "
                  << r.iterations.size() << " iteration(s)\n";
    };
    const auto summary = run_matrix(spec, providers, deps, record_sink);
    std::cout << summary.runs << " run(s), " << summary.errored << " errored -> " << opt.out << "\n";
    return summary.errored > 0 ? kExitPartial : kExitOk;
}

// ---- report -----------------------------------------------------------------

int cmd_report(const std::string& in, const std::string& format, const std::string& out, const std::string& plots) {
    ReportFormat fmt;
    try {
        fmt = report_format_from_string(format);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    AggregateReport report;
    try {
        report = load_report(in);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    const auto errored = report.metadata.value("errored_records", 0);
    if (errored > 0) log_line("warning: " + std::to_string(errored) + " errored run(s) excluded from aggregation");
    const auto text = render(report, fmt);
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out, std::ios::binary | std::ios::trunc);
        f << text;
        if (!f) throw std::runtime_error("cannot write " + out);
    }
    if (!plots.empty()) {
        for (const auto& p : write_plots(report, plots)) log_line("wrote " + p.string());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compiler-in-the-loop evaluation of LLM-generated TFHE code"};
    app.require_subcommand(1);

    std::string config_path;
    std::string corpus_override;
    auto* validate = app.add_subcommand("validate-corpus", "Check manifests and run every ground truth through its driver");
    validate->add_option("--config", config_path, "Config file (JSON)");
    validate->add_option("--corpus", corpus_override, "Corpus root (overrides the config)");

    std::vector<std::string> doc_paths;
    std::string index_out = "index.bin";
    auto* index = app.add_subcommand("index-docs", "Chunk and embed documentation into a retrieval index");
    index->add_option("paths", doc_paths, "Files or directories")->required();
    index->add_option("--out", index_out, "Index file")->capture_default_str();
    index->add_option("--config", config_path, "Config file (JSON)");

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Run the experiment matrix");
    run->add_option("--config", run_opt.config, "Config file (JSON)")->required();
    run->add_option("--tasks", run_opt.tasks, "Task ids (comma separated; default all)");
    run->add_option("--models", run_opt.models, "Model ids (comma separated; default all)");
    run->add_option("--methods", run_opt.methods, "baseline,rag,fewshot,rag_fewshot (default all)");
    run->add_option("--repeats", run_opt.repeats, "Repeats per cell")->capture_default_str()->check(CLI::PositiveNumber);
    run->add_option("--max-iters", run_opt.max_iters, "Iteration budget (default from config, 10)")
        ->check(CLI::PositiveNumber);
    run->add_option("--parallelism", run_opt.parallelism, "Concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);
    run->add_option("--out", run_opt.out, "Run-record file (JSONL)")->capture_default_str();
    run->add_flag("--append", run_opt.append, "Append to --out instead of replacing it");

    std::string report_in, report_format = "md", report_out, plots_dir;
    auto* report = app.add_subcommand("report", "Aggregate run records");
    report->add_option("--in", report_in, "Run-record file (JSONL)")->required();
    report->add_option("--format", report_format, "csv, md or jsonl-summary")->capture_default_str();
    report->add_option("--out", report_out, "Output file (default stdout)");
    report->add_option("--plots", plots_dir, "Directory for SVG charts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*validate) return cmd_validate(config_path, corpus_override);
        if (*index) return cmd_index(config_path, doc_paths, index_out);
        if (*run) return cmd_run(run_opt);
        if (*report) return cmd_report(report_in, report_format, report_out, plots_dir);
    } catch (const ConfigError& e) {
        log_line(std::string("config error: ") + e.what());
        return kExitConfig;
    } catch (const CorpusError& e) {
        log_line(std::string("corpus error: ") + e.what());
        return kExitConfig;
    } catch (const RetrievalError& e) {
        log_line(std::string("retrieval error: ") + e.what());
        return kExitConfig;
    } catch (const ToolchainError& e) {
        log_line(std::string("toolchain error: ") + e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        log_line(std::string("error: ") + e.what());
        return kExitConfig;
    }
    return kExitOk;
}
