#include "tfheval/orchestrator.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "tfheval/extraction.hpp"
#include "tfheval/lexer.hpp"

namespace tfheval {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(MethodName m) {
    switch (m) {
        case MethodName::baseline: return "baseline";
        case MethodName::rag: return "rag";
        case MethodName::fewshot: return "fewshot";
        case MethodName::rag_fewshot: return "rag_fewshot";
    }
    return "?";
}

MethodName method_name_from_string(std::string_view s) {
    for (auto m : {MethodName::baseline, MethodName::rag, MethodName::fewshot, MethodName::rag_fewshot}) {
        if (s == to_string(m)) return m;
    }
    throw std::invalid_argument("unknown method: " + std::string(s));
}

std::string_view to_string(HistoryPolicy p) { return p == HistoryPolicy::keep_all ? "keep_all" : "keep_last"; }

HistoryPolicy history_policy_from_string(std::string_view s) {
    if (s == "keep_all") return HistoryPolicy::keep_all;
    if (s == "keep_last") return HistoryPolicy::keep_last;
    throw std::invalid_argument("unknown history policy: " + std::string(s));
}

MethodConfig MethodConfig::make(MethodName name, const RagParams& rag, const fs::path& exemplar) {
    MethodConfig m;
    m.name = name;
    if (m.uses_rag()) m.rag = rag;
    if (m.uses_fewshot()) m.fewshot_example_ref = exemplar;
    return m;
}

void MethodConfig::validate() const {
    const auto name_str = std::string(to_string(name));
    if (uses_rag() != rag.has_value()) {
        throw std::invalid_argument("method " + name_str + (rag ? ": unexpected rag parameters" : ": needs rag parameters"));
    }
    if (uses_fewshot() != fewshot_example_ref.has_value()) {
        throw std::invalid_argument("method " + name_str +
                                    (fewshot_example_ref ? ": unexpected few-shot exemplar" : ": needs a few-shot exemplar"));
    }
    if (rag && rag->top_k == 0) {
        throw std::invalid_argument("method " + name_str + ": top_k must be >= 1");
    }
    if (fewshot_example_ref && fewshot_example_ref->empty()) {
        throw std::invalid_argument("method " + name_str + ": empty exemplar path");
    }
}

json MethodConfig::snapshot() const {
    json j{{"name", to_string(name)}};
    j["rag"] = rag ? json{{"top_k", rag->top_k}, {"budget_chars", rag->budget_chars}} : json(nullptr);
    j["fewshot_example_ref"] = fewshot_example_ref ? json(fewshot_example_ref->generic_string()) : json(nullptr);
    return j;
}

void LoopConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (history == HistoryPolicy::keep_last && keep_last_exchanges == 0) {
        throw std::invalid_argument("keep_last history needs at least one exchange");
    }
    if (revision_budget.max_bytes == 0 || revision_budget.max_error_lines == 0) {
        throw std::invalid_argument("revision budget must be positive");
    }
    if (bleu.max_order < 1 || !(bleu.epsilon > 0.0)) {
        throw std::invalid_argument("bleu needs max_order >= 1 and epsilon > 0");
    }
}

json LoopConfig::snapshot() const {
    json j{{"max_iterations", max_iterations},
           {"history", to_string(history)},
           {"revision_budget", {{"max_bytes", revision_budget.max_bytes},
                                {"max_error_lines", revision_budget.max_error_lines}}},
           {"exclude_fewshot_for_or_gate", exclude_fewshot_for_or_gate}};
    if (history == HistoryPolicy::keep_last) j["keep_last_exchanges"] = keep_last_exchanges;
    return j;
}

// ---- prompts ----------------------------------------------------------------

Conversation build_first_prompt(const TaskManifest& task, const MethodConfig& method, const LoopConfig& loop,
                                const RetrievalIndex* index, Embedder* embedder) {
    method.validate();
    std::string system = std::string(base_system_prompt()) + "\n\n" + std::string(output_format_requirement());
    if (method.uses_rag()) {
        if (!index || !embedder) {
            throw OrchestratorError("method " + std::string(to_string(method.name)) + " needs a retrieval index");
        }
        try {
            const auto hits = index->retrieve(task.description, method.rag->top_k, *embedder);
            system = augment_prompt(system, hits, method.rag->budget_chars);
        } catch (const std::exception& e) {
            throw OrchestratorError(std::string("retrieval failed: ") + e.what());
        }
    }

    std::string user = "Task: " + task.title + "\n\n" + task.description +
                       "\n\nReference implementation in plain C, without encryption:\n```c\n" +
                       read_file(task.reference_plaintext) + "```\n";
    const bool skip_exemplar = loop.exclude_fewshot_for_or_gate && task.task_id == "or_gate";
    if (method.uses_fewshot() && !skip_exemplar) {
        std::string exemplar;
        try {
            exemplar = read_file(*method.fewshot_example_ref);
        } catch (const std::exception&) {
            throw OrchestratorError("missing few-shot exemplar: " + method.fewshot_example_ref->string());
        }
        if (!exemplar.empty() && exemplar.back() != '\n') exemplar.push_back('\n');
        user += "\n" + std::string(kExemplarIntro) + "\n```c\n" + exemplar + "```\n";
    }
    user += "\nWrite the TFHE implementation of this task.";

    Conversation conv;
    conv.add_system(std::move(system));
    conv.add_user(std::move(user));
    return conv;
}

// ---- one run ----------------------------------------------------------------

namespace {

json metrics_snapshot(const RunDeps& deps, const LoopConfig& loop) {
    json j{{"crystal_bleu", {{"max_order", loop.bleu.max_order}, {"epsilon", loop.bleu.epsilon}}}};
    if (deps.trivial) {
        j["trivial_ngrams"] = {{"k", deps.trivial->k},
                               {"max_order", deps.trivial->max_order},
                               {"corpus_id", deps.trivial->corpus_id}};
    } else {
        j["trivial_ngrams"] = nullptr;
    }
    return j;
}

json run_snapshot(const ModelConfig& model, const MethodConfig& method, const RunDeps& deps, const LoopConfig& loop) {
    json j = deps.extra_snapshot.is_object() ? deps.extra_snapshot : json::object();
    j["model"] = model.snapshot();
    j["method"] = method.snapshot();
    j["loop"] = loop.snapshot();
    j["metrics"] = metrics_snapshot(deps, loop);
    j["extraction"] = {{"rule", "last complete fenced block"}, {"repetition", "sha256 of normalized code"}};
    if (method.uses_rag() && deps.index && deps.embedder) {
        j["retrieval"] = {{"embedder", deps.index->embedder_id()},
                          {"chunks", deps.index->size()},
                          {"query", "task description"}};
    }
    return j;
}

}  // namespace

RunRecord run_one(const TaskManifest& task, const ModelConfig& model, const MethodConfig& method,
                  Provider& provider, const RunDeps& deps, const LoopConfig& loop, int repeat_index) {
    const auto started = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.task_id = task.task_id;
    rec.model_id = model.model_id;
    rec.method = std::string(to_string(method.name));
    rec.repeat_index = repeat_index;
    rec.config_snapshot = run_snapshot(model, method, deps, loop);

    auto finish = [&]() -> RunRecord {
        rec.wall_time =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
        return std::move(rec);
    };
    auto fail = [&](const std::string& what) -> RunRecord {
        rec.terminal_status = TerminalStatus::errored;
        rec.error = what;
        rec.func_report.reset();
        rec.link_report.reset();
        if (deps.log) deps.log("run " + rec.task_id + "/" + rec.model_id + "/" + rec.method + "/r" +
                               std::to_string(repeat_index) + " errored: " + what);
        return finish();
    };

    if (!deps.toolchain) return fail("no toolchain configured");

    try {
        loop.validate();
        Conversation conv = build_first_prompt(task, method, loop, deps.index, deps.embedder);
        std::string prompt_message = conv.messages().back().text;
        std::vector<Fingerprint> failed;
        std::optional<CompileReport> compiled;
        int compiled_at = 0;

        for (int i = 1; i <= loop.max_iterations; ++i) {
            IterationRecord it;
            it.index = i;
            it.prompt_message = prompt_message;

            const Conversation request =
                loop.history == HistoryPolicy::keep_all ? conv : conv.keep_last_exchanges(loop.keep_last_exchanges);
            const Completion reply = complete(provider, model, request, deps.retry);
            it.response = reply.text;
            it.usage = reply.usage;
            rec.totals += reply.usage;
            conv.add_assistant(reply.text);

            it.extraction = extract_code(reply.text);
            std::string next_prompt;
            if (it.extraction.wrong_format()) {
                next_prompt = build_revision_prompt(WrongFormat{}, loop.revision_budget);
            } else {
                const std::string& code = *it.extraction.code;
                rec.final_code = code;
                it.repetition_flag = detect_repetition(failed, code);
                const WorkspaceKey key{task.task_id, model.model_id, rec.method, repeat_index, i};
                it.compile_report = deps.toolchain->compile(code, task, key);
                if (it.compile_report->success) {
                    compiled = *it.compile_report;
                    compiled_at = i;
                    rec.iterations.push_back(std::move(it));
                    break;
                }
                failed.push_back(fingerprint(code));
                next_prompt = build_revision_prompt(CompileFailure{&*it.compile_report}, loop.revision_budget);
            }
            rec.iterations.push_back(std::move(it));
            if (i < loop.max_iterations) {
                conv.add_user(next_prompt);
                prompt_message = std::move(next_prompt);
            }
        }

        if (compiled) {
            rec.terminal_status = TerminalStatus::compile_success;
            const WorkspaceKey key{task.task_id, model.model_id, rec.method, repeat_index, compiled_at};
            auto outcome = deps.toolchain->link_and_run(*compiled, task, key);
            rec.func_report = std::move(outcome.func);
            rec.link_report = std::move(outcome.link_failure);
        } else {
            rec.terminal_status = TerminalStatus::iteration_budget_exhausted;
        }

        if (rec.final_code) {
            static const TrivialNgramSet no_trivial;
            const auto reference = lex(read_file(task.ground_truth_tfhe));
            rec.crystal_bleu =
                crystal_bleu(lex(*rec.final_code), reference, deps.trivial ? *deps.trivial : no_trivial, loop.bleu);
        }
    } catch (const GatewayError& e) {
        return fail(std::string("gateway: ") + e.what());
    } catch (const ToolchainError& e) {
        return fail(std::string("toolchain: ") + e.what());
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return finish();
}

// ---- matrix -----------------------------------------------------------------

void MatrixSpec::validate() const {
    if (tasks.empty() || models.empty() || methods.empty()) {
        throw std::invalid_argument("matrix needs at least one task, model and method");
    }
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
    for (const auto& m : models) m.validate();
    for (const auto& m : methods) m.validate();
    loop.validate();
}

MatrixSummary run_matrix(const MatrixSpec& spec, const ProviderFactory& providers, const RunDeps& deps,
                         const RecordSink& sink) {
    spec.validate();
    struct Job {
        const TaskManifest* task;
        const ModelConfig* model;
        const MethodConfig* method;
        int repeat;
    };
    std::vector<Job> jobs;
    jobs.reserve(spec.run_count());
    for (const auto& t : spec.tasks)
        for (const auto& m : spec.models)
            for (const auto& me : spec.methods)
                for (int r = 1; r <= spec.repeats; ++r) jobs.push_back({&t, &m, &me, r});

    std::atomic<std::size_t> next{0};
    std::mutex sink_mutex;
    std::exception_ptr sink_error;
    MatrixSummary summary;

    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            const Job& job = jobs[i];
            RunDeps run_deps = deps;
            run_deps.extra_snapshot["repeats"] = spec.repeats;
            RunRecord rec;
            try {
                auto provider = providers(*job.model, *job.task);
                if (!provider) throw OrchestratorError("no provider for model " + job.model->model_id);
                rec = run_one(*job.task, *job.model, *job.method, *provider, run_deps, spec.loop, job.repeat);
            } catch (const std::exception& e) {
                rec = RunRecord{};
                rec.task_id = job.task->task_id;
                rec.model_id = job.model->model_id;
                rec.method = std::string(to_string(job.method->name));
                rec.repeat_index = job.repeat;
                rec.terminal_status = TerminalStatus::errored;
                rec.error = e.what();
                rec.config_snapshot = run_deps.extra_snapshot;
            }
            std::lock_guard lock(sink_mutex);
            if (sink_error) return;
            ++summary.runs;
            if (rec.terminal_status == TerminalStatus::errored) ++summary.errored;
            try {
                sink(rec);
            } catch (...) {
                sink_error = std::current_exception();
                next = jobs.size();
                return;
            }
        }
    };

    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(spec.parallelism), jobs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (sink_error) std::rethrow_exception(sink_error);
    return summary;
}

// ---- JSONL sink -------------------------------------------------------------

JsonlSink::JsonlSink(const fs::path& file, bool append) : path_(file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    out_.open(file, append ? std::ios::app : std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open " + file.string() + " for writing");
}

void JsonlSink::write(const RunRecord& record) {
    const auto line = to_json(record).dump();
    std::lock_guard lock(mutex_);
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write to " + path_.string() + " failed");
}

RecordSink JsonlSink::as_sink() {
    return [this](const RunRecord& r) { write(r); };
}

}  // namespace tfheval
