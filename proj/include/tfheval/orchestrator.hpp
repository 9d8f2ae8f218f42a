#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfheval/corpus.hpp"
#include "tfheval/llm_gateway.hpp"
#include "tfheval/metrics.hpp"
#include "tfheval/prompts.hpp"
#include "tfheval/records.hpp"
#include "tfheval/retrieval.hpp"
#include "tfheval/toolchain.hpp"

namespace tfheval {

enum class MethodName { baseline, rag, fewshot, rag_fewshot };

std::string_view to_string(MethodName m);
MethodName method_name_from_string(std::string_view s);

struct RagParams {
    std::size_t top_k = 3;
    std::size_t budget_chars = 3000;
};

struct MethodConfig {
    MethodName name = MethodName::baseline;
    std::optional<RagParams> rag;
    std::optional<std::filesystem::path> fewshot_example_ref;

    /// Fills exactly the optional parts `name` calls for.
    static MethodConfig make(MethodName name, const RagParams& rag, const std::filesystem::path& exemplar);

    bool uses_rag() const noexcept { return name == MethodName::rag || name == MethodName::rag_fewshot; }
    bool uses_fewshot() const noexcept { return name == MethodName::fewshot || name == MethodName::rag_fewshot; }

    /// rag present iff the method retrieves; exemplar present iff it is few-shot.
    void validate() const;
    nlohmann::json snapshot() const;
};

enum class HistoryPolicy { keep_all, keep_last };

std::string_view to_string(HistoryPolicy p);
HistoryPolicy history_policy_from_string(std::string_view s);

struct LoopConfig {
    int max_iterations = 10;
    HistoryPolicy history = HistoryPolicy::keep_all;
    std::size_t keep_last_exchanges = 4;  // used with HistoryPolicy::keep_last
    RevisionBudget revision_budget;
    bool exclude_fewshot_for_or_gate = false;
    BleuParams bleu;

    void validate() const;
    nlohmann::json snapshot() const;
};

class OrchestratorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shared, read-only collaborators of a run. The toolchain and embedder must
/// tolerate concurrent calls when used from run_matrix.
struct RunDeps {
    Toolchain* toolchain = nullptr;
    const RetrievalIndex* index = nullptr;
    Embedder* embedder = nullptr;
    const TrivialNgramSet* trivial = nullptr;  // none: plain BLEU
    RetryPolicy retry;
    LogSink log;
    /// Merged into every record's config_snapshot (toolchain settings etc.).
    nlohmann::json extra_snapshot = nlohmann::json::object();
};

/// Heading placed before the few-shot exemplar in the first user message.
inline constexpr std::string_view kExemplarIntro = "Here is a correct implementation of an OR gate using the TFHE library:";

/// System message: role instructions, output-format requirement and, for
/// RAG methods, the documentation excerpts retrieved for the task
/// description. First user message: task description and plaintext
/// reference, plus the OR-gate exemplar for few-shot methods.
Conversation build_first_prompt(const TaskManifest& task, const MethodConfig& method, const LoopConfig& loop,
                                const RetrievalIndex* index, Embedder* embedder);

/// One evaluation: generate, extract, compile and revise until the code
/// compiles or the iteration budget runs out; then run the functional test
/// (when compiled) and score CrystalBLEU of the last extracted code against
/// the ground truth. Gateway and toolchain failures yield an Errored record.
RunRecord run_one(const TaskManifest& task, const ModelConfig& model, const MethodConfig& method,
                  Provider& provider, const RunDeps& deps, const LoopConfig& loop, int repeat_index);

struct MatrixSpec {
    std::vector<TaskManifest> tasks;
    std::vector<ModelConfig> models;
    std::vector<MethodConfig> methods;
    int repeats = 5;
    int parallelism = 1;
    LoopConfig loop;

    void validate() const;
    std::size_t run_count() const noexcept { return tasks.size() * models.size() * methods.size() * repeats; }
};

/// A new provider per run, so scripted providers replay from the start.
using ProviderFactory = std::function<std::unique_ptr<Provider>(const ModelConfig&, const TaskManifest&)>;

/// Receives each record once; calls are serialized.
using RecordSink = std::function<void(const RunRecord&)>;

struct MatrixSummary {
    std::size_t runs = 0;
    std::size_t errored = 0;
};

/// Executes every (task, model, method, repeat) combination on up to
/// `parallelism` worker threads. Records reach `sink` in completion order.
/// Repeats are numbered from 1.
MatrixSummary run_matrix(const MatrixSpec& spec, const ProviderFactory& providers, const RunDeps& deps,
                         const RecordSink& sink);

/// Append-only JSONL record file; one flushed line per record.
class JsonlSink {
public:
    explicit JsonlSink(const std::filesystem::path& file, bool append = false);

    void write(const RunRecord& record);
    RecordSink as_sink();

private:
    std::mutex mutex_;
    std::ofstream out_;
    std::filesystem::path path_;
};

}  // namespace tfheval
