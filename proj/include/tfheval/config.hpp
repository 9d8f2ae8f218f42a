#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfheval/llm_gateway.hpp"
#include "tfheval/metrics.hpp"
#include "tfheval/orchestrator.hpp"
#include "tfheval/retrieval.hpp"
#include "tfheval/toolchain.hpp"

namespace tfheval {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelEntry {
    ModelConfig config;
    /// Mock provider only: per-task scripts overriding config.mock_script.
    std::map<std::string, std::vector<std::string>> task_scripts;

    const std::vector<std::string>& script_for(const std::string& task_id) const;
};

struct RetrievalSettings {
    std::filesystem::path index_path = "index.bin";
    std::string embedder = "mock";  // "mock" or "http"
    std::size_t mock_dimension = 512;
    HttpEmbedderConfig http;
    RagParams rag;
    ChunkingParams chunking;
};

struct MetricSettings {
    std::size_t trivial_k = 50;
    std::size_t trivial_max_order = 4;
    /// Background corpus for trivial n-grams. Empty means every ground_truth.c
    /// under the corpus root plus the fenced code blocks of its docs/*.md.
    std::vector<std::filesystem::path> trivial_corpus;
};

/// Everything a `run` needs. Relative paths in the file are resolved against
/// the directory that contains it.
struct AppConfig {
    std::filesystem::path corpus_root = "corpus";
    std::filesystem::path api_surface;       // default: <corpus_root>/api_surface.txt
    std::filesystem::path fewshot_exemplar;  // default: <corpus_root>/or_gate/ground_truth.c
    std::vector<ModelEntry> models;
    ToolchainConfig toolchain;
    RetrievalSettings retrieval;
    MetricSettings metrics;
    LoopConfig loop;
    RetryPolicy retry;

    const ModelEntry& model(const std::string& id) const;
    /// Effective settings for record snapshots; never contains secrets.
    nlohmann::json snapshot() const;
};

/// Rejects unknown keys and ill-typed values with a ConfigError naming the key.
AppConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
AppConfig load_config(const std::filesystem::path& file);

/// metrics.trivial_corpus, or the default ground truths and docs, sorted.
std::vector<std::filesystem::path> trivial_corpus_files(const AppConfig& config);
/// Trivial n-grams over trivial_corpus_files(); corpus_id names the file
/// count and a content hash.
TrivialNgramSet build_trivial_set(const AppConfig& config);

}  // namespace tfheval
