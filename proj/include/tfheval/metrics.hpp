#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfheval/kernels.hpp"
#include "tfheval/lexer.hpp"
#include "tfheval/records.hpp"

namespace tfheval {

using kernels::Ngram;

/// The k most frequent n-grams of each order 1..max_order in a background
/// corpus. CrystalBLEU ignores these when comparing two programs.
struct TrivialNgramSet {
    std::vector<std::set<Ngram>> by_order;  // by_order[n - 1] holds n-grams
    std::size_t k = 0;
    std::size_t max_order = 0;
    std::string corpus_id;

    bool contains(const Ngram& gram) const;
    std::size_t size() const;
};

/// Counts every n-gram of orders 1..max_order over `corpus` and keeps the k
/// most frequent per order; equal counts are broken by lexicographic order of
/// the n-gram's tokens.
TrivialNgramSet trivial_ngrams(std::span<const TokenSequence> corpus, std::size_t k, std::size_t max_order,
                               std::string corpus_id = {});

/// Serial counting path, kept to cross-check the parallel one.
TrivialNgramSet trivial_ngrams_serial(std::span<const TokenSequence> corpus, std::size_t k, std::size_t max_order,
                                      std::string corpus_id = {});

struct BleuParams {
    std::size_t max_order = 4;
    double epsilon = 1e-9;
};

struct BleuBreakdown {
    double score = 0.0;
    double brevity_penalty = 1.0;
    std::vector<std::uint64_t> matches;  // clipped, per order
    std::vector<std::uint64_t> totals;   // candidate n-grams after filtering, per order
    std::vector<double> precisions;      // after smoothing
};

/// BLEU with uniform weights over orders 1..max_order on clipped n-gram
/// precision, with every n-gram in `trivial` removed from both sides first.
/// An order with no clipped matches uses (0 + eps) / (total + eps [total == 0]);
/// an order with no candidate n-grams at all contributes eps / eps = 1. The
/// brevity penalty exp(1 - |ref| / |cand|) applies when |cand| < |ref|, on raw
/// token counts. A candidate left with no n-grams scores 0.
BleuBreakdown crystal_bleu_breakdown(const TokenSequence& candidate, const TokenSequence& reference,
                                     const TrivialNgramSet& trivial, const BleuParams& params = {});

double crystal_bleu(const TokenSequence& candidate, const TokenSequence& reference, const TrivialNgramSet& trivial,
                    const BleuParams& params = {});

class MetricError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// 1 - C(n_t - n, k) / C(n_t, k), evaluated as a running product of ratios.
/// Requires n_t >= 1, 0 <= n <= n_t, 1 <= k <= n_t.
double pass_at_k(std::int64_t n_total, std::int64_t n_pass, std::int64_t k);

struct AggregateRow {
    std::string task_id;
    std::string model_id;
    std::string method;
    int runs = 0;          // n_t: non-errored records in the cell
    int errored_runs = 0;
    int compile_passes = 0;
    int func_passes = 0;
    std::optional<double> mean_crystal_bleu;
    std::optional<double> pass_at_1_comp;
    std::optional<double> pass_at_1_func;
    std::uint64_t iterations = 0;
    std::uint64_t wrong_format_iterations = 0;
    std::uint64_t repetition_iterations = 0;
    std::optional<double> wrong_format_rate;
    std::optional<double> repetition_rate;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
};

struct AggregateReport {
    std::vector<AggregateRow> rows;  // sorted by (task, model, method)
    nlohmann::json metadata = nlohmann::json::object();
};

class AggregationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per (task, model, method) cell: mean CrystalBLEU, pass@1 for compilation
/// and function with n_t = non-errored repeats, wrong-format and repetition
/// rates over iterations, and summed tokens. Errored runs are counted but
/// excluded from every metric. The result does not depend on record order.
AggregateReport aggregate(std::span<const RunRecord> records);

nlohmann::json to_json(const AggregateRow& row);

}  // namespace tfheval
