#include "tfheval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace tfheval {

using json = nlohmann::json;

bool TrivialNgramSet::contains(const Ngram& gram) const {
    const auto n = gram.size();
    return n >= 1 && n <= by_order.size() && by_order[n - 1].contains(gram);
}

std::size_t TrivialNgramSet::size() const {
    std::size_t total = 0;
    for (const auto& s : by_order) total += s.size();
    return total;
}

namespace {

using CountFn = kernels::NgramCounts (*)(std::span<const std::vector<std::string>>, std::size_t);

TrivialNgramSet trivial_with(CountFn count, std::span<const TokenSequence> corpus, std::size_t k,
                             std::size_t max_order, std::string corpus_id) {
    if (corpus.empty()) {
        throw MetricError("trivial n-gram corpus must not be empty");
    }
    if (max_order < 1) {
        throw MetricError("max_order must be >= 1");
    }
    TrivialNgramSet set;
    set.k = k;
    set.max_order = max_order;
    set.corpus_id = std::move(corpus_id);
    set.by_order.resize(max_order);
    if (k == 0) return set;

    for (std::size_t order = 1; order <= max_order; ++order) {
        const auto counts = count(corpus, order);
        std::vector<std::pair<const Ngram*, std::uint64_t>> ranked;
        ranked.reserve(counts.size());
        for (const auto& [gram, c] : counts) ranked.emplace_back(&gram, c);
        const auto keep = std::min(k, ranked.size());
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                          [](const auto& a, const auto& b) {
                              if (a.second != b.second) return a.second > b.second;
                              return *a.first < *b.first;
                          });
        for (std::size_t i = 0; i < keep; ++i) set.by_order[order - 1].insert(*ranked[i].first);
    }
    return set;
}

kernels::NgramCounts filtered_counts(const TokenSequence& seq, std::size_t order, const TrivialNgramSet& trivial) {
    auto counts = kernels::count_ngrams_serial(std::span<const TokenSequence>(&seq, 1), order);
    for (auto it = counts.begin(); it != counts.end();) {
        it = trivial.contains(it->first) ? counts.erase(it) : std::next(it);
    }
    return counts;
}

}  // namespace

TrivialNgramSet trivial_ngrams(std::span<const TokenSequence> corpus, std::size_t k, std::size_t max_order,
                               std::string corpus_id) {
    return trivial_with(&kernels::count_ngrams, corpus, k, max_order, std::move(corpus_id));
}

TrivialNgramSet trivial_ngrams_serial(std::span<const TokenSequence> corpus, std::size_t k, std::size_t max_order,
                                      std::string corpus_id) {
    return trivial_with(&kernels::count_ngrams_serial, corpus, k, max_order, std::move(corpus_id));
}

BleuBreakdown crystal_bleu_breakdown(const TokenSequence& candidate, const TokenSequence& reference,
                                     const TrivialNgramSet& trivial, const BleuParams& params) {
    if (params.max_order < 1) {
        throw MetricError("max_order must be >= 1");
    }
    BleuBreakdown out;
    std::uint64_t all_totals = 0;
    for (std::size_t order = 1; order <= params.max_order; ++order) {
        const auto cand = filtered_counts(candidate, order, trivial);
        const auto ref = filtered_counts(reference, order, trivial);
        std::uint64_t matches = 0;
        std::uint64_t total = 0;
        for (const auto& [gram, c] : cand) {
            total += c;
            if (auto it = ref.find(gram); it != ref.end()) matches += std::min(c, it->second);
        }
        out.matches.push_back(matches);
        out.totals.push_back(total);
        all_totals += total;
    }
    if (candidate.empty() || all_totals == 0) {
        out.score = 0.0;
        out.precisions.assign(params.max_order, 0.0);
        return out;
    }

    double log_sum = 0.0;
    for (std::size_t i = 0; i < params.max_order; ++i) {
        const double num = out.matches[i] == 0 ? params.epsilon : static_cast<double>(out.matches[i]);
        const double den = out.totals[i] == 0 ? params.epsilon : static_cast<double>(out.totals[i]);
        const double p = num / den;
        out.precisions.push_back(p);
        log_sum += std::log(p);
    }
    const double c = static_cast<double>(candidate.size());
    const double r = static_cast<double>(reference.size());
    out.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;
    out.score = out.brevity_penalty * std::exp(log_sum / static_cast<double>(params.max_order));
    out.score = std::clamp(out.score, 0.0, 1.0);
    return out;
}

double crystal_bleu(const TokenSequence& candidate, const TokenSequence& reference, const TrivialNgramSet& trivial,
                    const BleuParams& params) {
    return crystal_bleu_breakdown(candidate, reference, trivial, params).score;
}

double pass_at_k(std::int64_t n_total, std::int64_t n_pass, std::int64_t k) {
    if (n_total < 1 || n_pass < 0 || n_pass > n_total || k < 1 || k > n_total) {
        throw MetricError("pass@k needs n_t >= 1, 0 <= n <= n_t, 1 <= k <= n_t (got n_t=" + std::to_string(n_total) +
                          ", n=" + std::to_string(n_pass) + ", k=" + std::to_string(k) + ")");
    }
    if (k == 1) {
        return static_cast<double>(n_pass) / static_cast<double>(n_total);
    }
    if (n_total - n_pass < k) return 1.0;
    // C(n_t - n, k) / C(n_t, k) = prod_{i=0}^{k-1} (n_t - n - i) / (n_t - i)
    double fail_all = 1.0;
    for (std::int64_t i = 0; i < k; ++i) {
        fail_all *= static_cast<double>(n_total - n_pass - i) / static_cast<double>(n_total - i);
    }
    return 1.0 - fail_all;
}

// ---- aggregation ------------------------------------------------------------

AggregateReport aggregate(std::span<const RunRecord> records) {
    using CellKey = std::tuple<std::string, std::string, std::string>;
    std::map<CellKey, std::vector<const RunRecord*>> cells;
    for (const auto& r : records) cells[{r.task_id, r.model_id, r.method}].push_back(&r);

    AggregateReport report;
    std::size_t errored_total = 0;
    for (auto& [key, members] : cells) {
        std::sort(members.begin(), members.end(),
                  [](const RunRecord* a, const RunRecord* b) { return a->repeat_index < b->repeat_index; });
        for (std::size_t i = 1; i < members.size(); ++i) {
            if (members[i]->repeat_index == members[i - 1]->repeat_index) {
                throw AggregationError("duplicate repeat " + std::to_string(members[i]->repeat_index) + " in cell " +
                                       std::get<0>(key) + "/" + std::get<1>(key) + "/" + std::get<2>(key));
            }
        }
        std::optional<json> configured_repeats;
        for (const auto* r : members) {
            const auto repeats = r->config_snapshot.value("repeats", json());
            if (!configured_repeats) {
                configured_repeats = repeats;
            } else if (*configured_repeats != repeats) {
                throw AggregationError("mixed n_t within cell " + std::get<0>(key) + "/" + std::get<1>(key) + "/" +
                                       std::get<2>(key));
            }
        }

        AggregateRow row;
        std::tie(row.task_id, row.model_id, row.method) = key;
        double bleu_sum = 0.0;
        for (const auto* r : members) {
            if (r->terminal_status == TerminalStatus::errored) {
                ++row.errored_runs;
                continue;
            }
            ++row.runs;
            bleu_sum += r->crystal_bleu;
            if (r->compiled()) ++row.compile_passes;
            if (r->functional_pass()) ++row.func_passes;
            for (const auto& it : r->iterations) {
                ++row.iterations;
                if (it.extraction.wrong_format()) ++row.wrong_format_iterations;
                if (it.repetition_flag) ++row.repetition_iterations;
                row.input_tokens += it.usage.input_tokens;
                row.output_tokens += it.usage.output_tokens;
            }
        }
        errored_total += static_cast<std::size_t>(row.errored_runs);
        if (row.runs > 0) {
            row.mean_crystal_bleu = bleu_sum / row.runs;
            row.pass_at_1_comp = pass_at_k(row.runs, row.compile_passes, 1);
            row.pass_at_1_func = pass_at_k(row.runs, row.func_passes, 1);
        }
        if (row.iterations > 0) {
            row.wrong_format_rate =
                static_cast<double>(row.wrong_format_iterations) / static_cast<double>(row.iterations);
            row.repetition_rate = static_cast<double>(row.repetition_iterations) / static_cast<double>(row.iterations);
        }
        report.rows.push_back(std::move(row));
    }

    report.metadata = {{"records", records.size()},
                       {"errored_records", errored_total},
                       {"cells", report.rows.size()},
                       {"pass_at_k", {{"k", 1}, {"n_t", "non-errored repeats per cell"}}}};
    if (!records.empty()) {
        const auto* first = &*std::min_element(records.begin(), records.end(), [](const auto& a, const auto& b) {
            return std::tie(a.task_id, a.model_id, a.method, a.repeat_index) <
                   std::tie(b.task_id, b.model_id, b.method, b.repeat_index);
        });
        for (const char* key : {"metrics", "extraction", "retrieval", "loop"}) {
            if (first->config_snapshot.contains(key)) report.metadata[key] = first->config_snapshot[key];
        }
    }
    return report;
}

json to_json(const AggregateRow& row) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"task_id", row.task_id},
            {"model_id", row.model_id},
            {"method", row.method},
            {"runs", row.runs},
            {"errored_runs", row.errored_runs},
            {"compile_passes", row.compile_passes},
            {"func_passes", row.func_passes},
            {"mean_crystal_bleu", opt(row.mean_crystal_bleu)},
            {"pass_at_1_comp", opt(row.pass_at_1_comp)},
            {"pass_at_1_func", opt(row.pass_at_1_func)},
            {"iterations", row.iterations},
            {"wrong_format_iterations", row.wrong_format_iterations},
            {"repetition_iterations", row.repetition_iterations},
            {"wrong_format_rate", opt(row.wrong_format_rate)},
            {"repetition_rate", opt(row.repetition_rate)},
            {"input_tokens", row.input_tokens},
            {"output_tokens", row.output_tokens}};
}

}  // namespace tfheval
