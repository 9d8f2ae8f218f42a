#pragma once

// Independent reference implementations used to check the library. They are
// deliberately naive: ordered maps, full sorts, exact integer arithmetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace tfheval::oracle {

using Tokens = std::vector<std::string>;
using Gram = std::vector<std::string>;

// ---- pass@k -----------------------------------------------------------------

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;  // exact at every step
    return r;
}

inline double pass_at_k_exact(int n_total, int n_pass, int k) {
    return 1.0 - static_cast<double>(binomial(n_total - n_pass, k)) / static_cast<double>(binomial(n_total, k));
}

/// Monte Carlo estimate of P(at least one pass among k draws without
/// replacement) for every k in 1..n_total at once: one shuffle per trial, the
/// position of the first passing sample decides every k.
inline std::vector<double> pass_at_k_monte_carlo(int n_total, int n_pass, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> pool(n_total);
    std::vector<std::uint64_t> first_hit_at(n_total + 1, 0);
    for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < n_total; ++i) pool[i] = i < n_pass ? 1 : 0;
        int first = n_total;  // none
        for (int i = 0; i < n_total; ++i) {
            std::uniform_int_distribution<int> pick(i, n_total - 1);
            std::swap(pool[i], pool[pick(rng)]);
            if (pool[i] == 1) {
                first = i;
                break;
            }
        }
        ++first_hit_at[first];
    }
    std::vector<double> estimate(n_total + 1, 0.0);  // index k
    std::uint64_t cumulative = 0;
    for (int k = 1; k <= n_total; ++k) {
        cumulative += first_hit_at[k - 1];
        estimate[k] = static_cast<double>(cumulative) / trials;
    }
    return estimate;
}

// ---- n-grams ----------------------------------------------------------------

inline std::map<Gram, std::uint64_t> count_ngrams(const std::vector<Tokens>& corpus, std::size_t order) {
    std::map<Gram, std::uint64_t> counts;
    for (const auto& seq : corpus) {
        for (std::size_t i = 0; i + order <= seq.size(); ++i) {
            ++counts[Gram(seq.begin() + i, seq.begin() + i + order)];
        }
    }
    return counts;
}

/// Top-k per order by descending count, ties by ascending n-gram; full sort.
inline std::vector<std::set<Gram>> trivial_ngrams(const std::vector<Tokens>& corpus, std::size_t k,
                                                  std::size_t max_order) {
    std::vector<std::set<Gram>> out(max_order);
    for (std::size_t order = 1; order <= max_order; ++order) {
        const auto counts = count_ngrams(corpus, order);
        std::vector<std::pair<Gram, std::uint64_t>> all(counts.begin(), counts.end());
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (std::size_t i = 0; i < all.size() && i < k; ++i) out[order - 1].insert(all[i].first);
    }
    return out;
}

// ---- BLEU -------------------------------------------------------------------

/// Plain BLEU-4 style score with uniform weights and the same smoothing rule
/// as the library, computed from ordered maps. `ignore[n-1]` lists n-grams to
/// drop from both sides.
inline double bleu(const Tokens& cand, const Tokens& ref, const std::vector<std::set<Gram>>& ignore,
                   std::size_t max_order = 4, double eps = 1e-9) {
    double log_p = 0.0;
    std::uint64_t seen = 0;
    for (std::size_t n = 1; n <= max_order; ++n) {
        auto keep = [&](const Gram& g) { return n > ignore.size() || !ignore[n - 1].contains(g); };
        std::map<Gram, std::uint64_t> c, r;
        for (const auto& [g, cnt] : count_ngrams({cand}, n)) {
            if (keep(g)) c[g] = cnt;
        }
        for (const auto& [g, cnt] : count_ngrams({ref}, n)) {
            if (keep(g)) r[g] = cnt;
        }
        std::uint64_t total = 0, clipped = 0;
        for (const auto& [g, cnt] : c) {
            total += cnt;
            const auto it = r.find(g);
            clipped += it == r.end() ? 0 : std::min(cnt, it->second);
        }
        seen += total;
        const double num = clipped > 0 ? static_cast<double>(clipped) : eps;
        const double den = total > 0 ? static_cast<double>(total) : eps;
        log_p += std::log(num / den) / static_cast<double>(max_order);
    }
    if (cand.empty() || seen == 0) return 0.0;
    const double bp = cand.size() < ref.size()
                          ? std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()))
                          : 1.0;
    return std::min(1.0, bp * std::exp(log_p));
}

// ---- retrieval ----------------------------------------------------------------

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return dot / (std::sqrt(aa) * std::sqrt(bb));
}

/// Ids of the top_k rows by descending cosine, ties by ascending id.
inline std::vector<std::uint64_t> rank(const std::vector<double>& query, const std::vector<std::vector<double>>& rows,
                                       const std::vector<std::uint64_t>& ids, std::size_t top_k) {
    std::vector<std::pair<double, std::uint64_t>> scored;
    for (std::size_t i = 0; i < rows.size(); ++i) scored.emplace_back(cosine(query, rows[i]), ids[i]);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < scored.size() && i < top_k; ++i) out.push_back(scored[i].second);
    return out;
}

}  // namespace tfheval::oracle
