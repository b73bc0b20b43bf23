#ifndef WELLREC_RANKER_HPP
#define WELLREC_RANKER_HPP

#include <algorithm>
#include <utility>
#include <vector>

#include "wellrec/dataset.hpp"
#include "wellrec/fm_model.hpp"

namespace wellrec {

/// Top-k recommendation list for one company, descending by score,
/// ties broken by ascending well index.
struct RankedList {
    int company_index = -1;
    std::vector<std::pair<int, double>> entries; // (well_index, score)
};

/// Scores every well for company u in one pass. The company-side partial
/// sums are hoisted so each well costs O(k * (1 + A)) instead of a full
/// row rebuild.
inline std::vector<double> score_all_wells(const FMModel& model, int u,
                                           const InteractionSet& interactions,
                                           const WellFeatureTable& table) {
    const int C = interactions.num_companies();
    const int I = interactions.num_wells();
    const int A = table.num_features();
    if (u < 0 || u >= C) throw IndexError("company index out of range: " + std::to_string(u));
    if (C + I + A != model.n)
        throw MismatchError("model dimensionality " + std::to_string(model.n) +
                            " does not match dataset n=" + std::to_string(C + I + A));

    const int k = model.k;
    std::vector<double> scores(I);
    const double base = model.w0 + model.w[u];
    for (int i = 0; i < I; ++i) {
        double s = base + model.w[C + i];
        const auto& aux = table.rows[i];
        for (int a = 0; a < A; ++a) s += model.w[C + I + a] * aux[a];
        for (int f = 0; f < k; ++f) {
            double sum = model.v(u, f) + model.v(C + i, f);
            double sq = model.v(u, f) * model.v(u, f) + model.v(C + i, f) * model.v(C + i, f);
            for (int a = 0; a < A; ++a) {
                double t = model.v(C + I + a, f) * aux[a];
                sum += t;
                sq += t * t;
            }
            s += 0.5 * (sum * sum - sq);
        }
        scores[i] = s;
    }
    return scores;
}

namespace detail {

inline RankedList top_k_from_scores(int u, const std::vector<double>& scores,
                                    const std::vector<bool>& excluded, int k) {
    RankedList out;
    out.company_index = u;
    std::vector<int> candidates;
    candidates.reserve(scores.size());
    for (int i = 0; i < static_cast<int>(scores.size()); ++i)
        if (!excluded[i]) candidates.push_back(i);
    auto better = [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    std::size_t keep = std::min<std::size_t>(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(), better);
    candidates.resize(keep);
    out.entries.reserve(keep);
    for (int i : candidates) out.entries.emplace_back(i, scores[i]);
    return out;
}

} // namespace detail

/// Top-k wells for company u. Observed training wells are excluded by
/// default; zero remaining candidates yield an empty list.
inline RankedList recommend_top_k(const FMModel& model, int u, int k,
                                  const InteractionSet& interactions,
                                  const WellFeatureTable& table, bool exclude_observed = true) {
    if (k < 1) throw ConfigError("k must be >= 1");
    auto scores = score_all_wells(model, u, interactions, table);
    std::vector<bool> excluded(scores.size(), false);
    if (exclude_observed)
        for (int i : interactions.wells_of(u)) excluded[i] = true;
    return detail::top_k_from_scores(u, scores, excluded, k);
}

/// Wells ranked by training interaction count, the score field carrying the
/// count. Observed wells of u are excluded.
inline RankedList popularity_baseline(const InteractionSet& train, int u, int k) {
    if (k < 1) throw ConfigError("k must be >= 1");
    const int I = train.num_wells();
    std::vector<double> counts(I, 0.0);
    for (const auto& [c, w] : train.pairs) counts[w] += 1.0;
    std::vector<bool> excluded(I, false);
    for (int i : train.wells_of(u)) excluded[i] = true;
    return detail::top_k_from_scores(u, counts, excluded, k);
}

/// How often each well appears across all companies' top-k lists.
inline std::vector<int> recommendation_frequency(const FMModel& model,
                                                 const InteractionSet& interactions,
                                                 const WellFeatureTable& table, int k,
                                                 bool exclude_observed = true) {
    std::vector<int> freq(interactions.num_wells(), 0);
    for (int u = 0; u < interactions.num_companies(); ++u)
        for (const auto& [i, s] : recommend_top_k(model, u, k, interactions, table, exclude_observed).entries)
            ++freq[i];
    return freq;
}

} // namespace wellrec

#endif
