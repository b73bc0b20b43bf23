#ifndef WELLREC_EVAL_HPP
#define WELLREC_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "wellrec/dataset.hpp"
#include "wellrec/errors.hpp"
#include "wellrec/fm_model.hpp"
#include "wellrec/ranker.hpp"

namespace wellrec {

struct ThresholdSpec {
    enum class Method { median, fixed, quantile };
    Method method = Method::median;
    double value = 0.0; // fixed threshold or quantile in [0,1]

    static ThresholdSpec median() { return {Method::median, 0.0}; }
    static ThresholdSpec fixed(double v) { return {Method::fixed, v}; }
    static ThresholdSpec quantile(double q) { return {Method::quantile, q}; }
};

/// Relevance for precision/recall: "threshold" scores each company's full
/// candidate vector and relevance means score >= threshold; "holdout" means
/// the held-out well is the one relevant item.
enum class RelevanceMode { threshold, holdout };

inline std::string to_string(RelevanceMode m) {
    return m == RelevanceMode::threshold ? "threshold" : "holdout";
}

struct CompanyEvalRow {
    int company_index;
    int holdout_well;
    int rank;            // 1-based position in top-k, 0 when absent
    bool hit;
    double precision;
    double recall;
    bool recall_skipped; // company had zero relevant wells
};

struct EvalReport {
    double hit_rate = 0.0;
    double mean_reciprocal_rank = 0.0;
    double precision_at_k = 0.0;
    double recall_at_k = 0.0;
    int k = 10;
    RelevanceMode relevance_mode = RelevanceMode::threshold;
    ThresholdSpec threshold_spec;
    int recall_skipped_companies = 0;
    std::vector<CompanyEvalRow> per_company;
};

/// Median (even count: mean of the middle two), a fixed value, or a
/// linearly interpolated quantile of the score vector.
inline double relevance_threshold(std::vector<double> scores, const ThresholdSpec& spec) {
    if (spec.method == ThresholdSpec::Method::fixed) return spec.value;
    if (scores.empty()) throw EvaluationError("relevance_threshold: empty score vector");
    std::sort(scores.begin(), scores.end());
    if (spec.method == ThresholdSpec::Method::median) {
        std::size_t n = scores.size();
        return n % 2 == 1 ? scores[n / 2] : 0.5 * (scores[n / 2 - 1] + scores[n / 2]);
    }
    double q = spec.value;
    if (q < 0.0 || q > 1.0) throw ConfigError("quantile must be in [0,1]");
    double pos = q * (scores.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, scores.size() - 1);
    double frac = pos - lo;
    return scores[lo] * (1.0 - frac) + scores[hi] * frac;
}

/// Leave-one-out evaluation over all holdout companies, producing the four
/// ranking metrics plus per-company detail. Recommendations are computed
/// against the split's train set with observed-well exclusion on.
inline EvalReport evaluate(const FMModel& model, const SplitPair& split,
                           const WellFeatureTable& table, int k = 10,
                           const ThresholdSpec& spec = ThresholdSpec::median(),
                           RelevanceMode mode = RelevanceMode::threshold) {
    if (split.holdout.empty()) throw EvaluationError("evaluate: empty holdout");
    if (k < 1) throw ConfigError("k must be >= 1");
    EvalReport report;
    report.k = k;
    report.relevance_mode = mode;
    report.threshold_spec = spec;

    double hit_sum = 0.0, rr_sum = 0.0, prec_sum = 0.0, rec_sum = 0.0;
    int evaluated_recall = 0;
    for (const auto& [u, held] : split.holdout) {
        auto scores = score_all_wells(model, u, split.train, table);
        std::vector<bool> excluded(scores.size(), false);
        for (int i : split.train.wells_of(u)) excluded[i] = true;
        RankedList top = detail::top_k_from_scores(u, scores, excluded, k);

        CompanyEvalRow row{};
        row.company_index = u;
        row.holdout_well = held;
        row.rank = 0;
        for (std::size_t r = 0; r < top.entries.size(); ++r) {
            if (top.entries[r].first == held) {
                row.rank = static_cast<int>(r) + 1;
                break;
            }
        }
        row.hit = row.rank > 0;
        hit_sum += row.hit ? 1.0 : 0.0;
        rr_sum += row.rank > 0 ? 1.0 / row.rank : 0.0;

        std::vector<int> relevant;
        if (mode == RelevanceMode::threshold) {
            std::vector<double> candidate_scores;
            for (std::size_t i = 0; i < scores.size(); ++i)
                if (!excluded[i]) candidate_scores.push_back(scores[i]);
            double thr = relevance_threshold(candidate_scores, spec);
            for (std::size_t i = 0; i < scores.size(); ++i)
                if (!excluded[i] && scores[i] >= thr) relevant.push_back(static_cast<int>(i));
        } else {
            relevant.push_back(held);
        }

        int relevant_in_top = 0;
        for (const auto& [i, s] : top.entries)
            if (std::binary_search(relevant.begin(), relevant.end(), i)) ++relevant_in_top;
        row.precision = static_cast<double>(relevant_in_top) / k;
        prec_sum += row.precision;
        if (relevant.empty()) {
            row.recall = 0.0;
            row.recall_skipped = true;
            ++report.recall_skipped_companies;
        } else {
            row.recall = static_cast<double>(relevant_in_top) / static_cast<double>(relevant.size());
            row.recall_skipped = false;
            rec_sum += row.recall;
            ++evaluated_recall;
        }
        report.per_company.push_back(row);
    }

    const double n = static_cast<double>(split.holdout.size());
    report.hit_rate = hit_sum / n;
    report.mean_reciprocal_rank = rr_sum / n;
    report.precision_at_k = prec_sum / n;
    report.recall_at_k = evaluated_recall > 0 ? rec_sum / evaluated_recall : 0.0;
    return report;
}

inline double hit_rate(const FMModel& model, const SplitPair& split, const WellFeatureTable& table,
                       int k = 10) {
    return evaluate(model, split, table, k).hit_rate;
}

inline double mean_reciprocal_rank(const FMModel& model, const SplitPair& split,
                                   const WellFeatureTable& table, int k = 10) {
    return evaluate(model, split, table, k).mean_reciprocal_rank;
}

inline double precision_at_k(const FMModel& model, const SplitPair& split,
                             const WellFeatureTable& table, int k = 10,
                             const ThresholdSpec& spec = ThresholdSpec::median()) {
    return evaluate(model, split, table, k, spec).precision_at_k;
}

inline double recall_at_k(const FMModel& model, const SplitPair& split,
                          const WellFeatureTable& table, int k = 10,
                          const ThresholdSpec& spec = ThresholdSpec::median()) {
    auto report = evaluate(model, split, table, k, spec);
    if (report.recall_skipped_companies == static_cast<int>(report.per_company.size()))
        throw EvaluationError("recall: every company had zero relevant wells");
    return report.recall_at_k;
}

/// Two-class labeling of wells by score; ties at the threshold classify
/// as desirable.
struct ThresholdClassification {
    double threshold = 0.0;
    std::vector<std::pair<int, double>> wells; // (well_index, score)
    std::vector<bool> desirable;               // parallel to wells
    int desirable_count = 0;
    int undesirable_count = 0;
};

inline ThresholdClassification classify_wells(const std::vector<double>& scores,
                                              double threshold) {
    if (scores.empty()) throw EvaluationError("classify_wells: empty score vector");
    ThresholdClassification out;
    out.threshold = threshold;
    out.wells.reserve(scores.size());
    out.desirable.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool good = scores[i] >= threshold;
        out.wells.emplace_back(static_cast<int>(i), scores[i]);
        out.desirable.push_back(good);
        (good ? out.desirable_count : out.undesirable_count)++;
    }
    return out;
}

struct PrPoint {
    double threshold;
    double recall;
    double precision;
};

/// Precision-recall sweep over all distinct score thresholds, descending.
/// Predicted positive means score >= threshold, so recall is non-decreasing
/// along the sweep.
inline std::vector<PrPoint> pr_curve(const std::vector<double>& scores,
                                     const std::vector<bool>& labels) {
    if (scores.size() != labels.size())
        throw EvaluationError("pr_curve: scores and labels differ in length");
    int total_pos = 0;
    for (bool l : labels) total_pos += l ? 1 : 0;
    if (total_pos == 0 || total_pos == static_cast<int>(labels.size()))
        throw EvaluationError("pr_curve: labels contain a single class");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<PrPoint> points;
    int tp = 0, fp = 0;
    std::size_t idx = 0;
    while (idx < order.size()) {
        double thr = scores[order[idx]];
        // consume the whole tie group at this threshold
        while (idx < order.size() && scores[order[idx]] == thr) {
            (labels[order[idx]] ? tp : fp)++;
            ++idx;
        }
        points.push_back({thr, static_cast<double>(tp) / total_pos,
                          static_cast<double>(tp) / (tp + fp)});
    }
    return points;
}

/// Fixed-width score histogram per class, for external plotting.
struct HistogramTable {
    std::vector<double> bin_lo;
    std::vector<double> bin_hi;
    std::vector<int> desirable_count;
    std::vector<int> undesirable_count;
};

inline HistogramTable class_separation_export(const ThresholdClassification& classification,
                                              int bins = 20) {
    if (classification.wells.empty())
        throw EvaluationError("class_separation_export: empty classification");
    if (bins < 1) throw ConfigError("bins must be >= 1");
    double lo = classification.wells[0].second, hi = lo;
    for (const auto& [i, s] : classification.wells) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (lo == hi) bins = 1;
    HistogramTable out;
    double width = bins > 0 ? (hi - lo) / bins : 0.0;
    for (int b = 0; b < bins; ++b) {
        out.bin_lo.push_back(lo + b * width);
        out.bin_hi.push_back(b + 1 == bins ? hi : lo + (b + 1) * width);
        out.desirable_count.push_back(0);
        out.undesirable_count.push_back(0);
    }
    for (std::size_t w = 0; w < classification.wells.size(); ++w) {
        double s = classification.wells[w].second;
        int b = width > 0.0 ? std::min(bins - 1, static_cast<int>((s - lo) / width)) : 0;
        (classification.desirable[w] ? out.desirable_count : out.undesirable_count)[b]++;
    }
    return out;
}

} // namespace wellrec

#endif
