#ifndef WELLREC_IO_HPP
#define WELLREC_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "wellrec/dataset.hpp"
#include "wellrec/errors.hpp"
#include "wellrec/eval.hpp"
#include "wellrec/fm_model.hpp"
#include "wellrec/ranker.hpp"
#include "wellrec/train.hpp"

namespace wellrec {

/// Writes to path atomically: content goes to a temp file first and is
/// renamed into place, so failures never leave partial output behind.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write file: " + path);
        out << content;
        if (!out) throw IoError("write failure: " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot move file into place: " + path);
}

/// operator_id,rank,api_number,score with full round-trip precision.
inline void write_recommendations_csv(const std::string& path,
                                      const std::vector<RankedList>& lists,
                                      const InteractionSet& interactions) {
    std::ostringstream out;
    out << "operator_id,rank,api_number,score\n";
    for (const auto& list : lists) {
        for (std::size_t r = 0; r < list.entries.size(); ++r) {
            out << interactions.company_ids[list.company_index] << "," << (r + 1) << ","
                << interactions.well_ids[list.entries[r].first] << ","
                << detail::fmt_double(list.entries[r].second) << "\n";
        }
    }
    write_file_atomic(path, out.str());
}

inline void write_eval_report_csv(const std::string& path, const EvalReport& report) {
    std::ostringstream out;
    out << "metric,value\n";
    out << "hit_rate," << detail::fmt_double(report.hit_rate) << "\n";
    out << "mean_reciprocal_rank," << detail::fmt_double(report.mean_reciprocal_rank) << "\n";
    out << "precision_at_k," << detail::fmt_double(report.precision_at_k) << "\n";
    out << "recall_at_k," << detail::fmt_double(report.recall_at_k) << "\n";
    out << "k," << report.k << "\n";
    out << "relevance_mode," << to_string(report.relevance_mode) << "\n";
    out << "recall_skipped_companies," << report.recall_skipped_companies << "\n";
    write_file_atomic(path, out.str());
}

inline void write_per_company_csv(const std::string& path, const EvalReport& report,
                                  const InteractionSet& interactions) {
    std::ostringstream out;
    out << "operator_id,holdout_api_number,rank,hit,precision,recall,recall_skipped\n";
    for (const auto& row : report.per_company) {
        out << interactions.company_ids[row.company_index] << ","
            << interactions.well_ids[row.holdout_well] << "," << row.rank << ","
            << (row.hit ? 1 : 0) << "," << detail::fmt_double(row.precision) << ","
            << detail::fmt_double(row.recall) << "," << (row.recall_skipped ? 1 : 0) << "\n";
    }
    write_file_atomic(path, out.str());
}

inline void write_pr_curve_csv(const std::string& path, const std::vector<PrPoint>& points) {
    std::ostringstream out;
    out << "threshold,recall,precision\n";
    for (const auto& p : points)
        out << detail::fmt_double(p.threshold) << "," << detail::fmt_double(p.recall) << ","
            << detail::fmt_double(p.precision) << "\n";
    write_file_atomic(path, out.str());
}

inline void write_histogram_csv(const std::string& path, const HistogramTable& hist) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,desirable_count,undesirable_count\n";
    for (std::size_t b = 0; b < hist.bin_lo.size(); ++b)
        out << detail::fmt_double(hist.bin_lo[b]) << "," << detail::fmt_double(hist.bin_hi[b])
            << "," << hist.desirable_count[b] << "," << hist.undesirable_count[b] << "\n";
    write_file_atomic(path, out.str());
}

inline void write_classification_csv(const std::string& path,
                                     const ThresholdClassification& classification,
                                     const InteractionSet& interactions) {
    std::ostringstream out;
    out << "api_number,score,class\n";
    for (std::size_t w = 0; w < classification.wells.size(); ++w)
        out << interactions.well_ids[classification.wells[w].first] << ","
            << detail::fmt_double(classification.wells[w].second) << ","
            << (classification.desirable[w] ? "desirable" : "undesirable") << "\n";
    write_file_atomic(path, out.str());
}

inline void write_loss_trace_csv(const std::string& path, const LossTrace& trace) {
    std::ostringstream out;
    out << "epoch,objective,learning_rate,violation_rate\n";
    for (std::size_t e = 0; e < trace.size(); ++e)
        out << e << "," << detail::fmt_double(trace[e].objective) << ","
            << detail::fmt_double(trace[e].learning_rate) << ","
            << detail::fmt_double(trace[e].violation_rate) << "\n";
    write_file_atomic(path, out.str());
}

} // namespace wellrec

#endif
