#ifndef WELLREC_DATASET_HPP
#define WELLREC_DATASET_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wellrec/errors.hpp"

namespace wellrec {

using Pair = std::pair<int, int>; // (company_index, well_index)

/// Observed company-well interactions with bidirectional id/index maps.
/// Immutable after construction; indices follow first-appearance order
/// in the source file.
class InteractionSet {
public:
    std::vector<std::string> company_ids;
    std::vector<std::string> well_ids;
    std::set<Pair> pairs;
    std::size_t duplicate_count = 0;

    int num_companies() const { return static_cast<int>(company_ids.size()); }
    int num_wells() const { return static_cast<int>(well_ids.size()); }

    bool contains(int u, int i) const { return pairs.count({u, i}) != 0; }

    // wells observed by company u, ascending
    std::vector<int> wells_of(int u) const {
        std::vector<int> out;
        for (auto it = pairs.lower_bound({u, 0}); it != pairs.end() && it->first == u; ++it)
            out.push_back(it->second);
        return out;
    }

    int company_index(const std::string& id) const {
        for (int c = 0; c < num_companies(); ++c)
            if (company_ids[c] == id) return c;
        return -1;
    }
    int well_index(const std::string& id) const {
        for (int w = 0; w < num_wells(); ++w)
            if (well_ids[w] == id) return w;
        return -1;
    }
};

/// Per-well auxiliary numeric features plus the scaler that standardized them.
struct WellFeatureTable {
    std::vector<std::string> column_names;       // production, elevation, duration, [extras]
    std::vector<std::vector<double>> rows;       // one row per well_index
    std::vector<double> scaler_mean;             // empty until standardize()
    std::vector<double> scaler_stdev;
    bool standardized = false;

    int num_features() const { return static_cast<int>(column_names.size()); }
    int num_wells() const { return static_cast<int>(rows.size()); }
};

/// Sparse design-matrix row: one-hot company, one-hot well, auxiliary values.
struct EncodedRow {
    std::vector<std::pair<int, double>> nonzeros; // strictly increasing indices
    int dim = 0;                                  // n = C + I + A
};

struct SplitPair {
    InteractionSet train;
    std::vector<Pair> holdout; // exactly one entry per eligible company
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim whitespace and a trailing \r
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

inline int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == name) return static_cast<int>(c);
    return -1;
}

} // namespace detail

/// Reads interactions.csv (header: operator_id,api_number). Duplicate pairs
/// are collapsed and counted. Index assignment is first-appearance order.
inline InteractionSet load_interactions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open interaction file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("interaction file is empty: " + path);
    auto header = detail::split_csv_line(line);
    int op_col = detail::find_column(header, "operator_id");
    int api_col = detail::find_column(header, "api_number");
    if (op_col < 0) throw SchemaError("missing required column 'operator_id' in " + path);
    if (api_col < 0) throw SchemaError("missing required column 'api_number' in " + path);

    InteractionSet out;
    std::unordered_map<std::string, int> cidx, widx;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        int need = std::max(op_col, api_col);
        if (static_cast<int>(cells.size()) <= need)
            throw ParseError("too few columns at " + path + ":" + std::to_string(lineno));
        const std::string& op = cells[op_col];
        const std::string& api = cells[api_col];
        auto [ci, cnew] = cidx.try_emplace(op, out.num_companies());
        if (cnew) out.company_ids.push_back(op);
        auto [wi, wnew] = widx.try_emplace(api, out.num_wells());
        if (wnew) out.well_ids.push_back(api);
        if (!out.pairs.insert({ci->second, wi->second}).second)
            ++out.duplicate_count;
    }
    if (out.pairs.empty()) throw EmptyDatasetError("no data rows in " + path);
    return out;
}

/// Reads wells.csv (header: api_number,production,elevation,duration_days),
/// keyed to the interaction set's well indices. Every well in the interaction
/// set must be covered. Columns keep the stated order: production, elevation,
/// duration. With include_extra_columns, any further numeric header columns
/// are appended after those three.
inline WellFeatureTable load_well_features(const std::string& path,
                                           const InteractionSet& interactions,
                                           bool include_extra_columns = false) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open well feature file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError("well feature file is empty: " + path);
    auto header = detail::split_csv_line(line);
    int api_col = detail::find_column(header, "api_number");
    if (api_col < 0) throw SchemaError("missing required column 'api_number' in " + path);

    std::vector<int> feature_cols;
    WellFeatureTable table;
    for (const char* name : {"production", "elevation", "duration_days"}) {
        int c = detail::find_column(header, name);
        if (c < 0) throw SchemaError(std::string("missing required column '") + name + "' in " + path);
        feature_cols.push_back(c);
        table.column_names.push_back(name);
    }
    if (include_extra_columns) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            int ci = static_cast<int>(c);
            if (ci == api_col) continue;
            if (std::find(feature_cols.begin(), feature_cols.end(), ci) != feature_cols.end()) continue;
            feature_cols.push_back(ci);
            table.column_names.push_back(header[c]);
        }
    }

    const int n_wells = interactions.num_wells();
    table.rows.assign(n_wells, {});
    std::vector<bool> covered(n_wells, false);

    std::unordered_map<std::string, int> widx;
    for (int w = 0; w < n_wells; ++w) widx.emplace(interactions.well_ids[w], w);

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = detail::split_csv_line(line);
        if (static_cast<int>(cells.size()) <= api_col)
            throw ParseError("too few columns at " + path + ":" + std::to_string(lineno));
        auto it = widx.find(cells[api_col]);
        if (it == widx.end()) continue; // feature rows for wells outside the interaction set are ignored
        std::vector<double> row;
        for (int c : feature_cols) {
            if (c >= static_cast<int>(cells.size()))
                throw ParseError("too few columns at " + path + ":" + std::to_string(lineno));
            try {
                std::size_t pos = 0;
                double v = std::stod(cells[c], &pos);
                if (pos != cells[c].size()) throw std::invalid_argument("trailing");
                row.push_back(v);
            } catch (const std::exception&) {
                throw ParseError("non-numeric cell '" + cells[c] + "' at " + path + ":" +
                                 std::to_string(lineno));
            }
        }
        table.rows[it->second] = std::move(row);
        covered[it->second] = true;
    }

    std::string missing;
    for (int w = 0; w < n_wells; ++w)
        if (!covered[w]) missing += (missing.empty() ? "" : ", ") + interactions.well_ids[w];
    if (!missing.empty())
        throw CoverageError("wells without feature rows: " + missing);
    return table;
}

/// Z-score standardization per column, sample standard deviation.
/// Constant columns map to all zeros (stdev recorded as 0).
inline WellFeatureTable standardize(const WellFeatureTable& table) {
    if (table.rows.empty()) throw EmptyDatasetError("standardize: empty feature table");
    WellFeatureTable out = table;
    const int A = table.num_features();
    const int N = table.num_wells();
    out.scaler_mean.assign(A, 0.0);
    out.scaler_stdev.assign(A, 0.0);
    for (int a = 0; a < A; ++a) {
        double sum = 0.0;
        for (int w = 0; w < N; ++w) sum += table.rows[w][a];
        double mean = sum / N;
        double ss = 0.0;
        for (int w = 0; w < N; ++w) {
            double d = table.rows[w][a] - mean;
            ss += d * d;
        }
        double stdev = N > 1 ? std::sqrt(ss / (N - 1)) : 0.0;
        out.scaler_mean[a] = mean;
        out.scaler_stdev[a] = stdev;
        for (int w = 0; w < N; ++w)
            out.rows[w][a] = stdev > 0.0 ? (table.rows[w][a] - mean) / stdev : 0.0;
    }
    out.standardized = true;
    return out;
}

/// One-hot company + one-hot well + auxiliary feature values, as a sparse row.
/// Zero-valued auxiliary entries are omitted from the sparse form.
inline EncodedRow encode_row(int company_index, int well_index,
                             const InteractionSet& interactions,
                             const WellFeatureTable& table) {
    const int C = interactions.num_companies();
    const int I = interactions.num_wells();
    const int A = table.num_features();
    if (company_index < 0 || company_index >= C)
        throw IndexError("company index out of range: " + std::to_string(company_index));
    if (well_index < 0 || well_index >= I)
        throw IndexError("well index out of range: " + std::to_string(well_index));
    EncodedRow row;
    row.dim = C + I + A;
    row.nonzeros.reserve(2 + A);
    row.nonzeros.emplace_back(company_index, 1.0);
    row.nonzeros.emplace_back(C + well_index, 1.0);
    const auto& aux = table.rows[well_index];
    for (int a = 0; a < A; ++a)
        if (aux[a] != 0.0) row.nonzeros.emplace_back(C + I + a, aux[a]);
    return row;
}

/// Leave-one-out split: each company with >= 2 pairs donates one uniformly
/// chosen pair to the holdout. Single-pair companies stay entirely in train.
inline SplitPair split_leave_one_out(const InteractionSet& interactions, std::uint64_t seed) {
    SplitPair out;
    out.train = interactions;
    std::mt19937_64 rng(seed);
    for (int u = 0; u < interactions.num_companies(); ++u) {
        auto wells = interactions.wells_of(u);
        if (wells.size() < 2) continue;
        std::uniform_int_distribution<std::size_t> pick(0, wells.size() - 1);
        int held = wells[pick(rng)];
        out.train.pairs.erase({u, held});
        out.holdout.emplace_back(u, held);
    }
    return out;
}

} // namespace wellrec

#endif
