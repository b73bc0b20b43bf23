#ifndef WELLREC_FM_MODEL_HPP
#define WELLREC_FM_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "wellrec/dataset.hpp"
#include "wellrec/errors.hpp"

namespace wellrec {

enum class LossKind { bpr, warp };
enum class Schedule { constant, invscaling };

inline std::string to_string(LossKind l) { return l == LossKind::bpr ? "bpr" : "warp"; }
inline std::string to_string(Schedule s) { return s == Schedule::constant ? "constant" : "invscaling"; }

/// Training hyperparameters. Defaults: 20 factors, warp loss, max samples 20,
/// lambda 0.1, sigma 0.1, learning rate 0.1, invscaling schedule.
struct TrainConfig {
    int factors = 20;
    LossKind loss = LossKind::warp;
    int epochs = 30;
    double learning_rate = 0.1;
    Schedule schedule = Schedule::invscaling;
    double schedule_exponent = 0.25;
    double regularization = 0.1;
    int max_samples = 20;
    double init_sigma = 0.1;
    std::uint64_t seed = 42;

    void validate() const {
        if (factors < 1) throw ConfigError("factors must be >= 1");
        if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
        if (regularization < 0.0) throw ConfigError("regularization must be >= 0");
        if (max_samples < 1) throw ConfigError("max_samples must be >= 1");
        if (init_sigma <= 0.0) throw ConfigError("init_sigma must be > 0");
        if (epochs < 0) throw ConfigError("epochs must be >= 0");
    }
};

/// Second-order factorization machine: global bias, linear weights, and a
/// row-major n x k latent factor matrix. Immutable during inference.
struct FMModel {
    double w0 = 0.0;
    std::vector<double> w;  // length n
    std::vector<double> V;  // n * k, row-major
    int n = 0;
    int k = 0;
    TrainConfig config;     // provenance snapshot

    double v(int feature, int factor) const { return V[static_cast<std::size_t>(feature) * k + factor]; }
    double& v(int feature, int factor) { return V[static_cast<std::size_t>(feature) * k + factor]; }
};

/// w0 and w start at zero; V entries are i.i.d. Normal(0, init_sigma^2)
/// from the seeded generator.
inline FMModel init_model(int n, const TrainConfig& config) {
    config.validate();
    if (n < 1) throw ConfigError("feature dimensionality must be >= 1");
    FMModel m;
    m.n = n;
    m.k = config.factors;
    m.config = config;
    m.w.assign(n, 0.0);
    m.V.resize(static_cast<std::size_t>(n) * m.k);
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, config.init_sigma);
    for (auto& x : m.V) x = gauss(rng);
    return m;
}

/// Logistic sigmoid, stable for large |d|.
inline double sigmoid(double d) {
    if (d >= 0.0) {
        return 1.0 / (1.0 + std::exp(-d));
    }
    double e = std::exp(d);
    return e / (1.0 + e);
}

/// FM score via the factorized O(k * nnz) identity:
/// w0 + sum_i w_i x_i + 1/2 sum_f [(sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2]
inline double score(const FMModel& model, const EncodedRow& x) {
    double out = model.w0;
    for (auto [idx, val] : x.nonzeros) {
        if (idx < 0 || idx >= model.n)
            throw IndexError("feature index " + std::to_string(idx) + " out of range for n=" +
                             std::to_string(model.n));
        out += model.w[idx] * val;
    }
    for (int f = 0; f < model.k; ++f) {
        double s = 0.0, sq = 0.0;
        for (auto [idx, val] : x.nonzeros) {
            double t = model.v(idx, f) * val;
            s += t;
            sq += t * t;
        }
        out += 0.5 * (s * s - sq);
    }
    return out;
}

/// Utility score f(u, i | theta) for a company-well pair.
inline double score_pair(const FMModel& model, int company_index, int well_index,
                         const InteractionSet& interactions, const WellFeatureTable& table) {
    return score(model, encode_row(company_index, well_index, interactions, table));
}

/// f(u, i | theta) - f(u, j | theta); the bias and company terms cancel.
inline double utility_diff(const FMModel& model, int u, int i, int j,
                           const InteractionSet& interactions, const WellFeatureTable& table) {
    if (i == j) throw DegeneratePairError("utility_diff requires distinct wells, got i = j = " +
                                          std::to_string(i));
    return score_pair(model, u, i, interactions, table) -
           score_pair(model, u, j, interactions, table);
}

constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace detail

/// Plain-text model file. Decimal text at 17 significant digits, which
/// round-trips IEEE doubles exactly. Layout: header lines (version, n, k,
/// full TrainConfig), then w0, the n linear weights, and the n*k factor
/// entries one per line.
inline void save_model(const FMModel& model, const std::string& path) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write model file: " + path);
        out << "wellrec-fm-model\n";
        out << "version " << kModelFormatVersion << "\n";
        out << "n " << model.n << "\n";
        out << "k " << model.k << "\n";
        const TrainConfig& c = model.config;
        out << "config.factors " << c.factors << "\n";
        out << "config.loss " << to_string(c.loss) << "\n";
        out << "config.epochs " << c.epochs << "\n";
        out << "config.learning_rate " << detail::fmt_double(c.learning_rate) << "\n";
        out << "config.schedule " << to_string(c.schedule) << "\n";
        out << "config.schedule_exponent " << detail::fmt_double(c.schedule_exponent) << "\n";
        out << "config.regularization " << detail::fmt_double(c.regularization) << "\n";
        out << "config.max_samples " << c.max_samples << "\n";
        out << "config.init_sigma " << detail::fmt_double(c.init_sigma) << "\n";
        out << "config.seed " << c.seed << "\n";
        out << "w0 " << detail::fmt_double(model.w0) << "\n";
        for (double x : model.w) out << detail::fmt_double(x) << "\n";
        for (double x : model.V) out << detail::fmt_double(x) << "\n";
        if (!out) throw IoError("write failure: " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot move model file into place: " + path);
}

inline FMModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    std::string line;
    auto next = [&](const std::string& what) -> std::string {
        if (!std::getline(in, line))
            throw FormatError("truncated model file (" + what + " missing): " + path);
        return line;
    };
    auto keyed = [&](const std::string& key) -> std::string {
        std::string l = next(key);
        if (l.rfind(key + " ", 0) != 0)
            throw FormatError("expected '" + key + "' line in " + path + ", got: " + l);
        return l.substr(key.size() + 1);
    };
    if (next("magic") != "wellrec-fm-model")
        throw FormatError("not a model file: " + path);
    int version = std::stoi(keyed("version"));
    if (version != kModelFormatVersion)
        throw VersionError("model format version " + std::to_string(version) +
                           " not supported (expected " + std::to_string(kModelFormatVersion) + ")");
    FMModel m;
    try {
        m.n = std::stoi(keyed("n"));
        m.k = std::stoi(keyed("k"));
        m.config.factors = std::stoi(keyed("config.factors"));
        std::string loss = keyed("config.loss");
        if (loss != "bpr" && loss != "warp") throw FormatError("unknown loss kind: " + loss);
        m.config.loss = loss == "bpr" ? LossKind::bpr : LossKind::warp;
        m.config.epochs = std::stoi(keyed("config.epochs"));
        m.config.learning_rate = std::stod(keyed("config.learning_rate"));
        std::string sched = keyed("config.schedule");
        if (sched != "constant" && sched != "invscaling")
            throw FormatError("unknown schedule: " + sched);
        m.config.schedule = sched == "constant" ? Schedule::constant : Schedule::invscaling;
        m.config.schedule_exponent = std::stod(keyed("config.schedule_exponent"));
        m.config.regularization = std::stod(keyed("config.regularization"));
        m.config.max_samples = std::stoi(keyed("config.max_samples"));
        m.config.init_sigma = std::stod(keyed("config.init_sigma"));
        m.config.seed = std::stoull(keyed("config.seed"));
        m.w0 = std::stod(keyed("w0"));
        if (m.n < 1 || m.k < 1) throw FormatError("bad dimensions in " + path);
        m.w.resize(m.n);
        for (int i = 0; i < m.n; ++i) m.w[i] = std::stod(next("w[" + std::to_string(i) + "]"));
        m.V.resize(static_cast<std::size_t>(m.n) * m.k);
        for (std::size_t i = 0; i < m.V.size(); ++i)
            m.V[i] = std::stod(next("V[" + std::to_string(i) + "]"));
    } catch (const std::invalid_argument&) {
        throw FormatError("malformed numeric field in model file: " + path);
    } catch (const std::out_of_range&) {
        throw FormatError("numeric field out of range in model file: " + path);
    }
    return m;
}

} // namespace wellrec

#endif
