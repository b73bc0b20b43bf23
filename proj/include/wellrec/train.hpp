#ifndef WELLREC_TRAIN_HPP
#define WELLREC_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wellrec/dataset.hpp"
#include "wellrec/errors.hpp"
#include "wellrec/fm_model.hpp"

namespace wellrec {

/// (company, observed well, unobserved well)
struct TripleSample {
    int u;
    int i;
    int j;
};

struct EpochStats {
    double objective;       // mean pairwise log-likelihood minus L2 penalty, over the probe set
    double learning_rate;
    double violation_rate;  // fraction of probe triples with d <= 0
};

using LossTrace = std::vector<EpochStats>;

/// Uniform sampling of (company, observed, unobserved) triples. A company is
/// eligible when it has at least one observed and at least one unobserved well.
class TripleSampler {
public:
    explicit TripleSampler(const InteractionSet& train) : train_(&train) {
        const int C = train.num_companies();
        const int I = train.num_wells();
        observed_.resize(C);
        for (int u = 0; u < C; ++u) {
            observed_[u] = train.wells_of(u);
            if (!observed_[u].empty() && static_cast<int>(observed_[u].size()) < I)
                eligible_.push_back(u);
        }
        if (eligible_.empty())
            throw SaturationError("no company has both observed and unobserved wells");
    }

    const std::vector<int>& observed(int u) const { return observed_[u]; }
    const std::vector<int>& eligible() const { return eligible_; }

    bool is_observed(int u, int well) const {
        const auto& obs = observed_[u];
        return std::binary_search(obs.begin(), obs.end(), well);
    }

    // number of unobserved candidate negatives for company u
    int negatives(int u) const {
        return train_->num_wells() - static_cast<int>(observed_[u].size());
    }

    std::pair<int, int> sample_pair(std::mt19937_64& rng) const {
        std::uniform_int_distribution<std::size_t> cu(0, eligible_.size() - 1);
        int u = eligible_[cu(rng)];
        const auto& obs = observed_[u];
        std::uniform_int_distribution<std::size_t> ci(0, obs.size() - 1);
        return {u, obs[ci(rng)]};
    }

    int sample_negative(int u, std::mt19937_64& rng) const {
        std::uniform_int_distribution<int> cw(0, train_->num_wells() - 1);
        int j;
        do {
            j = cw(rng);
        } while (is_observed(u, j));
        return j;
    }

    TripleSample sample(std::mt19937_64& rng) const {
        auto [u, i] = sample_pair(rng);
        return {u, i, sample_negative(u, rng)};
    }

private:
    const InteractionSet* train_;
    std::vector<std::vector<int>> observed_;
    std::vector<int> eligible_;
};

inline TripleSample sample_triple(const InteractionSet& train, std::mt19937_64& rng) {
    return TripleSampler(train).sample(rng);
}

inline double lr_schedule(double eta0, int epoch_index, Schedule mode, double exponent) {
    if (mode == Schedule::constant) return eta0;
    return eta0 / std::pow(epoch_index + 1.0, exponent);
}

inline double squared_norm(const FMModel& model) {
    double s = model.w0 * model.w0;
    for (double x : model.w) s += x * x;
    for (double x : model.V) s += x * x;
    return s;
}

/// sum ln sigma(d_uij) - lambda * ||theta||^2 over the given triples.
inline double bpr_objective(const FMModel& model, const std::vector<TripleSample>& triples,
                            double lambda, const InteractionSet& interactions,
                            const WellFeatureTable& table) {
    double obj = 0.0;
    for (const auto& t : triples) {
        double d = utility_diff(model, t.u, t.i, t.j, interactions, table);
        // ln sigma(d), stable on both tails
        obj += d >= 0.0 ? -std::log1p(std::exp(-d)) : d - std::log1p(std::exp(d));
    }
    return obj - lambda * squared_norm(model);
}

namespace detail {

/// Sparse gradient of d = f(u,i) - f(u,j) over the union of nonzero features,
/// evaluated at the current parameters. Shared by the SGD step and the
/// gradient-correctness tests.
struct PairGradient {
    double d = 0.0;
    std::vector<int> features;            // union of nonzero indices, ascending
    std::vector<double> dw;               // dd/dw_p per feature
    std::vector<std::vector<double>> dv;  // dd/dv_pf, per feature a k-vector
};

inline PairGradient pair_gradient(const FMModel& model, const EncodedRow& xi,
                                  const EncodedRow& xj) {
    const int k = model.k;
    std::unordered_map<int, std::pair<double, double>> uni; // idx -> (xi_val, xj_val)
    for (auto [idx, val] : xi.nonzeros) uni[idx].first = val;
    for (auto [idx, val] : xj.nonzeros) uni[idx].second = val;

    std::vector<double> si(k, 0.0), sj(k, 0.0); // per-factor sums of v_qf * x_q
    for (auto [idx, val] : xi.nonzeros)
        for (int f = 0; f < k; ++f) si[f] += model.v(idx, f) * val;
    for (auto [idx, val] : xj.nonzeros)
        for (int f = 0; f < k; ++f) sj[f] += model.v(idx, f) * val;

    PairGradient g;
    g.d = score(model, xi) - score(model, xj);
    g.features.reserve(uni.size());
    for (const auto& [idx, vals] : uni) g.features.push_back(idx);
    std::sort(g.features.begin(), g.features.end());
    g.dw.reserve(g.features.size());
    g.dv.reserve(g.features.size());
    for (int idx : g.features) {
        auto [ai, aj] = uni[idx];
        g.dw.push_back(ai - aj);
        std::vector<double> row(k);
        for (int f = 0; f < k; ++f) {
            double vpf = model.v(idx, f);
            row[f] = (ai * si[f] - vpf * ai * ai) - (aj * sj[f] - vpf * aj * aj);
        }
        g.dv.push_back(std::move(row));
    }
    return g;
}

/// theta_p += eta * scale * (mult * dd/dtheta_p - 2 lambda theta_p) over the
/// touched parameters. mult = sigma(-d) is the pairwise log-likelihood slope.
inline void apply_pair_update(FMModel& model, const PairGradient& g, double mult, double eta,
                              double lambda, double scale = 1.0) {
    const double step = eta * scale;
    for (std::size_t p = 0; p < g.features.size(); ++p) {
        int idx = g.features[p];
        model.w[idx] += step * (mult * g.dw[p] - 2.0 * lambda * model.w[idx]);
        for (int f = 0; f < model.k; ++f) {
            double& vpf = model.v(idx, f);
            vpf += step * (mult * g.dv[p][f] - 2.0 * lambda * vpf);
        }
    }
}

} // namespace detail

/// One stochastic gradient-ascent step on ln sigma(d) - lambda ||theta||^2.
/// Regularization is applied only to the parameters touched by the sample.
inline void bpr_step(FMModel& model, const TripleSample& t, double eta, double lambda,
                     const InteractionSet& interactions, const WellFeatureTable& table) {
    if (t.i == t.j) throw DegeneratePairError("bpr_step requires i != j");
    EncodedRow xi = encode_row(t.u, t.i, interactions, table);
    EncodedRow xj = encode_row(t.u, t.j, interactions, table);
    auto g = detail::pair_gradient(model, xi, xj);
    if (!std::isfinite(g.d))
        throw NumericError("non-finite utility difference during bpr_step");
    detail::apply_pair_update(model, g, sigmoid(-g.d), eta, lambda);
}

/// Rank-weighted pairwise step: draw negatives until one violates the unit
/// margin or max_samples draws are exhausted. On a violation after t draws
/// with N candidate negatives the update is scaled by ln(floor(N/t) + 1).
/// Returns the number of negatives drawn; zero violations leave the model
/// unchanged.
inline int warp_step(FMModel& model, int u, int i, const TripleSampler& sampler, int max_samples,
                     double eta, double lambda, const InteractionSet& interactions,
                     const WellFeatureTable& table, std::mt19937_64& rng) {
    EncodedRow xi = encode_row(u, i, interactions, table);
    double pos = score(model, xi);
    if (!std::isfinite(pos))
        throw NumericError("non-finite positive score during warp_step");
    const int n_neg = sampler.negatives(u);
    for (int t = 1; t <= max_samples; ++t) {
        int j = sampler.sample_negative(u, rng);
        EncodedRow xj = encode_row(u, j, interactions, table);
        double neg = score(model, xj);
        if (!std::isfinite(neg))
            throw NumericError("non-finite negative score during warp_step");
        if (neg + 1.0 > pos) {
            // rank weight normalized into (0, 1]; the raw ln(rank+1) scale is
            // unstable once dense feature columns enter every update
            double weight = std::log(static_cast<double>(n_neg / t) + 1.0) /
                            std::log(static_cast<double>(n_neg) + 1.0);
            auto g = detail::pair_gradient(model, xi, xj);
            detail::apply_pair_update(model, g, sigmoid(-g.d), eta, lambda, weight);
            return t;
        }
    }
    return max_samples;
}

struct TrainResult {
    FMModel model;
    LossTrace trace;
};

constexpr int kProbeTriples = 256;

/// Full training loop: init, then per epoch |train pairs| sampled updates at
/// the epoch's scheduled rate. The trace records the objective over a fixed
/// seeded probe set. Deterministic given the config seed.
inline TrainResult train(const InteractionSet& interactions, const WellFeatureTable& table,
                         const TrainConfig& config) {
    config.validate();
    const int n = interactions.num_companies() + interactions.num_wells() + table.num_features();
    TrainResult out;
    out.model = init_model(n, config);
    TripleSampler sampler(interactions);

    // probe set drawn from its own stream so the training stream is
    // independent of the probe size
    std::mt19937_64 probe_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<TripleSample> probe;
    probe.reserve(kProbeTriples);
    for (int p = 0; p < kProbeTriples; ++p) probe.push_back(sampler.sample(probe_rng));

    std::mt19937_64 rng(config.seed + 1);
    const std::size_t updates_per_epoch = interactions.pairs.size();
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double eta = lr_schedule(config.learning_rate, epoch, config.schedule,
                                 config.schedule_exponent);
        try {
            for (std::size_t s = 0; s < updates_per_epoch; ++s) {
                if (config.loss == LossKind::bpr) {
                    bpr_step(out.model, sampler.sample(rng), eta, config.regularization,
                             interactions, table);
                } else {
                    auto [u, i] = sampler.sample_pair(rng);
                    warp_step(out.model, u, i, sampler, config.max_samples, eta,
                              config.regularization, interactions, table, rng);
                }
            }
        } catch (const NumericError& e) {
            throw NumericError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ")");
        }
        EpochStats stats;
        stats.learning_rate = eta;
        stats.objective =
            bpr_objective(out.model, probe, config.regularization, interactions, table) /
            static_cast<double>(probe.size());
        int violations = 0;
        for (const auto& t : probe)
            if (utility_diff(out.model, t.u, t.i, t.j, interactions, table) <= 0.0) ++violations;
        stats.violation_rate = static_cast<double>(violations) / static_cast<double>(probe.size());
        out.trace.push_back(stats);
    }
    return out;
}

} // namespace wellrec

#endif
