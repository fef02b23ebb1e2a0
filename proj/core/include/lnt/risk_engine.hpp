#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "lnt/conditional_laws.hpp"
#include "lnt/matrix.hpp"

namespace lnt {

/// Multidimensional geometric-Brownian market: dynamics
/// log S_t = log S_0 + theta t - diag(B) t / 2 + B^{1/2} W_t,
/// with cov the instantaneous covariance B and a fixed horizon t.
struct MarketModel {
    Eigen::VectorXd s0;
    Eigen::VectorXd theta;
    CovMatrix cov;
    double horizon;

    MarketModel(Eigen::VectorXd s0_in, Eigen::VectorXd theta_in, CovMatrix cov_in, double t);
    int dim() const { return cov.size(); }
};

struct Portfolio {
    Eigen::VectorXd weights;

    int dim() const { return static_cast<int>(weights.size()); }
};

/// Gaussian-exponent model of the portfolio value at the horizon, with the
/// permutation that moved positive-weight assets first. order[k] is the user
/// index of model component k.
struct MappedModel {
    ModelSpec model;
    std::vector<int> order;
    Eigen::VectorXd abs_weights;  ///< |xi| in model component order
};

/// mu_i = log S0_i + log|xi_i| + theta_i t - b_ii t / 2, covariance t B,
/// positives permuted first. Rejects zero weights.
MappedModel to_model(const MarketModel& market, const Portfolio& portfolio);

enum class AssetClass { Safe, Dangerous, ProportionalToX, SlowerThanX };

struct AssetStress {
    int asset = 0;                    ///< user index
    AssetClass cls = AssetClass::Safe;
    double exponent = 0.0;            ///< power of x in e_i(t, x)
    double log_coefficient = 0.0;     ///< log of the leading coefficient
    double log_conditional_value = 0.0;
    double conditional_value = 0.0;   ///< e_i(t, x); 0 on underflow
};

struct StressReport {
    double level = 0.0;
    TailSide side = TailSide::Left;
    std::vector<AssetStress> assets;        ///< in user order
    std::vector<int> driving_assets;        ///< user indices with exponent one
    std::optional<int> dominant_split;      ///< user index, right tail only
};

/// Index-crash scenario: conditional expectations e_i(t, x) = E[S^i_t | X_t = x]
/// for a benchmark with positive weights, as x -> 0. Assets driving the
/// minimum-variance weights decay proportionally to x (Safe); the rest decay
/// strictly faster (Dangerous).
StressReport stress_index_crash(const MarketModel& market, const Portfolio& benchmark,
                                double x);

/// Spread/outperformance scenario: mixed-sign benchmark, x -> infinity.
/// Exactly one long asset grows proportionally to x, together with the short
/// assets active in the dominant split; everything else grows slower.
StressReport stress_spread(const MarketModel& market, const Portfolio& long_short,
                           double x);

/// E[V_t | X_t = x] = sum_i v_i e_i(t, x) for a held portfolio v against the
/// benchmark defining the scenario.
double portfolio_conditional_value(const MarketModel& market, const Portfolio& held,
                                   const Portfolio& benchmark, double x);

/// Benchmark normalized to initial value one (weights divided by X_0).
Portfolio make_crash_scenario(const MarketModel& market, const Portfolio& benchmark);

/// Difference of two normalized indices: the positive-weight leg divided by
/// its initial value minus the negative-weight leg divided by its own.
Portfolio make_spread_scenario(const MarketModel& market, const Portfolio& long_short);

}  // namespace lnt
