#include "lnt/risk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lnt {

MarketModel::MarketModel(Eigen::VectorXd s0_in, Eigen::VectorXd theta_in,
                         CovMatrix cov_in, double t)
    : s0(std::move(s0_in)), theta(std::move(theta_in)), cov(std::move(cov_in)), horizon(t) {
    const int n = cov.size();
    if (s0.size() != n || theta.size() != n) {
        throw ValidationError("s0 and theta must match the covariance dimension");
    }
    if ((s0.array() <= 0.0).any()) throw ValidationError("initial prices must be positive");
    if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
}

MappedModel to_model(const MarketModel& market, const Portfolio& portfolio) {
    const int n = market.dim();
    if (portfolio.dim() != n) {
        throw ValidationError("portfolio has " + std::to_string(portfolio.dim()) +
                              " weights for " + std::to_string(n) + " assets");
    }
    for (int i = 0; i < n; ++i) {
        if (portfolio.weights[i] == 0.0) {
            throw ZeroWeight("benchmark weight " + std::to_string(i + 1) + " is zero");
        }
    }

    // positives first, stable within each group
    std::vector<int> order;
    order.reserve(n);
    for (int i = 0; i < n; ++i)
        if (portfolio.weights[i] > 0.0) order.push_back(i);
    const int m = static_cast<int>(order.size());
    for (int i = 0; i < n; ++i)
        if (portfolio.weights[i] < 0.0) order.push_back(i);
    if (m == 0) throw ValidationError("benchmark needs at least one positive weight");

    const double t = market.horizon;
    Eigen::VectorXd mu(n), abs_w(n);
    Eigen::MatrixXd cov_t(n, n);
    for (int k = 0; k < n; ++k) {
        const int i = order[k];
        abs_w[k] = std::abs(portfolio.weights[i]);
        mu[k] = std::log(market.s0[i]) + std::log(abs_w[k]) + market.theta[i] * t -
                market.cov(i, i) * t / 2.0;
        for (int l = 0; l < n; ++l) cov_t(k, l) = t * market.cov(order[k], order[l]);
    }
    return MappedModel{ModelSpec(std::move(mu), CovMatrix(std::move(cov_t)), m),
                       std::move(order), std::move(abs_w)};
}

namespace {

// e_i(t, x) from the conditional structure of the mapped model: the leading
// term of E[exp(Y_k)|X = x] is x^{E_k} exp(mu'_k + B'_kk / 2), and
// S^i = exp(Y_k) / |xi_i|.
template <class Law>
StressReport build_report(const MappedModel& mapped, const Law& law, double x,
                          TailSide side) {
    const int n = mapped.model.dim();
    StressReport report;
    report.level = x;
    report.side = side;
    report.assets.resize(n);

    const std::vector<int>& active = law.qp().active_set;
    const double log_x = std::log(x);
    for (int k = 0; k < n; ++k) {
        AssetStress a;
        a.asset = mapped.order[k];
        const bool driving = std::binary_search(active.begin(), active.end(), k);
        if (side == TailSide::Left) {
            a.cls = driving ? AssetClass::Safe : AssetClass::Dangerous;
        } else {
            a.cls = driving ? AssetClass::ProportionalToX : AssetClass::SlowerThanX;
        }
        a.exponent = driving ? 1.0 : law.exponents()[k];
        a.log_coefficient = law.mu_prime()[k] + 0.5 * law.cov_prime()(k, k) -
                            std::log(mapped.abs_weights[k]);
        a.log_conditional_value = a.exponent * log_x + a.log_coefficient;
        a.conditional_value = std::exp(a.log_conditional_value);
        if (driving) report.driving_assets.push_back(mapped.order[k]);
        report.assets[a.asset] = a;
    }
    std::sort(report.driving_assets.begin(), report.driving_assets.end());
    return report;
}

}  // namespace

StressReport stress_index_crash(const MarketModel& market, const Portfolio& benchmark,
                                double x) {
    if (!(x > 0.0)) throw DomainError("index level must be positive");
    if ((benchmark.weights.array() <= 0.0).any()) {
        throw ValidationError("index-crash scenario requires positive benchmark weights");
    }
    MappedModel mapped = to_model(market, benchmark);
    ConditionalLawLeft law(mapped.model);
    return build_report(mapped, law, x, TailSide::Left);
}

StressReport stress_spread(const MarketModel& market, const Portfolio& long_short,
                           double x) {
    if (!(x > 0.0)) throw DomainError("spread level must be positive");
    MappedModel mapped = to_model(market, long_short);
    ConditionalLawRight law(mapped.model);
    StressReport report = build_report(mapped, law, x, TailSide::Right);
    report.dominant_split = mapped.order[law.dominant_split()];
    return report;
}

double portfolio_conditional_value(const MarketModel& market, const Portfolio& held,
                                   const Portfolio& benchmark, double x) {
    if (held.dim() != market.dim()) {
        throw ValidationError("held portfolio dimension does not match the market");
    }
    const bool crash = (benchmark.weights.array() > 0.0).all();
    StressReport report = crash ? stress_index_crash(market, benchmark, x)
                                : stress_spread(market, benchmark, x);
    double value = 0.0;
    for (int i = 0; i < market.dim(); ++i) {
        if (held.weights[i] == 0.0) continue;
        value += held.weights[i] * report.assets[i].conditional_value;
    }
    return value;
}

Portfolio make_crash_scenario(const MarketModel& market, const Portfolio& benchmark) {
    if (benchmark.dim() != market.dim()) {
        throw ValidationError("benchmark dimension does not match the market");
    }
    if ((benchmark.weights.array() <= 0.0).any()) {
        throw ValidationError("crash scenario requires positive benchmark weights");
    }
    const double x0 = benchmark.weights.dot(market.s0);
    return Portfolio{benchmark.weights / x0};
}

Portfolio make_spread_scenario(const MarketModel& market, const Portfolio& long_short) {
    const int n = market.dim();
    if (long_short.dim() != n) {
        throw ValidationError("benchmark dimension does not match the market");
    }
    double x0_long = 0.0, x0_short = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = long_short.weights[i];
        if (w == 0.0) throw ZeroWeight("benchmark weight " + std::to_string(i + 1) + " is zero");
        if (w > 0.0) x0_long += w * market.s0[i];
        else x0_short += -w * market.s0[i];
    }
    if (x0_long <= 0.0 || x0_short <= 0.0) {
        throw ValidationError("spread scenario needs both a long and a short leg");
    }
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        const double wi = long_short.weights[i];
        w[i] = wi > 0.0 ? wi / x0_long : wi / x0_short;
    }
    return Portfolio{std::move(w)};
}

}  // namespace lnt
