#include "lnt/tail_asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lnt {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_assumption(const QpSolution& sol, const std::string& what) {
    if (sol.assumption_ok) return;
    if (sol.assumption_borderline) {
        throw AssumptionBorderline("nondegeneracy check borderline for " + what,
                                   sol.assumption_margins);
    }
    throw AssumptionViolated("nondegeneracy check failed for " + what,
                             sol.assumption_margins);
}

struct Quadruple {
    double log_delta1, delta2, delta3, delta4;
};

// Shared core of the sharp tail formulas. q_i = log(S / |Abar_i|) + mubar_i
// with S = sum Abar; the prefactor is
//   C = (2 pi |Bbar|)^{-1/2} sqrt(S / prod |Abar_i|) exp{-q' Bbar^{-1} q / 2}
// and delta1 = C / S. The left tail has all Abar_i > 0 so the absolute
// values are vacuous there.
Quadruple quadruple_from_solution(const ModelSpec& model, const QpSolution& sol) {
    const Eigen::VectorXd& A = sol.reduced_rowsums;
    const int nb = sol.nbar;
    const double S = A.sum();

    Eigen::VectorXd mubar(nb), q(nb);
    double sum_log_absA = 0.0;
    for (int i = 0; i < nb; ++i) {
        mubar[i] = model.mu[sol.active_set[i]];
        q[i] = std::log(S / std::abs(A[i])) + mubar[i];
        sum_log_absA += std::log(std::abs(A[i]));
    }

    CovMatrix reduced = principal_submatrix(model.cov, sol.active_set);
    const double quad_form = q.dot(sol.reduced_inverse * q);
    const double log_C = -0.5 * quad_form - 0.5 * kLog2Pi - 0.5 * reduced.log_det() +
                         0.5 * std::log(S) - 0.5 * sum_log_absA;

    Quadruple d;
    d.log_delta1 = log_C - std::log(S);
    d.delta2 = -(1.0 + nb) / 2.0;
    d.delta3 = (A.array() * q.array()).sum();
    d.delta4 = 1.0 / S;
    return d;
}

}  // namespace

TailAsymptote::TailAsymptote(TailSide side, TailKind kind, double log_delta1,
                             double delta2, double delta3, double delta4,
                             double error_order, QpSolution reduced)
    : side_(side),
      kind_(kind),
      log_delta1_(log_delta1),
      delta2_(delta2),
      delta3_(delta3),
      delta4_(delta4),
      error_order_(error_order),
      reduced_(std::move(reduced)) {
    if (!(delta4_ > 0.0)) throw DomainError("delta4 must be positive");
}

double TailAsymptote::delta1() const { return std::exp(log_delta1_); }

double TailAsymptote::log_constant_C() const {
    return kind_ == TailKind::Probability ? log_delta1_ - std::log(delta4_) : log_delta1_;
}

double TailAsymptote::constant_C() const { return std::exp(log_constant_C()); }

TailValue TailAsymptote::evaluate(double x) const {
    if (!(x > 0.0)) throw DomainError("tail evaluation requires x > 0");
    return evaluate_log(std::log(x));
}

TailValue TailAsymptote::evaluate_log(double log_x) const {
    const double lx = std::abs(log_x);
    TailValue out;
    out.log_value = log_delta1_ + delta2_ * std::log(lx) + delta3_ * log_x -
                    lx * lx / (2.0 * delta4_);
    out.value = std::exp(out.log_value);
    out.in_regime = (side_ == TailSide::Left) ? (log_x <= -1.0) : (log_x >= 1.0);
    return out;
}

TailAsymptote left_tail_cdf_asymptote(const ModelSpec& model) {
    if (!model.all_positive()) {
        throw DomainError("left tail asymptote requires an all-positive sum (m = n)");
    }
    QpSolution sol = solve(model.cov, FeasibleRegion::sum_simplex(model.dim()));
    require_assumption(sol, "the sum-simplex minimizer");
    Quadruple d = quadruple_from_solution(model, sol);
    return TailAsymptote(TailSide::Left, TailKind::Probability, d.log_delta1, d.delta2,
                         d.delta3, d.delta4, 1.0, std::move(sol));
}

TailAsymptote left_tail_density_asymptote(const ModelSpec& model) {
    TailAsymptote cdf = left_tail_cdf_asymptote(model);
    // density = cdf * S log(1/x) / x exactly, with S = 1/delta4
    return TailAsymptote(TailSide::Left, TailKind::Density,
                         cdf.log_delta1() - std::log(cdf.delta4()), cdf.delta2() + 1.0,
                         cdf.delta3() - 1.0, cdf.delta4(), 1.0, cdf.reduced());
}

TailAsymptote right_tail_single_positive(const ModelSpec& model) {
    if (model.positive_count != 1) {
        throw DomainError("right_tail_single_positive requires m = 1");
    }
    QpSolution sol = solve(model.cov, FeasibleRegion::signed_simplex(model.dim(), 1, 0));
    require_assumption(sol, "the signed-simplex minimizer");
    Quadruple d = quadruple_from_solution(model, sol);
    return TailAsymptote(TailSide::Right, TailKind::Probability, d.log_delta1, d.delta2,
                         d.delta3, d.delta4, 1.0, std::move(sol));
}

DominanceSelection right_tail_mixed(const ModelSpec& model) {
    const int n = model.dim();
    const int m = model.positive_count;

    std::vector<TailAsymptote> splits;
    std::vector<QpSolution> solutions;
    splits.reserve(m);
    solutions.reserve(m);
    for (int p = 0; p < m; ++p) {
        QpSolution sol = solve(model.cov, FeasibleRegion::signed_simplex(n, m, p));
        if (!sol.assumption_ok) {
            const std::string what = "split p = " + std::to_string(p + 1);
            if (sol.assumption_borderline) {
                throw AssumptionBorderline("nondegeneracy check borderline for " + what,
                                           sol.assumption_margins);
            }
            throw AssumptionViolated("nondegeneracy check failed for " + what,
                                     sol.assumption_margins);
        }
        Quadruple d = quadruple_from_solution(model, sol);
        splits.emplace_back(TailSide::Right, TailKind::Probability, d.log_delta1,
                            d.delta2, d.delta3, d.delta4, 1.0, sol);
        solutions.push_back(std::move(sol));
    }

    // Nested argmax over delta4, then delta3, then delta2; values within the
    // relative tolerance are tied and merge.
    auto argmax_within = [](const std::vector<int>& pool, auto value) {
        double best = -std::numeric_limits<double>::infinity();
        for (int p : pool) best = std::max(best, value(p));
        std::vector<int> out;
        const double tol = kDominanceRelTol * std::max(1.0, std::abs(best));
        for (int p : pool)
            if (value(p) >= best - tol) out.push_back(p);
        return out;
    };

    DominanceSelection sel{.p4 = {}, .p3 = {}, .p2 = {}, .splits = std::move(splits),
                           .split_solutions = std::move(solutions),
                           .merged = TailAsymptote(TailSide::Right, TailKind::Probability,
                                                   0, 0, 0, 1, 0.5, QpSolution{})};
    std::vector<int> all(m);
    for (int p = 0; p < m; ++p) all[p] = p;
    sel.p4 = argmax_within(all, [&](int p) { return sel.splits[p].delta4(); });
    sel.p3 = argmax_within(sel.p4, [&](int p) { return sel.splits[p].delta3(); });
    sel.p2 = argmax_within(sel.p3, [&](int p) { return sel.splits[p].delta2(); });

    // delta1 of the merged asymptote sums the dominant splits (log-sum-exp).
    double max_l = -std::numeric_limits<double>::infinity();
    for (int p : sel.p2) max_l = std::max(max_l, sel.splits[p].log_delta1());
    double s = 0.0;
    for (int p : sel.p2) s += std::exp(sel.splits[p].log_delta1() - max_l);
    const double log_delta1 = max_l + std::log(s);

    const TailAsymptote& lead = sel.splits[sel.p2.front()];
    sel.merged = TailAsymptote(TailSide::Right, TailKind::Probability, log_delta1,
                               lead.delta2(), lead.delta3(),
                               sel.splits[sel.p4.front()].delta4(), 0.5,
                               sel.split_solutions[sel.p2.front()]);
    return sel;
}

TailAsymptote right_tail_density_asymptote(const DominanceSelection& sel) {
    const TailAsymptote& t = sel.merged;
    // density = tail * log x / (x delta4) exactly
    return TailAsymptote(TailSide::Right, TailKind::Density,
                         t.log_delta1() - std::log(t.delta4()), t.delta2() + 1.0,
                         t.delta3() - 1.0, t.delta4(), 0.5, t.reduced());
}

double invert_left_tail(const TailAsymptote& asym, double target_log_prob) {
    if (asym.side() != TailSide::Left || asym.kind() != TailKind::Probability) {
        throw DomainError("invert_left_tail needs a left-tail probability asymptote");
    }
    double lo = -1.0, hi = -1.0;  // log-levels; evaluation is increasing in log x here
    while (asym.evaluate_log(lo).log_value > target_log_prob) {
        hi = lo;
        lo *= 2.0;
        if (lo < -1e9) throw DomainError("target probability too small to bracket");
    }
    if (hi == lo) throw DomainError("target log-probability above the regime boundary");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (asym.evaluate_log(mid).log_value < target_log_prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace lnt
