#pragma once

#include <vector>

#include "lnt/matrix.hpp"
#include "lnt/simplex_qp.hpp"

namespace lnt {

enum class TailSide { Left, Right };
enum class TailKind { Probability, Density };

struct TailValue {
    double log_value;  ///< natural log of the leading term
    double value;      ///< exp(log_value); 0 on underflow
    bool in_regime;    ///< |log x| >= 1 on the relevant side
};

/// Leading term of a tail formula in the (delta1, delta2, delta3, delta4)
/// parameterization: value(x) = delta1 (log x*)^delta2 x^delta3
/// exp{-(log x*)^2 / (2 delta4)} with log x* = |log x|. Everything is
/// evaluated in log space so probabilities far below double range stay
/// representable. The error class of the source formula is
/// (1 + O((log x*)^-error_order)); the leading term itself never includes it.
class TailAsymptote {
public:
    TailAsymptote(TailSide side, TailKind kind, double log_delta1, double delta2,
                  double delta3, double delta4, double error_order, QpSolution reduced);

    double delta1() const;
    double log_delta1() const { return log_delta1_; }
    double delta2() const { return delta2_; }
    double delta3() const { return delta3_; }
    double delta4() const { return delta4_; }
    /// Prefactor C of the underlying formula (delta1 / delta4 for
    /// probability-type parameterizations, delta1 itself for densities).
    double constant_C() const;
    double log_constant_C() const;
    TailSide side() const { return side_; }
    TailKind kind() const { return kind_; }
    double error_order() const { return error_order_; }
    const QpSolution& reduced() const { return reduced_; }

    TailValue evaluate(double x) const;
    TailValue evaluate_log(double log_x) const;

private:
    TailSide side_;
    TailKind kind_;
    double log_delta1_, delta2_, delta3_, delta4_;
    double error_order_;
    QpSolution reduced_;
};

/// P[X <= x] as x -> 0 for the all-positive sum (requires m = n and the
/// nondegeneracy assumption on the sum-simplex minimizer).
TailAsymptote left_tail_cdf_asymptote(const ModelSpec& model);

/// Density counterpart; identical Gaussian rate, shifted powers.
TailAsymptote left_tail_density_asymptote(const ModelSpec& model);

/// P[X^(1) >= x] as x -> infinity for one positive term against the basket
/// of negative ones (requires m = 1).
TailAsymptote right_tail_single_positive(const ModelSpec& model);

/// Dominant-split selection for the right tail of X^(m): the per-split
/// quadruples, the nested argmax sets over delta4, delta3, delta2, and the
/// merged asymptote whose delta1 sums the dominant splits.
struct DominanceSelection {
    std::vector<int> p4, p3, p2;          // 0-based split indices
    std::vector<TailAsymptote> splits;    // indexed by p = 0..m-1
    std::vector<QpSolution> split_solutions;
    TailAsymptote merged;
};

DominanceSelection right_tail_mixed(const ModelSpec& model);

/// Density of X^(m) from a dominance selection.
TailAsymptote right_tail_density_asymptote(const DominanceSelection& sel);

/// Relative tolerance for dominance ties; quadruples within it merge.
inline constexpr double kDominanceRelTol = 1e-9;

/// Convenience inverse of the left-tail evaluation: the log-level whose
/// asymptotic log-probability equals target_log_prob. Approximate by
/// construction (leading term only).
double invert_left_tail(const TailAsymptote& asym, double target_log_prob);

}  // namespace lnt
