#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "lnt/matrix.hpp"
#include "lnt/simplex_qp.hpp"

namespace lnt {

struct McConfig {
    std::int64_t sample_count = 1'000'000;
    std::uint64_t seed = 0;
    std::int64_t chunk_size = 1 << 14;
    int threads = 0;  ///< 0 = hardware concurrency; never affects the result

    void validate() const;
};

/// Monte Carlo output. Estimates far below double range are carried in log
/// space (estimate/std_error underflow to zero, the log fields stay finite).
struct McEstimate {
    double estimate = 0.0;
    double log_estimate = 0.0;
    double std_error = 0.0;
    double log_std_error = 0.0;
    std::int64_t n_used = 0;
    std::int64_t n_hits = 0;
    Eigen::VectorXd drift;
    double log_weight_min = 0.0;  ///< over accepted samples
    double log_weight_max = 0.0;

    double relative_error() const;
};

/// Chunked N(mu, B) sampler: chunk c is filled from its own substream, so the
/// stream is reproducible for fixed (seed, chunk_size) under any threading.
class GaussianSampler {
public:
    GaussianSampler(const ModelSpec& model, std::uint64_t seed, std::int64_t chunk_size);

    int dim() const { return static_cast<int>(mu_.size()); }
    std::int64_t chunk_size() const { return chunk_size_; }
    /// Fills rows 0..count-1 of out (count x dim) with chunk chunk_index.
    void fill_chunk(std::int64_t chunk_index, std::int64_t count, Eigen::MatrixXd& out) const;

private:
    Eigen::VectorXd mu_;
    Eigen::MatrixXd chol_;
    std::uint64_t seed_;
    std::int64_t chunk_size_;
};

/// Indicator-mean estimate of P[X <= x], X the all-positive sum.
McEstimate estimate_left_standard(const ModelSpec& model, double x, const McConfig& config);

/// Importance-sampled estimate of P[X <= x] with mean shift drift:
/// mean of exp{-drift' B^-1 (Y - mu) - drift' B^-1 drift / 2}
/// 1{sum exp(Y_i + drift_i) <= x}. A zero drift reproduces the standard
/// estimator bit for bit.
McEstimate estimate_left_is(const ModelSpec& model, double x, const McConfig& config,
                            const Eigen::VectorXd& drift);

/// Indicator-mean estimate of P[X^(m) >= x].
McEstimate estimate_right_standard(const ModelSpec& model, double x, const McConfig& config);

McEstimate estimate_right_is(const ModelSpec& model, double x, const McConfig& config,
                             const Eigen::VectorXd& drift);

/// IS estimate of the conditional expectation E[exp(Y_component) | X <= x]
/// (ratio of two weighted sums over the same stream).
McEstimate estimate_left_conditional_component(const ModelSpec& model, double x,
                                               const McConfig& config,
                                               const Eigen::VectorXd& drift, int component);

/// Variance-minimizing mean shift, affine in the log-level:
/// drift(x) = slope * log x + offset. On the support the slope is one and
/// the shift moves each driving component onto the level.
struct DriftSpec {
    Eigen::VectorXd slope;
    Eigen::VectorXd offset;

    Eigen::VectorXd at_log_level(double log_x) const { return slope * log_x + offset; }
    Eigen::VectorXd at_level(double x) const;
};

/// Left-tail drift (requires the sum-simplex nondegeneracy assumption).
DriftSpec optimal_drift_left(const ModelSpec& model);

/// Right-tail drift built from the dominant split (singleton dominance required).
DriftSpec optimal_drift_right(const ModelSpec& model);

struct ReductionRow {
    double level = 0.0;
    double log_level = 0.0;
    McEstimate is;
    McEstimate standard;
    double factor = 0.0;               ///< std_error(standard) / std_error(IS)
    double factor_jackknife_se = 0.0;  ///< delete-one-block jackknife over 20 blocks
};

/// Per-level standard and importance-sampled estimates over a common sample
/// stream, with standard-deviation reduction factors. Side selected by the
/// model: all-positive sums use the left tail, mixed signs the right tail.
/// use_is = false forces a zero drift (factors become exactly one).
std::vector<ReductionRow> reduction_table(const ModelSpec& model,
                                          std::span<const double> levels,
                                          const McConfig& config, bool use_is = true);

}  // namespace lnt
