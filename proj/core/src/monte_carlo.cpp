#include "lnt/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "lnt/conditional_laws.hpp"
#include "lnt/rng.hpp"

namespace lnt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Running log-sum-exp; merges happen in fixed chunk order so results do not
// depend on thread scheduling.
struct LogSum {
    double max = -kInf;
    double sum = 0.0;  // of exp(l - max)

    void add(double l) {
        if (sum == 0.0) {
            max = l;
            sum = 1.0;
        } else if (l <= max) {
            sum += std::exp(l - max);
        } else {
            sum = sum * std::exp(max - l) + 1.0;
            max = l;
        }
    }
    void merge(const LogSum& o) {
        if (o.sum == 0.0) return;
        if (sum == 0.0) {
            *this = o;
        } else if (o.max <= max) {
            sum += o.sum * std::exp(o.max - max);
        } else {
            sum = sum * std::exp(max - o.max) + o.sum;
            max = o.max;
        }
    }
    double log() const { return sum == 0.0 ? -kInf : max + std::log(sum); }
};

double log_expm1_safe(double l) {
    // log(e^l - 1) for l > 0
    return l > 37.0 ? l : std::log(std::expm1(l));
}

struct IsAccumulator {
    std::int64_t samples = 0;
    std::int64_t hits = 0;
    LogSum m1, m2;         // log-weights and doubled log-weights on the event
    LogSum numer, numer2, cross;  // payload moments (conditional estimator only)
    double lw_min = kInf, lw_max = -kInf;

    void merge(const IsAccumulator& o) {
        samples += o.samples;
        hits += o.hits;
        m1.merge(o.m1);
        m2.merge(o.m2);
        numer.merge(o.numer);
        numer2.merge(o.numer2);
        cross.merge(o.cross);
        lw_min = std::min(lw_min, o.lw_min);
        lw_max = std::max(lw_max, o.lw_max);
    }
};

template <class PerSample>
std::vector<IsAccumulator> run_chunks(const GaussianSampler& sampler, std::int64_t n,
                                      int threads, PerSample per_sample) {
    const std::int64_t chunk = sampler.chunk_size();
    const std::int64_t nchunks = (n + chunk - 1) / chunk;
    std::vector<IsAccumulator> acc(static_cast<std::size_t>(nchunks));

    int nthreads = threads > 0 ? threads
                               : static_cast<int>(std::thread::hardware_concurrency());
    nthreads = std::clamp<std::int64_t>(nthreads, 1, nchunks);

    std::atomic<std::int64_t> next{0};
    auto worker = [&]() {
        Eigen::MatrixXd samples(sampler.dim(), chunk);
        std::int64_t c;
        while ((c = next.fetch_add(1)) < nchunks) {
            const std::int64_t count = std::min(chunk, n - c * chunk);
            sampler.fill_chunk(c, count, samples);
            IsAccumulator& a = acc[static_cast<std::size_t>(c)];
            a.samples = count;
            for (std::int64_t k = 0; k < count; ++k) per_sample(samples.col(k), a);
        }
    };
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return acc;
}

IsAccumulator merge_all(const std::vector<IsAccumulator>& acc) {
    IsAccumulator total;
    for (const IsAccumulator& a : acc) total.merge(a);
    return total;
}

McEstimate finalize_standard(const IsAccumulator& total, std::int64_t n, int dim) {
    McEstimate e;
    e.n_used = n;
    e.n_hits = total.hits;
    e.drift = Eigen::VectorXd::Zero(dim);
    const double p = static_cast<double>(total.hits) / static_cast<double>(n);
    e.estimate = p;
    e.log_estimate = total.hits > 0 ? std::log(p) : -kInf;
    e.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    e.log_std_error = e.std_error > 0.0 ? std::log(e.std_error) : -kInf;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    e.log_weight_min = total.hits > 0 ? 0.0 : nan;
    e.log_weight_max = total.hits > 0 ? 0.0 : nan;
    return e;
}

McEstimate finalize_is(const IsAccumulator& total, std::int64_t n, Eigen::VectorXd drift) {
    McEstimate e;
    e.n_used = n;
    e.n_hits = total.hits;
    e.drift = std::move(drift);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (total.hits == 0) {
        e.estimate = 0.0;
        e.log_estimate = -kInf;
        e.std_error = 0.0;
        e.log_std_error = -kInf;
        e.log_weight_min = nan;
        e.log_weight_max = nan;
        return e;
    }
    const double log_n = std::log(static_cast<double>(n));
    const double log_m1 = total.m1.log();
    const double log_m2 = total.m2.log();
    e.log_estimate = log_m1 - log_n;
    e.estimate = std::exp(e.log_estimate);
    // var_hat = mean^2 (R - 1) with R = n M2 / M1^2 >= 1
    const double log_r = log_n + log_m2 - 2.0 * log_m1;
    if (log_r > 0.0) {
        e.log_std_error = e.log_estimate + 0.5 * (log_expm1_safe(log_r) - log_n);
        e.std_error = std::exp(e.log_std_error);
    } else {
        e.std_error = 0.0;
        e.log_std_error = -kInf;
    }
    e.log_weight_min = total.lw_min;
    e.log_weight_max = total.lw_max;
    return e;
}

Eigen::VectorXd solve_spd(const CovMatrix& cov, const Eigen::VectorXd& rhs) {
    const Eigen::MatrixXd& L = cov.cholesky_lower();
    Eigen::VectorXd y = L.triangularView<Eigen::Lower>().solve(rhs);
    return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

// One importance-sampling pass. right_side selects the event
// {sum_m - sum_rest >= x} instead of {sum <= x}; payload_component >= 0
// additionally accumulates moments of exp(Y_c + drift_c) on the event.
std::vector<IsAccumulator> is_pass(const ModelSpec& model, double x, const McConfig& cfg,
                                   const Eigen::VectorXd& drift, bool right_side,
                                   int payload_component) {
    const int n = model.dim();
    const int m = model.positive_count;
    if (drift.size() != n) throw ValidationError("drift length does not match model dimension");
    const Eigen::VectorXd eta = solve_spd(model.cov, drift);
    const double kappa = 0.5 * drift.dot(eta);
    GaussianSampler sampler(model, cfg.seed, cfg.chunk_size);

    return run_chunks(sampler, cfg.sample_count, cfg.threads,
                      [&, eta, kappa](const auto& y, IsAccumulator& a) {
                          double s = 0.0;
                          for (int i = 0; i < n; ++i) {
                              const double term = std::exp(y[i] + drift[i]);
                              s += (i < m) ? term : -term;
                          }
                          const bool hit = right_side ? (s >= x) : (s <= x);
                          if (!hit) return;
                          const double lw = -eta.dot(y - model.mu) - kappa;
                          ++a.hits;
                          a.m1.add(lw);
                          a.m2.add(2.0 * lw);
                          a.lw_min = std::min(a.lw_min, lw);
                          a.lw_max = std::max(a.lw_max, lw);
                          if (payload_component >= 0) {
                              const double ly = y[payload_component] + drift[payload_component];
                              a.numer.add(lw + ly);
                              a.numer2.add(2.0 * (lw + ly));
                              a.cross.add(2.0 * lw + ly);
                          }
                      });
}

std::vector<IsAccumulator> standard_pass(const ModelSpec& model, double x,
                                         const McConfig& cfg, bool right_side) {
    const int n = model.dim();
    const int m = model.positive_count;
    GaussianSampler sampler(model, cfg.seed, cfg.chunk_size);
    return run_chunks(sampler, cfg.sample_count, cfg.threads,
                      [&](const auto& y, IsAccumulator& a) {
                          double s = 0.0;
                          for (int i = 0; i < n; ++i) {
                              const double term = std::exp(y[i]);
                              s += (i < m) ? term : -term;
                          }
                          if (right_side ? (s >= x) : (s <= x)) ++a.hits;
                      });
}

McEstimate estimate_is_impl(const ModelSpec& model, double x, const McConfig& cfg,
                            const Eigen::VectorXd& drift, bool right_side) {
    cfg.validate();
    if (!(x > 0.0) && !right_side) throw DomainError("level must be positive");
    if (drift.isZero(0.0)) {
        auto acc = standard_pass(model, x, cfg, right_side);
        return finalize_standard(merge_all(acc), cfg.sample_count, model.dim());
    }
    auto acc = is_pass(model, x, cfg, drift, right_side, -1);
    return finalize_is(merge_all(acc), cfg.sample_count, drift);
}

}  // namespace

void McConfig::validate() const {
    if (sample_count < 1) throw ValidationError("sample_count must be >= 1");
    if (chunk_size < 1) throw ValidationError("chunk_size must be >= 1");
    if (threads < 0) throw ValidationError("threads must be >= 0");
}

double McEstimate::relative_error() const {
    if (n_hits == 0 || log_estimate == -kInf) return kInf;
    return std::exp(log_std_error - log_estimate);
}

GaussianSampler::GaussianSampler(const ModelSpec& model, std::uint64_t seed,
                                 std::int64_t chunk_size)
    : mu_(model.mu), chol_(model.cov.cholesky_lower()), seed_(seed),
      chunk_size_(chunk_size) {
    if (chunk_size_ < 1) throw ValidationError("chunk_size must be >= 1");
}

void GaussianSampler::fill_chunk(std::int64_t chunk_index, std::int64_t count,
                                 Eigen::MatrixXd& out) const {
    const int n = dim();
    if (out.rows() != n || out.cols() < count) out.resize(n, std::max(count, std::int64_t{1}));
    Xoshiro256pp rng = Xoshiro256pp::substream(seed_, static_cast<std::uint64_t>(chunk_index));
    Eigen::VectorXd z(n);
    for (std::int64_t k = 0; k < count; ++k) {
        rng.fill_normals(std::span<double>(z.data(), static_cast<std::size_t>(n)));
        out.col(k) = mu_ + chol_.triangularView<Eigen::Lower>() * z;
    }
}

McEstimate estimate_left_standard(const ModelSpec& model, double x, const McConfig& cfg) {
    cfg.validate();
    if (!(x > 0.0)) throw DomainError("level must be positive");
    if (!model.all_positive()) throw DomainError("left-tail estimate requires m = n");
    auto acc = standard_pass(model, x, cfg, false);
    return finalize_standard(merge_all(acc), cfg.sample_count, model.dim());
}

McEstimate estimate_left_is(const ModelSpec& model, double x, const McConfig& cfg,
                            const Eigen::VectorXd& drift) {
    if (!model.all_positive()) throw DomainError("left-tail estimate requires m = n");
    return estimate_is_impl(model, x, cfg, drift, false);
}

McEstimate estimate_right_standard(const ModelSpec& model, double x, const McConfig& cfg) {
    cfg.validate();
    auto acc = standard_pass(model, x, cfg, true);
    return finalize_standard(merge_all(acc), cfg.sample_count, model.dim());
}

McEstimate estimate_right_is(const ModelSpec& model, double x, const McConfig& cfg,
                             const Eigen::VectorXd& drift) {
    return estimate_is_impl(model, x, cfg, drift, true);
}

McEstimate estimate_left_conditional_component(const ModelSpec& model, double x,
                                               const McConfig& cfg,
                                               const Eigen::VectorXd& drift,
                                               int component) {
    cfg.validate();
    if (component < 0 || component >= model.dim()) {
        throw IndexOutOfRange("component index out of range");
    }
    if (!model.all_positive()) throw DomainError("left-tail estimate requires m = n");
    auto acc = is_pass(model, x, cfg, drift, false, component);
    IsAccumulator total = merge_all(acc);

    McEstimate e;
    e.n_used = cfg.sample_count;
    e.n_hits = total.hits;
    e.drift = drift;
    if (total.hits == 0) {
        e.estimate = 0.0;
        e.log_estimate = -kInf;
        e.std_error = 0.0;
        e.log_std_error = -kInf;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        e.log_weight_min = nan;
        e.log_weight_max = nan;
        return e;
    }
    const double log_num = total.numer.log();
    const double log_den = total.m1.log();
    e.log_estimate = log_num - log_den;
    e.estimate = std::exp(e.log_estimate);
    // linearized variance of the ratio of two correlated weighted sums
    const double rel2 = std::exp(total.numer2.log() - 2.0 * log_num) +
                        std::exp(total.m2.log() - 2.0 * log_den) -
                        2.0 * std::exp(total.cross.log() - log_num - log_den);
    const double rel = std::sqrt(std::max(rel2, 0.0));
    e.std_error = e.estimate * rel;
    e.log_std_error = rel > 0.0 ? e.log_estimate + std::log(rel) : -kInf;
    e.log_weight_min = total.lw_min;
    e.log_weight_max = total.lw_max;
    return e;
}

Eigen::VectorXd DriftSpec::at_level(double x) const {
    if (!(x > 0.0)) throw DomainError("level must be positive");
    return at_log_level(std::log(x));
}

DriftSpec optimal_drift_left(const ModelSpec& model) {
    ConditionalLawLeft law(model);  // enforces the nondegeneracy assumption
    DriftSpec d;
    d.slope = law.exponents();
    d.offset = law.mu_prime() - model.mu;
    return d;
}

DriftSpec optimal_drift_right(const ModelSpec& model) {
    ConditionalLawRight law(model);  // singleton dominance + per-split assumption
    DriftSpec d;
    d.slope = law.exponents();
    d.offset = law.mu_prime() - model.mu;
    return d;
}

std::vector<ReductionRow> reduction_table(const ModelSpec& model,
                                          std::span<const double> levels,
                                          const McConfig& cfg, bool use_is) {
    cfg.validate();
    if (levels.empty()) throw ValidationError("need at least one level");
    const bool right_side = !model.all_positive();
    DriftSpec drift_spec;
    if (use_is) {
        drift_spec = right_side ? optimal_drift_right(model) : optimal_drift_left(model);
    }

    std::vector<ReductionRow> rows;
    rows.reserve(levels.size());
    for (double x : levels) {
        if (!(x > 0.0) && !right_side) throw DomainError("levels must be positive");
        ReductionRow row;
        row.level = x;
        row.log_level = std::log(x);

        const Eigen::VectorXd drift =
            use_is ? drift_spec.at_level(x) : Eigen::VectorXd::Zero(model.dim());
        if (drift.isZero(0.0)) {
            auto acc = standard_pass(model, x, cfg, right_side);
            row.standard = finalize_standard(merge_all(acc), cfg.sample_count, model.dim());
            row.is = row.standard;
            row.factor = 1.0;
            row.factor_jackknife_se = 0.0;
            rows.push_back(std::move(row));
            continue;
        }

        // Common random numbers: one pass feeds both estimators.
        const Eigen::VectorXd eta = solve_spd(model.cov, drift);
        const double kappa = 0.5 * drift.dot(eta);
        const int n = model.dim();
        const int m = model.positive_count;
        struct Pair {
            IsAccumulator std_acc, is_acc;
        };
        GaussianSampler sampler(model, cfg.seed, cfg.chunk_size);
        const std::int64_t chunk = cfg.chunk_size;
        const std::int64_t nchunks = (cfg.sample_count + chunk - 1) / chunk;
        std::vector<Pair> acc(static_cast<std::size_t>(nchunks));
        {
            int nthreads = cfg.threads > 0
                               ? cfg.threads
                               : static_cast<int>(std::thread::hardware_concurrency());
            nthreads = std::clamp<std::int64_t>(nthreads, 1, nchunks);
            std::atomic<std::int64_t> next{0};
            auto worker = [&]() {
                Eigen::MatrixXd samples(n, chunk);
                std::int64_t c;
                while ((c = next.fetch_add(1)) < nchunks) {
                    const std::int64_t count = std::min(chunk, cfg.sample_count - c * chunk);
                    sampler.fill_chunk(c, count, samples);
                    Pair& a = acc[static_cast<std::size_t>(c)];
                    a.std_acc.samples = count;
                    a.is_acc.samples = count;
                    for (std::int64_t k = 0; k < count; ++k) {
                        const auto y = samples.col(k);
                        double s_plain = 0.0, s_shift = 0.0;
                        for (int i = 0; i < n; ++i) {
                            const double sign = (i < m) ? 1.0 : -1.0;
                            s_plain += sign * std::exp(y[i]);
                            s_shift += sign * std::exp(y[i] + drift[i]);
                        }
                        if (right_side ? (s_plain >= x) : (s_plain <= x)) ++a.std_acc.hits;
                        if (right_side ? (s_shift >= x) : (s_shift <= x)) {
                            const double lw = -eta.dot(y - model.mu) - kappa;
                            ++a.is_acc.hits;
                            a.is_acc.m1.add(lw);
                            a.is_acc.m2.add(2.0 * lw);
                            a.is_acc.lw_min = std::min(a.is_acc.lw_min, lw);
                            a.is_acc.lw_max = std::max(a.is_acc.lw_max, lw);
                        }
                    }
                }
            };
            if (nthreads == 1) {
                worker();
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
                for (auto& t : pool) t.join();
            }
        }

        IsAccumulator std_total, is_total;
        for (const Pair& a : acc) {
            std_total.merge(a.std_acc);
            is_total.merge(a.is_acc);
        }
        row.standard = finalize_standard(std_total, cfg.sample_count, n);
        row.is = finalize_is(is_total, cfg.sample_count, drift);
        row.factor = (row.is.std_error > 0.0)
                         ? row.standard.std_error / row.is.std_error
                         : (row.standard.std_error > 0.0 ? kInf : 1.0);

        // Delete-one-block jackknife on the factor; blocks are chunk classes
        // modulo J so growing the sample count refines every block.
        const int J = static_cast<int>(std::min<std::int64_t>(20, nchunks));
        std::vector<Pair> blocks(static_cast<std::size_t>(J));
        for (std::int64_t c = 0; c < nchunks; ++c) {
            blocks[static_cast<std::size_t>(c % J)].std_acc.merge(acc[c].std_acc);
            blocks[static_cast<std::size_t>(c % J)].is_acc.merge(acc[c].is_acc);
        }
        std::vector<double> fs;
        fs.reserve(J);
        for (int b = 0; b < J; ++b) {
            IsAccumulator s_acc, i_acc;
            for (int o = 0; o < J; ++o) {
                if (o == b) continue;
                s_acc.merge(blocks[o].std_acc);
                i_acc.merge(blocks[o].is_acc);
            }
            if (s_acc.samples == 0) continue;
            McEstimate se_s = finalize_standard(s_acc, s_acc.samples, n);
            McEstimate se_i = finalize_is(i_acc, i_acc.samples, drift);
            if (se_i.std_error > 0.0) fs.push_back(se_s.std_error / se_i.std_error);
        }
        if (fs.size() >= 2) {
            double mean = 0.0;
            for (double f : fs) mean += f;
            mean /= static_cast<double>(fs.size());
            double ss = 0.0;
            for (double f : fs) ss += (f - mean) * (f - mean);
            const double jn = static_cast<double>(fs.size());
            row.factor_jackknife_se = std::sqrt((jn - 1.0) / jn * ss);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace lnt
