// lntail: tail asymptotics, variance-reduced Monte Carlo, and stress reports
// for sums and differences of correlated log-normals.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lnt/conditional_laws.hpp"
#include "lnt/model_io.hpp"
#include "lnt/monte_carlo.hpp"
#include "lnt/risk_engine.hpp"
#include "lnt/simplex_qp.hpp"
#include "lnt/tail_asymptotics.hpp"

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Fixed column order, 17 significant digits, LF line endings.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) {
        if (path.empty() || path == "-") {
            out_ = &std::cout;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) throw lnt::Error("cannot open output file '" + path + "'");
            out_ = &file_;
        }
        for (std::size_t i = 0; i < header.size(); ++i) {
            *out_ << (i ? "," : "") << header[i];
        }
        *out_ << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            *out_ << (i ? "," : "") << cells[i];
        }
        *out_ << "\n";
    }

private:
    std::ofstream file_;
    std::ostream* out_ = nullptr;
};

struct CommonOpts {
    std::string model_path;
    std::string out_path;
    std::vector<double> levels;
    std::vector<double> sweep;  // start, stop, count
    std::uint64_t seed = 20240814;
    std::int64_t samples = 1'000'000;
    bool no_is = false;
};

void add_model_flag(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--model", o.model_path, "model file (JSON)")->required();
}

std::vector<double> resolve_levels(const CommonOpts& o) {
    if (!o.sweep.empty()) {
        if (o.sweep.size() != 3) throw lnt::Error("--sweep needs start,stop,count");
        const double start = o.sweep[0], stop = o.sweep[1];
        const int count = static_cast<int>(o.sweep[2]);
        if (count < 1 || start <= 0.0 || stop <= 0.0) {
            throw lnt::Error("--sweep needs positive endpoints and count >= 1");
        }
        std::vector<double> levels(count);
        for (int i = 0; i < count; ++i) {
            const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
            levels[i] = std::exp(std::log(start) + t * (std::log(stop) - std::log(start)));
        }
        return levels;
    }
    if (o.levels.empty()) throw lnt::Error("give --levels or --sweep");
    for (double x : o.levels)
        if (!(x > 0.0)) throw lnt::Error("levels must be positive");
    return o.levels;
}

lnt::PlainModelInput require_plain(lnt::ParsedInput& input) {
    if (auto* p = std::get_if<lnt::PlainModelInput>(&input)) return std::move(*p);
    throw lnt::Error("this subcommand needs a plain model file, not a market file");
}

std::string user_indices(const std::vector<int>& model_indices, const std::vector<int>& order) {
    std::vector<int> user;
    for (int k : model_indices) user.push_back(order[k] + 1);
    std::sort(user.begin(), user.end());
    std::string s = "{";
    for (std::size_t i = 0; i < user.size(); ++i) s += (i ? ", " : "") + std::to_string(user[i]);
    return s + "}";
}

void print_qp_solution(const lnt::QpSolution& sol, const std::vector<int>& order,
                       const std::string& label) {
    const int n = static_cast<int>(sol.wbar.size());
    std::vector<double> w_user(n, 0.0);
    for (int k = 0; k < n; ++k) w_user[order[k]] = sol.wbar[k];
    std::cout << label << "\n  weights:";
    for (double w : w_user) std::cout << " " << fmt_short(w);
    std::cout << "\n  support: " << user_indices(sol.active_set, order)
              << "\n  min value w'Bw: " << fmt_short(sol.min_value)
              << "\n  nondegenerate: " << (sol.assumption_ok ? "yes" : "NO")
              << (sol.assumption_borderline ? " (borderline)" : "") << "\n";
    if (!sol.assumption_margins.empty()) {
        std::cout << "  margins:";
        for (const auto& [i, m] : sol.assumption_margins) {
            std::cout << " (" << order[i] + 1 << ": " << fmt_short(m) << ")";
        }
        std::cout << "\n";
    }
}

int run_qp(const CommonOpts& o) {
    lnt::ParsedInput input = lnt::parse_model_file(o.model_path);
    lnt::PlainModelInput plain = require_plain(input);
    const lnt::ModelSpec& model = plain.model;

    std::optional<CsvWriter> csv;
    if (!o.out_path.empty()) {
        csv.emplace(o.out_path, std::vector<std::string>{"region", "component", "weight", "active", "min_value"});
    }
    auto emit = [&](const lnt::QpSolution& sol, const std::string& region) {
        if (!csv) return;
        for (int k = 0; k < model.dim(); ++k) {
            const bool active = sol.wbar[k] != 0.0;
            csv->row({region, std::to_string(plain.order[k] + 1), fmt(sol.wbar[k]),
                      active ? "1" : "0", fmt(sol.min_value)});
        }
    };

    if (model.all_positive()) {
        lnt::QpSolution sol = lnt::solve(model.cov, lnt::FeasibleRegion::sum_simplex(model.dim()));
        print_qp_solution(sol, plain.order, "minimum-variance weights over the simplex");
        emit(sol, "sum");
    } else {
        for (int p = 0; p < model.positive_count; ++p) {
            lnt::QpSolution sol = lnt::solve(
                model.cov, lnt::FeasibleRegion::signed_simplex(model.dim(),
                                                               model.positive_count, p));
            print_qp_solution(sol, plain.order,
                              "split p = " + std::to_string(plain.order[p] + 1));
            emit(sol, "split_p" + std::to_string(plain.order[p] + 1));
        }
        lnt::DominanceSelection sel = lnt::right_tail_mixed(model);
        std::cout << "dominant splits: " << user_indices(sel.p4, plain.order)
                  << " (rate " << fmt_short(sel.merged.delta4()) << ")\n";
    }
    return 0;
}

void print_asymptote(const lnt::TailAsymptote& t, const std::vector<int>& order) {
    std::cout << "  delta1 (prefactor):   " << fmt_short(t.delta1())
              << "   [log: " << fmt_short(t.log_delta1()) << "]\n"
              << "  delta2 (log power):   " << fmt_short(t.delta2()) << "\n"
              << "  delta3 (power):       " << fmt_short(t.delta3()) << "\n"
              << "  delta4 (rate):        " << fmt_short(t.delta4()) << "\n"
              << "  driving components:   " << user_indices(t.reduced().active_set, order)
              << "\n  error class exponent: " << fmt_short(t.error_order()) << "\n";
}

int run_tail(const CommonOpts& o, bool right) {
    lnt::ParsedInput input = lnt::parse_model_file(o.model_path);
    lnt::PlainModelInput plain = require_plain(input);
    const std::vector<double> levels = resolve_levels(o);

    std::optional<lnt::TailAsymptote> prob, dens;
    if (right) {
        lnt::DominanceSelection sel = lnt::right_tail_mixed(plain.model);
        prob = sel.merged;
        dens = lnt::right_tail_density_asymptote(sel);
        std::cout << "right-tail asymptote of P[X >= x]\n";
    } else {
        prob = lnt::left_tail_cdf_asymptote(plain.model);
        dens = lnt::left_tail_density_asymptote(plain.model);
        std::cout << "left-tail asymptote of P[X <= x]\n";
    }
    print_asymptote(*prob, plain.order);

    CsvWriter csv(o.out_path, {"x", "log_x", "log_prob", "prob", "log_density", "density",
                               "in_regime"});
    for (double x : levels) {
        const lnt::TailValue pv = prob->evaluate(x);
        const lnt::TailValue dv = dens->evaluate(x);
        csv.row({fmt(x), fmt(std::log(x)), fmt(pv.log_value), fmt(pv.value),
                 fmt(dv.log_value), fmt(dv.value), pv.in_regime ? "1" : "0"});
    }
    return 0;
}

int run_conditional(const CommonOpts& o, const std::vector<double>& u_in, bool gaussian) {
    lnt::ParsedInput input = lnt::parse_model_file(o.model_path);
    lnt::PlainModelInput plain = require_plain(input);
    const lnt::ModelSpec& model = plain.model;
    const int n = model.dim();

    if (gaussian) {
        if (!model.all_positive()) throw lnt::Error("--gaussian needs an all-positive model");
        lnt::LimitingGaussian g = lnt::limiting_gaussian_left(model);
        std::cout << "limiting conditional law (left tail): asset, lambda_bar, mu_prime,"
                     " residual variance\n";
        for (int k = 0; k < n; ++k) {
            std::cout << "  " << plain.order[k] + 1 << "  " << fmt_short(g.lambda_bar[k])
                      << "  " << fmt_short(g.mu_prime[k]) << "  "
                      << fmt_short(g.cov_prime(k, k)) << "\n";
        }
        return 0;
    }

    if (o.levels.size() != 1) throw lnt::Error("give exactly one --levels value");
    const double x = o.levels.front();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    if (!u_in.empty()) {
        if (static_cast<int>(u_in.size()) != n) throw lnt::Error("--u needs one entry per component");
        for (int i = 0; i < n; ++i) u[i] = u_in[i];  // user order
        Eigen::VectorXd u_model(n);
        for (int k = 0; k < n; ++k) u_model[k] = u[plain.order[k]];
        u = u_model;
    }
    const double lv = model.all_positive() ? lnt::conditional_laplace_left(model, u, x)
                                           : lnt::conditional_laplace_right(model, u, x);
    std::cout << "log E[exp(u'Y) | tail event at x = " << fmt_short(x) << "] ~ "
              << fmt(lv) << "\n";
    return 0;
}

int run_mc(const CommonOpts& o) {
    lnt::ParsedInput input = lnt::parse_model_file(o.model_path);
    lnt::PlainModelInput plain = require_plain(input);
    const std::vector<double> levels = resolve_levels(o);

    lnt::McConfig cfg;
    cfg.sample_count = o.samples;
    cfg.seed = o.seed;
    const auto rows = lnt::reduction_table(plain.model, levels, cfg, !o.no_is);

    std::cout << "x  estimate  std_error  log_estimate  factor  factor_se  (seed "
              << o.seed << ", N " << o.samples << ")\n";
    CsvWriter csv(o.out_path.empty() ? "-" : o.out_path,
                  {"x", "log_x", "is_estimate", "is_log_estimate", "is_std_error",
                   "std_estimate", "std_std_error", "reduction_factor",
                   "factor_jackknife_se"});
    for (const auto& r : rows) {
        if (!o.out_path.empty()) {
            std::cout << "  " << fmt_short(r.level) << "  " << fmt_short(r.is.estimate)
                      << "  " << fmt_short(r.is.std_error) << "  "
                      << fmt_short(r.is.log_estimate) << "  " << fmt_short(r.factor)
                      << "  " << fmt_short(r.factor_jackknife_se) << "\n";
        }
        csv.row({fmt(r.level), fmt(r.log_level), fmt(r.is.estimate), fmt(r.is.log_estimate),
                 fmt(r.is.std_error), fmt(r.standard.estimate), fmt(r.standard.std_error),
                 fmt(r.factor), fmt(r.factor_jackknife_se)});
    }
    return 0;
}

int run_sweep(const CommonOpts& o) {
    lnt::ParsedInput input = lnt::parse_model_file(o.model_path);
    lnt::PlainModelInput plain = require_plain(input);
    const lnt::ModelSpec& model = plain.model;
    const std::vector<double> levels = resolve_levels(o);
    const bool right = !model.all_positive();

    std::optional<lnt::TailAsymptote> asym;
    std::optional<lnt::DriftSpec> drift;
    if (right) {
        asym = lnt::right_tail_mixed(model).merged;
        if (!o.no_is && o.samples > 0) drift = lnt::optimal_drift_right(model);
    } else {
        asym = lnt::left_tail_cdf_asymptote(model);
        if (!o.no_is && o.samples > 0) drift = lnt::optimal_drift_left(model);
    }

    lnt::McConfig cfg;
    cfg.sample_count = std::max<std::int64_t>(o.samples, 1);
    cfg.seed = o.seed;

    CsvWriter csv(o.out_path.empty() ? "-" : o.out_path,
                  {"log_x", "x", "asym_log_prob", "asym_prob", "mc_estimate",
                   "mc_log_estimate", "mc_std_error", "ratio_mc_over_asym"});
    for (double x : levels) {
        const lnt::TailValue av = asym->evaluate(x);
        std::vector<std::string> cells{fmt(std::log(x)), fmt(x), fmt(av.log_value),
                                       fmt(av.value)};
        if (o.samples > 0) {
            const Eigen::VectorXd lam = drift ? drift->at_level(x)
                                              : Eigen::VectorXd::Zero(model.dim());
            const lnt::McEstimate est = right ? lnt::estimate_right_is(model, x, cfg, lam)
                                              : lnt::estimate_left_is(model, x, cfg, lam);
            cells.push_back(fmt(est.estimate));
            cells.push_back(fmt(est.log_estimate));
            cells.push_back(fmt(est.std_error));
            cells.push_back(fmt(std::exp(est.log_estimate - av.log_value)));
        } else {
            cells.insert(cells.end(), {"", "", "", ""});
        }
        csv.row(cells);
    }
    return 0;
}

int run_stress(const CommonOpts& o) {
    lnt::ParsedInput input = lnt::parse_model_file(o.model_path);
    auto* mk = std::get_if<lnt::MarketInput>(&input);
    if (!mk) throw lnt::Error("the stress subcommand needs a market file");
    if (o.levels.size() != 1) throw lnt::Error("give exactly one --levels value");
    const double x = o.levels.front();

    const bool crash = (mk->benchmark.weights.array() > 0.0).all();
    lnt::Portfolio bench = mk->benchmark;
    if (mk->normalize) {
        bench = crash ? lnt::make_crash_scenario(mk->market, bench)
                      : lnt::make_spread_scenario(mk->market, bench);
    }
    const lnt::StressReport report = crash ? lnt::stress_index_crash(mk->market, bench, x)
                                           : lnt::stress_spread(mk->market, bench, x);

    std::cout << (crash ? "index-crash" : "spread") << " scenario at x = " << fmt_short(x)
              << "\nasset  class  exponent  conditional_value\n";
    const char* names[] = {"safe", "dangerous", "prop_to_x", "slower_than_x"};
    std::optional<CsvWriter> csv;
    if (!o.out_path.empty()) {
        csv.emplace(o.out_path, std::vector<std::string>{"asset", "class", "exponent", "log_coefficient",
                                 "log_conditional_value", "conditional_value"});
    }
    for (const auto& a : report.assets) {
        std::cout << "  " << a.asset + 1 << "  " << names[static_cast<int>(a.cls)] << "  "
                  << fmt_short(a.exponent) << "  " << fmt_short(a.conditional_value) << "\n";
        if (csv) {
            csv->row({std::to_string(a.asset + 1), names[static_cast<int>(a.cls)],
                      fmt(a.exponent), fmt(a.log_coefficient), fmt(a.log_conditional_value),
                      fmt(a.conditional_value)});
        }
    }
    if (report.dominant_split) {
        std::cout << "dominant long asset: " << *report.dominant_split + 1 << "\n";
    }
    if (mk->held) {
        const double v = lnt::portfolio_conditional_value(mk->market, *mk->held, bench, x);
        std::cout << "held portfolio conditional value: " << fmt(v) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tail asymptotics and variance-reduced Monte Carlo for log-normal sums"};
    app.require_subcommand(1);

    CommonOpts o;
    std::vector<double> u_in;
    bool gaussian = false;

    auto add_levels = [&](CLI::App* cmd, bool with_sweep) {
        cmd->add_option("--levels", o.levels, "comma-separated levels x")->delimiter(',');
        if (with_sweep) {
            cmd->add_option("--sweep", o.sweep, "log-spaced levels: start,stop,count")
                ->delimiter(',');
        }
        cmd->add_option("--out", o.out_path, "write CSV here");
    };

    CLI::App* qp = app.add_subcommand("qp", "minimum-variance weights and margins");
    add_model_flag(qp, o);
    qp->add_option("--out", o.out_path, "write CSV here");

    CLI::App* lt = app.add_subcommand("left-tail", "sharp small-x asymptote of P[X <= x]");
    add_model_flag(lt, o);
    add_levels(lt, true);

    CLI::App* rt = app.add_subcommand("right-tail", "sharp large-x asymptote of P[X >= x]");
    add_model_flag(rt, o);
    add_levels(rt, true);

    CLI::App* cond = app.add_subcommand("conditional", "conditional Laplace transform / limiting law");
    add_model_flag(cond, o);
    add_levels(cond, false);
    cond->add_option("--u", u_in, "exponent vector u")->delimiter(',');
    cond->add_flag("--gaussian", gaussian, "print the limiting Gaussian instead");

    CLI::App* mc = app.add_subcommand("mc", "Monte Carlo estimates and reduction factors");
    add_model_flag(mc, o);
    add_levels(mc, true);
    mc->add_option("--samples", o.samples, "samples per level");
    mc->add_option("--seed", o.seed, "RNG seed");
    mc->add_flag("--no-is", o.no_is, "disable importance sampling");

    CLI::App* stress = app.add_subcommand("stress", "per-asset conditional expectations");
    add_model_flag(stress, o);
    add_levels(stress, false);

    CLI::App* sweep = app.add_subcommand("sweep", "asymptote vs Monte Carlo across levels (CSV)");
    add_model_flag(sweep, o);
    add_levels(sweep, true);
    sweep->add_option("--samples", o.samples, "samples per level (0: asymptote only)");
    sweep->add_option("--seed", o.seed, "RNG seed");
    sweep->add_flag("--no-is", o.no_is, "disable importance sampling");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // help exits cleanly; usage problems exit 2
    }

    try {
        if (app.got_subcommand(qp)) return run_qp(o);
        if (app.got_subcommand(lt)) return run_tail(o, false);
        if (app.got_subcommand(rt)) return run_tail(o, true);
        if (app.got_subcommand(cond)) return run_conditional(o, u_in, gaussian);
        if (app.got_subcommand(mc)) return run_mc(o);
        if (app.got_subcommand(stress)) return run_stress(o);
        if (app.got_subcommand(sweep)) return run_sweep(o);
    } catch (const lnt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
