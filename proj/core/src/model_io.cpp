#include "lnt/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lnt {
namespace {

using nlohmann::json;

Eigen::VectorXd read_vector(const json& j, const std::string& key) {
    const json& v = j.at(key);
    if (!v.is_array() || v.empty()) throw ParseError("'" + key + "' must be a nonempty array");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ParseError("'" + key + "' must contain numbers");
        out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    }
    return out;
}

CovMatrix read_covariance(const json& j) {
    const bool has_cov = j.contains("cov");
    const bool has_sigma = j.contains("sigma");
    if (has_cov == has_sigma) {
        throw ParseError("specify the covariance either as 'cov' or as 'sigma' + 'rho'");
    }
    Eigen::MatrixXd b;
    if (has_cov) {
        const json& m = j.at("cov");
        if (!m.is_array() || m.empty()) throw ParseError("'cov' must be a nonempty matrix");
        const std::size_t n = m.size();
        b.resize(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!m[i].is_array() || m[i].size() != n) {
                throw ParseError("'cov' row " + std::to_string(i + 1) + " must have " +
                                 std::to_string(n) + " entries");
            }
            for (std::size_t k = 0; k < n; ++k) {
                if (!m[i][k].is_number()) throw ParseError("'cov' must contain numbers");
                b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                    m[i][k].get<double>();
            }
        }
    } else {
        if (!j.contains("rho")) throw ParseError("'sigma' requires a constant correlation 'rho'");
        const Eigen::VectorXd sigma = read_vector(j, "sigma");
        if ((sigma.array() <= 0.0).any()) {
            throw ValidationError("'sigma' entries must be positive");
        }
        const double rho = j.at("rho").get<double>();
        const Eigen::Index n = sigma.size();
        b = rho * (sigma * sigma.transpose());
        for (Eigen::Index i = 0; i < n; ++i) b(i, i) = sigma[i] * sigma[i];
    }
    try {
        return CovMatrix(std::move(b));
    } catch (const NotPositiveDefinite& e) {
        throw ValidationError(std::string("covariance invariant violated: ") + e.what());
    }
}

PlainModelInput parse_plain(const json& j) {
    Eigen::VectorXd mu = read_vector(j, "mu");
    CovMatrix cov = read_covariance(j);
    const int n = cov.size();
    if (mu.size() != n) {
        throw ValidationError("'mu' has " + std::to_string(mu.size()) + " entries for a " +
                              std::to_string(n) + "-dimensional covariance");
    }

    std::vector<int> signs(n, 1);
    if (j.contains("signs")) {
        const json& s = j.at("signs");
        if (!s.is_array() || static_cast<int>(s.size()) != n) {
            throw ParseError("'signs' must list one entry per component");
        }
        for (int i = 0; i < n; ++i) {
            const int v = s[i].get<int>();
            if (v != 1 && v != -1) throw ParseError("'signs' entries must be +1 or -1");
            signs[i] = v;
        }
    }

    std::vector<int> order;
    order.reserve(n);
    for (int i = 0; i < n; ++i)
        if (signs[i] > 0) order.push_back(i);
    const int m = static_cast<int>(order.size());
    for (int i = 0; i < n; ++i)
        if (signs[i] < 0) order.push_back(i);
    if (m == 0) throw ValidationError("at least one component must carry a plus sign");

    Eigen::VectorXd mu_p(n);
    Eigen::MatrixXd b_p(n, n);
    for (int k = 0; k < n; ++k) {
        mu_p[k] = mu[order[k]];
        for (int l = 0; l < n; ++l) b_p(k, l) = cov(order[k], order[l]);
    }
    return PlainModelInput{ModelSpec(std::move(mu_p), CovMatrix(std::move(b_p)), m),
                           std::move(order)};
}

MarketInput parse_market(const json& j) {
    const json& mj = j.at("market");
    Eigen::VectorXd s0 = read_vector(mj, "s0");
    Eigen::VectorXd theta = read_vector(mj, "theta");
    if (!mj.contains("horizon")) throw ParseError("'market' needs a 'horizon'");
    const double t = mj.at("horizon").get<double>();
    CovMatrix cov = read_covariance(mj);
    MarketModel market(std::move(s0), std::move(theta), std::move(cov), t);

    if (!j.contains("benchmark")) throw ParseError("market files need a 'benchmark' weight list");
    Portfolio benchmark{read_vector(j, "benchmark")};
    if (benchmark.dim() != market.dim()) {
        throw ValidationError("'benchmark' length does not match the market dimension");
    }
    MarketInput input{std::move(market), std::move(benchmark), std::nullopt, true};
    if (j.contains("held")) {
        input.held = Portfolio{read_vector(j, "held")};
        if (input.held->dim() != input.market.dim()) {
            throw ValidationError("'held' length does not match the market dimension");
        }
    }
    if (j.contains("normalize")) input.normalize = j.at("normalize").get<bool>();
    return input;
}

ParsedInput parse_json(const json& j) {
    try {
        if (j.contains("market")) return parse_market(j);
        return parse_plain(j);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
}

}  // namespace

ParsedInput parse_model_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return parse_json(j);
}

ParsedInput parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_text(buf.str());
}

}  // namespace lnt
