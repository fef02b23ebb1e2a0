#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lnt/matrix.hpp"
#include "lnt/risk_engine.hpp"

namespace lnt {

/// A plain Gaussian-exponent model read from a config file. Components are
/// permuted positives-first internally; order[k] is the user index of model
/// component k, so results can be reported in the file's asset order.
struct PlainModelInput {
    ModelSpec model;
    std::vector<int> order;
};

/// A market description plus the benchmark defining the stress scenario.
struct MarketInput {
    MarketModel market;
    Portfolio benchmark;
    std::optional<Portfolio> held;
    bool normalize = true;  ///< scale the benchmark to initial value one per leg
};

using ParsedInput = std::variant<PlainModelInput, MarketInput>;

/// Parses a JSON model file. Two shapes are accepted:
///
///   {"mu": [...], "sigma": [...], "rho": r, "signs": [1,1,-1,-1]}
///   {"market": {"s0": [...], "theta": [...], "horizon": t, "sigma": [...],
///               "rho": r}, "benchmark": [...], "held": [...]}
///
/// The covariance may be given either as a full "cov" matrix or as a sigma
/// vector with a constant correlation "rho" (b_ij = sigma_i sigma_j rho).
/// Throws ParseError for malformed input and ValidationError for violated
/// model invariants.
ParsedInput parse_model_file(const std::string& path);

/// Same, from an already-loaded JSON text.
ParsedInput parse_model_text(const std::string& text);

}  // namespace lnt
