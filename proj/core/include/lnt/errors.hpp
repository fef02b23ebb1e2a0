#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lnt {

/// Base class for all domain errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

class EmptyIndexSet : public Error {
public:
    explicit EmptyIndexSet(const std::string& msg) : Error(msg) {}
};

class IndexOutOfRange : public Error {
public:
    explicit IndexOutOfRange(const std::string& msg) : Error(msg) {}
};

class InfeasibleRegion : public Error {
public:
    explicit InfeasibleRegion(const std::string& msg) : Error(msg) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A nondegeneracy check failed: some inactive coordinate of the weight
/// minimizer has a vanishing constraint margin, so the sharp asymptotic
/// formulas do not apply. Carries the offending (index, margin) pairs.
class AssumptionViolated : public Error {
public:
    AssumptionViolated(const std::string& msg,
                       std::vector<std::pair<int, double>> margins = {})
        : Error(msg), margins_(std::move(margins)) {}
    const std::vector<std::pair<int, double>>& margins() const { return margins_; }

private:
    std::vector<std::pair<int, double>> margins_;
};

/// Margin within the borderline tolerance band: neither safely nonzero nor
/// exactly resolvable. The degenerate regime has qualitatively different
/// asymptotics, so it is rejected rather than approximated.
class AssumptionBorderline : public AssumptionViolated {
public:
    AssumptionBorderline(const std::string& msg,
                         std::vector<std::pair<int, double>> margins = {})
        : AssumptionViolated(msg, std::move(margins)) {}
};

/// More than one split dominates the right tail; conditional-law results
/// are only available for a singleton dominant set.
class NonSingletonDominance : public Error {
public:
    explicit NonSingletonDominance(const std::string& msg) : Error(msg) {}
};

class ZeroWeight : public Error {
public:
    explicit ZeroWeight(const std::string& msg) : Error(msg) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

}  // namespace lnt
