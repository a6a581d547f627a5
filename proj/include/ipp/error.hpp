#pragma once

#include <stdexcept>
#include <string>

namespace ipp {

/// Malformed scenario or trajectory document.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A configuration value violates an invariant; names the offending field.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Model evaluation left its domain of validity (cos(theta) -> 0, V -> 0,
/// reversed canard inflow). `term` names the expression that failed.
class SingularityError : public std::runtime_error {
public:
    SingularityError(std::string term, const std::string& what)
        : std::runtime_error(what), term_(std::move(term)) {}

    const std::string& term() const noexcept { return term_; }

private:
    std::string term_;
};

/// Too few samples for the requested statistic.
class StatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Desired-trajectory lookup outside the tabulated downrange interval.
class OutOfRangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integration horizon reached before the requested event.
class HorizonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ipp
