#pragma once

#include <stdexcept>
#include <string>

namespace conflab {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A point or index that falls outside a grid.
class OutOfBoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A stopped path that never reached its stopping set.
class NotStoppedError : public std::runtime_error {
public:
    NotStoppedError(const std::string& what, double max_attained)
        : std::runtime_error(what), max_attained_(max_attained) {}
    /// Largest value of the stopping functional seen along the path.
    [[nodiscard]] double max_attained() const noexcept { return max_attained_; }

private:
    double max_attained_;
};

/// Bad experiment configuration; carries the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)) {}
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace conflab
