#pragma once

#include <stdexcept>
#include <string>

namespace lomaq {

// Bad or inconsistent run configuration (unknown keys, impossible budgets, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

// Numerical failure during training (NaN gradients/loss), carries a diagnostic.
class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string &what) : std::runtime_error(what) {}
};

// File / serialization problems.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace lomaq
