#pragma once

#include <stdexcept>
#include <string>

namespace fsqkd {

/// Base class for all library errors.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid physical or numerical parameter (w0 <= 0, bad dimension, ...).
struct invalid_parameter : error {
    using error::error;
};

/// Two fields/screens do not live on the same grid.
struct grid_mismatch : error {
    using error::error;
};

/// Grid too coarse or too small for the requested mode/operation.
struct grid_undersampled : error {
    using error::error;
};

/// A numerical contract was violated (zero field, failed factorization,
/// no root bracket, ...).
struct numerical_error : error {
    using error::error;
};

/// Bad or inconsistent run configuration.
struct config_error : error {
    using error::error;
};

}  // namespace fsqkd
