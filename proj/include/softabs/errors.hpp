#pragma once

#include <stdexcept>
#include <string>

namespace softabs {

/// A numerically exploded point in phase space: non-finite energies or
/// derivatives, overflowing exponentials, or a fixed-point iteration that
/// failed to converge. Samplers treat it as an automatic rejection.
class DivergenceError : public std::runtime_error {
public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user configuration (bad flag values, malformed files).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace softabs
