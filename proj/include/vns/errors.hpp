#pragma once

#include <stdexcept>
#include <string>

namespace vns {

/// Runtime failure of a numerical scheme (CFL rejection, solver divergence, ...).
/// `code()` is a short machine-readable tag used in error records and exit paths.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

/// Invalid configuration (unknown key, malformed value, inconsistent setup).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vns
