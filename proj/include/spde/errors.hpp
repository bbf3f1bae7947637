#pragma once

#include <stdexcept>
#include <string>

namespace spde {

/// Thrown when a coefficient or noise family violates one of the standing
/// structural assumptions (summability of the basis, monotone Lipschitz
/// nonlinearity, nonnegative bounded diffusion coefficient).
class AssumptionViolation : public std::runtime_error {
public:
    explicit AssumptionViolation(const std::string& what)
        : std::runtime_error(what) {}
};

/// Thrown by the time steppers when a state stops being finite. Carries the
/// step index so the offending state can be serialized by the caller.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(int step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

/// Configuration / input-file errors. `key_path` identifies the offending
/// entry ("noise.N") when known.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, std::string key_path = "")
        : std::runtime_error(what), key_path_(std::move(key_path)) {}
    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

}  // namespace spde
