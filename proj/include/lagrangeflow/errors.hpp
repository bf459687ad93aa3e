#pragma once

#include <stdexcept>
#include <string>

namespace lagrangeflow {

/// Base class for all library errors. Carries a stable, module-qualified
/// code ("flux.InversionFailure") so the CLI can surface failures uniformly.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct InfeasibleNormalization : Error {
    explicit InfeasibleNormalization(const std::string& what)
        : Error("flux.InfeasibleNormalization", what) {}
};

struct DerivativeMismatch : Error {
    explicit DerivativeMismatch(const std::string& what)
        : Error("flux.DerivativeMismatch", what) {}
};

struct InversionFailure : Error {
    explicit InversionFailure(const std::string& what)
        : Error("flux.InversionFailure", what) {}
};

struct QuadratureFailure : Error {
    explicit QuadratureFailure(const std::string& what)
        : Error("numerics.QuadratureFailure", what) {}
};

struct CFLViolation : Error {
    explicit CFLViolation(const std::string& what)
        : Error("eulerian.CFLViolation", what) {}
};

struct WindowTooSmall : Error {
    explicit WindowTooSmall(const std::string& what)
        : Error("eulerian.WindowTooSmall", what) {}
};

struct PositivityLoss : Error {
    explicit PositivityLoss(const std::string& what)
        : Error("temple.PositivityLoss", what) {}
};

struct MonotonicityLoss : Error {
    explicit MonotonicityLoss(const std::string& what)
        : Error("flow_map.MonotonicityLoss", what) {}
};

struct AnchorDrift : Error {
    explicit AnchorDrift(const std::string& what)
        : Error("flow_map.AnchorDrift", what) {}
};

struct OutOfRange : Error {
    explicit OutOfRange(const std::string& what)
        : Error("flow_map.OutOfRange", what) {}
};

struct NonHyperbolic : Error {
    explicit NonHyperbolic(const std::string& what)
        : Error("systems.NonHyperbolic", what) {}
};

struct DegenerateCoefficient : Error {
    explicit DegenerateCoefficient(const std::string& what)
        : Error("variational.DegenerateCoefficient", what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what)
        : Error("cli.ConfigError", what) {}
};

}  // namespace lagrangeflow
