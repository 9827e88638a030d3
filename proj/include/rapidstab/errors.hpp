#pragma once

#include <stdexcept>
#include <string>

namespace rapidstab {

// Exit codes used by the CLI. Library errors carry the code they map to.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitHypothesis = 2,
    kExitNearSingular = 3,
    kExitQuadrature = 4,
    kExitInstability = 5,
};

struct Error : std::runtime_error {
    int code;
    Error(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct UsageError : Error {
    explicit UsageError(const std::string& msg) : Error(kExitUsage, msg) {}
};

struct HypothesisViolation : Error {
    int worst_k;
    double c_lower;
    HypothesisViolation(const std::string& msg, int k, double c)
        : Error(kExitHypothesis, msg), worst_k(k), c_lower(c) {}
};

struct NearSingularBasis : Error {
    double sigma_min;
    NearSingularBasis(const std::string& msg, double s)
        : Error(kExitNearSingular, msg), sigma_min(s) {}
};

struct QuadratureUnderresolved : Error {
    explicit QuadratureUnderresolved(const std::string& msg) : Error(kExitQuadrature, msg) {}
};

struct Instability : Error {
    explicit Instability(const std::string& msg) : Error(kExitInstability, msg) {}
};

// Violated assumption of the finite-dimensional construction.
struct AssumptionViolation : Error {
    explicit AssumptionViolation(const std::string& msg) : Error(kExitUsage, msg) {}
};

}  // namespace rapidstab
