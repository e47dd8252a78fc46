#pragma once

#include <stdexcept>
#include <string>

namespace streamcalc {

// The offered load exceeds what the fading service can drain: no theta with
// V(theta) < 1 exists. Callers that need a probability should treat the
// bound as 1.
class UnstableSystemError : public std::runtime_error {
public:
    explicit UnstableSystemError(const std::string& what) : std::runtime_error(what) {}
};

// Every candidate layer count is unstable or yields no deliverable bits.
class AllInfeasibleError : public std::runtime_error {
public:
    explicit AllInfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// The frame-size cap is active, so a result that only holds in the uncapped
// regime (e.g. the deadline-linearity decomposition) is void.
class CapActiveError : public std::runtime_error {
public:
    explicit CapActiveError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine cannot reach its accuracy target (recurrence depth
// exhausted, cancellation past float resolution, non-convergence).
class AccuracyError : public std::runtime_error {
public:
    explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace streamcalc
