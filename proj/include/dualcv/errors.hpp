#pragma once

#include <stdexcept>
#include <string>

namespace dualcv {

// Bad input files: CSV parse failures, schema violations, domain violations
// in cells. The message carries row/column context where available.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Estimation cannot proceed: perfect separation, rank-deficient design.
// Non-convergence of the joint model is not an exception; it is reported
// on the fit result so callers can still inspect the trajectory.
class EstimationError : public std::runtime_error {
public:
    explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dualcv
