#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fadrc {

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Filter synthesis could not reach a stable fit within tolerance.
struct SynthesisError : std::runtime_error {
    SynthesisError(const std::string& what, double mag_err_db, double phase_err_deg)
        : std::runtime_error(what), mag_err_db(mag_err_db), phase_err_deg(phase_err_deg) {}
    double mag_err_db;
    double phase_err_deg;
};

struct PoleOnGrid : std::runtime_error {
    PoleOnGrid(const std::string& what, double omega) : std::runtime_error(what), omega(omega) {}
    double omega;
};

struct BracketError : std::runtime_error {
    BracketError(const std::string& what, std::vector<double> crossings)
        : std::runtime_error(what), crossings(std::move(crossings)) {}
    std::vector<double> crossings;
};

struct InfeasibleDesign : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    NumericError(const std::string& what, double residual) : std::runtime_error(what), residual(residual) {}
    double residual;
};

// Orders must be rationalised before the commensurate expansion.
struct OrderApproximationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fadrc
