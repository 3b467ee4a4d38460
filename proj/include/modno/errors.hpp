#pragma once

#include <stdexcept>
#include <string>

namespace modno {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension disagreement between matrices/networks.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid configuration value (bad layer list, lr <= 0, q outside [0,1], ...).
struct ConfigError : Error {
    using Error::Error;
};

struct IndexError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// Relative error against a zero-norm target is undefined.
struct DegenerateTargetError : Error {
    using Error::Error;
};

// Time stepping left the physical range (NaN or |u| above threshold).
struct SolverDivergenceError : Error {
    SolverDivergenceError(const std::string& equation, double time_reached, const std::string& what)
        : Error(what), equation(equation), time_reached(time_reached) {}
    std::string equation;
    double time_reached;
};

}  // namespace modno
