#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fogbus {

/// Milliseconds since the scenario epoch. Virtual in simulation, wall-clock
/// (scaled) over TCP.
using TimeMs = double;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace fogbus
