#pragma once

#include <stdexcept>
#include <string>

namespace mergesim {

/// Invalid scenario, road, shield or run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure talking to an external decision maker.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Broken internal invariant (e.g. a cycle in the interaction topology).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Metric that is undefined for the given input (e.g. no ramp spawns).
class UndefinedMetric : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mergesim
