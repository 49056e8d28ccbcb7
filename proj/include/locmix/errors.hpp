#pragma once

#include <stdexcept>
#include <string>

namespace locmix {

/// Invalid process, experiment or model parameters. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation could not produce a trustworthy number (degenerate kernel,
/// box too small, singular frame...). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace locmix
