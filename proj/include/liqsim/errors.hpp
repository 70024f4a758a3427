#pragma once

#include <stdexcept>

namespace liqsim {

/// Requested a Hawkes simulation with excitation >= decay without opting in.
class stability_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A stage of the quantization grid has fewer samples than grid points.
class insufficient_data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario configuration file is malformed; message carries key and line.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace liqsim
