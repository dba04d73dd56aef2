#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace oaae {

// Exit codes used by the CLI; library exceptions map onto these.
enum class ExitCode : int { ok = 0, config_error = 2, io_error = 3, numeric_error = 4 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : IoError {
    using IoError::IoError;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DecompositionError : NumericError {
    using NumericError::NumericError;
};

struct UndefinedAurocError : NumericError {
    using NumericError::NumericError;
};

// Raised when a latent vector is too close to zero to define an angle.
// Carries the offending batch indices when a whole batch was scored.
struct DegenerateLatentError : NumericError {
    std::vector<int> indices;
    explicit DegenerateLatentError(const std::string& msg, std::vector<int> idx = {})
        : NumericError(msg), indices(std::move(idx)) {}
};

} // namespace oaae
