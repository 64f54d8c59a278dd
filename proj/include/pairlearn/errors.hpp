#pragma once

#include <stdexcept>
#include <string>

namespace pairlearn {

// Exit codes used by the CLI so CI can classify failures.
enum ExitCode : int {
    exit_ok = 0,
    exit_config_error = 2,
    exit_data_error = 3,
    exit_diverged = 4,
    exit_invariant_violation = 5,
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularityError : DataError {
    using DataError::DataError;
};

struct DivergedError : std::runtime_error {
    explicit DivergedError(const std::string& what, long step_index = -1)
        : std::runtime_error(what), step(step_index)
    {
    }
    long step;
};

struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

inline int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e))
        return exit_config_error;
    if (dynamic_cast<const DataError*>(&e))
        return exit_data_error;
    if (dynamic_cast<const DivergedError*>(&e))
        return exit_diverged;
    if (dynamic_cast<const InvariantViolation*>(&e))
        return exit_invariant_violation;
    return 1;
}

} // namespace pairlearn
