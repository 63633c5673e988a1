#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcs {

enum class ErrorCode {
    InvalidArgument,
    InvalidConfig,
    EmptyWorld,
    ClockRegression,
    OutOfOrder,
    NoWorkers,
    NotEmergency,
    NoEvents,
    NonPositiveTime,
    NoAnswers,
    MissingWeight,
    EmptyMatrix,
    EmptyInput,
    KeyMismatch,
    NoData,
    TooFewPoints,
    InvalidSpec,
    IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as this exception. The code is the
// machine-readable part; the CLI prints it verbatim on stderr.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace mcs
