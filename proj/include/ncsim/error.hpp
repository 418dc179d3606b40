// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ncsim {

enum class ErrorCode {
    ZeroInverse,
    BadParams,
    LengthMismatch,
    InsufficientSegments,
    TooLarge,
    MalformedBody,
    MalformedFrame,
    UnexpectedData,
    NoMssOption,
    HandshakeTimeout,
    PastEvent,
    ConfigError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::ZeroInverse: return "ZeroInverse";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InsufficientSegments: return "InsufficientSegments";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::MalformedBody: return "MalformedBody";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::UnexpectedData: return "UnexpectedData";
    case ErrorCode::NoMssOption: return "NoMssOption";
    case ErrorCode::HandshakeTimeout: return "HandshakeTimeout";
    case ErrorCode::PastEvent: return "PastEvent";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ncsim
