#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace meaad {

enum class ErrorCode {
    // configuration
    InvalidConfig,
    // data
    ZeroVector,
    DimensionMismatch,
    InsufficientGallery,
    MismatchedSupportSizes,
    SingleExpert,
    SingleClassDataset,
    LengthMismatch,
    Empty,
    Io,
    Parse,
    UnsupportedVersion,
    NotTrained,
    // numeric
    NonFinite,
};

/// Process exit code bucket for an error (2 config, 3 data, 4 numeric).
int exit_code_for(ErrorCode code) noexcept;

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

    ErrorCode code() const noexcept { return code_; }
    /// Message without the error-code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace meaad
