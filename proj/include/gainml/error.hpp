#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gainml {

enum class ErrorCode {
    InvalidArgument,
    FileNotFound,
    IoError,
    ConfigError,
    MalformedTimestamp,
    DuplicateTimestamp,
    CadenceMismatch,
    EmptyPeriod,
    ConstantColumn,
    DimensionMismatch,
    SaturatedSmoother,
    NoAdmissibleK,
    TooFewRecords,
    EmptyPredictionSet,
    DegenerateDenominator,
    BinWidthMismatch,
    NonpositiveAEP,
    BootstrapInsufficient,
    InvalidScenario,
    ManifestMissing,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to a stable exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace gainml
