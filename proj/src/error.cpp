#include "gainml/error.hpp"

namespace gainml {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::MalformedTimestamp: return "MalformedTimestamp";
        case ErrorCode::DuplicateTimestamp: return "DuplicateTimestamp";
        case ErrorCode::CadenceMismatch: return "CadenceMismatch";
        case ErrorCode::EmptyPeriod: return "EmptyPeriod";
        case ErrorCode::ConstantColumn: return "ConstantColumn";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::SaturatedSmoother: return "SaturatedSmoother";
        case ErrorCode::NoAdmissibleK: return "NoAdmissibleK";
        case ErrorCode::TooFewRecords: return "TooFewRecords";
        case ErrorCode::EmptyPredictionSet: return "EmptyPredictionSet";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::BinWidthMismatch: return "BinWidthMismatch";
        case ErrorCode::NonpositiveAEP: return "NonpositiveAEP";
        case ErrorCode::BootstrapInsufficient: return "BootstrapInsufficient";
        case ErrorCode::InvalidScenario: return "InvalidScenario";
        case ErrorCode::ManifestMissing: return "ManifestMissing";
    }
    return "Unknown";
}

}  // namespace gainml
