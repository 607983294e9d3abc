#include "meaad/error.hpp"

namespace meaad {

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidConfig:
            return 2;
        case ErrorCode::NonFinite:
            return 4;
        default:
            return 3;
    }
}

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InsufficientGallery: return "InsufficientGallery";
        case ErrorCode::MismatchedSupportSizes: return "MismatchedSupportSizes";
        case ErrorCode::SingleExpert: return "SingleExpert";
        case ErrorCode::SingleClassDataset: return "SingleClassDataset";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::Empty: return "Empty";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::NotTrained: return "NotTrained";
        case ErrorCode::NonFinite: return "NonFinite";
    }
    return "Unknown";
}

}  // namespace meaad
