#include "proverb/error.hpp"

namespace proverb {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::MissingSplit: return "MissingSplit";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::CorpusOverlap: return "CorpusOverlap";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::PreconditionViolation: return "PreconditionViolation";
        case ErrorCode::CorruptIndex: return "CorruptIndex";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::StaleIndex: return "StaleIndex";
        case ErrorCode::InsufficientExamples: return "InsufficientExamples";
        case ErrorCode::TemplateError: return "TemplateError";
        case ErrorCode::ProviderExhausted: return "ProviderExhausted";
        case ErrorCode::CacheCorrupt: return "CacheCorrupt";
        case ErrorCode::AmbiguousScript: return "AmbiguousScript";
        case ErrorCode::ScriptError: return "ScriptError";
        case ErrorCode::EmptyPairs: return "EmptyPairs";
        case ErrorCode::AllCandidatesEmpty: return "AllCandidatesEmpty";
        case ErrorCode::SidecarUnavailable: return "SidecarUnavailable";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::TooManyMissingVerdicts: return "TooManyMissingVerdicts";
        case ErrorCode::MissingStrategy: return "MissingStrategy";
        case ErrorCode::MissingConfig: return "MissingConfig";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::RunExists: return "RunExists";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

ErrorKind error_kind(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ProviderUnavailable:
        case ErrorCode::ProviderExhausted:
        case ErrorCode::CacheCorrupt:
        case ErrorCode::SidecarUnavailable:
        case ErrorCode::ShapeMismatch:
        case ErrorCode::TooManyMissingVerdicts:
        case ErrorCode::IoError:
            return ErrorKind::ProviderOrIo;
        default:
            return ErrorKind::Validation;
    }
}

}  // namespace proverb
