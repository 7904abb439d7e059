#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace proverb {

enum class ErrorCode {
    // corpus
    MalformedRecord,
    DuplicateId,
    MissingSplit,
    EmptyCorpus,
    CorpusOverlap,
    // embedding / index
    ProviderUnavailable,
    DimensionMismatch,
    EmptyInput,
    PreconditionViolation,
    CorruptIndex,
    VersionMismatch,
    StaleIndex,
    // prompting
    InsufficientExamples,
    TemplateError,
    // llm_client
    ProviderExhausted,
    CacheCorrupt,
    AmbiguousScript,
    ScriptError,
    // metrics
    EmptyPairs,
    AllCandidatesEmpty,
    SidecarUnavailable,
    ShapeMismatch,
    // judging / runner / cli
    TooManyMissingVerdicts,
    MissingStrategy,
    MissingConfig,
    ConfigError,
    RunExists,
    IoError,
};

// Validation errors map to exit code 1, provider and IO failures to exit code 2.
enum class ErrorKind { Validation, ProviderOrIo };

std::string_view error_code_name(ErrorCode code) noexcept;
ErrorKind error_kind(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
          code_(code),
          detail_(detail) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }
    ErrorKind kind() const noexcept { return error_kind(code_); }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace proverb
