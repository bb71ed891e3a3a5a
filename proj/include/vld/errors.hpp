#pragma once

#include <stdexcept>
#include <string>

namespace vld {

enum class ErrorCode {
    ZeroRow,
    DimMismatch,
    NonPositiveTemperature,
    LabelOutOfRange,
    IdMismatch,
    MissingWeight,
    KOutOfRange,
    TooFewRows,
    ShapeMismatch,
    MissingDescription,
    DuplicateKey,
    ClientUnavailable,
    EmptyGeneration,
    EncoderLacksTokenAccess,
    BadSpec,
    CacheCorrupt,
    VersionUnsupported,
    MissingSample,
    MissingText,
    TooFewLabels,
    EmptyClass,
    MissingCaptions,
    DivergedLoss,
    EmptyFewshotPool,
    EmptyCache,
    OverlappingSplits,
    UnknownSplit,
    ConfigInvalid,
    InputMissing,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace vld
