#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evograph {

enum class Errc {
    DuplicateId,
    EmbeddingDimensionMismatch,
    UnknownEndpoint,
    UnknownNode,
    IllegalSelfLoop,
    MalformedInput,
    EmptyInput,
    WeightsOffSimplex,
    ShapeMismatch,
    NoCodeNodes,
    NoDocPairs,
    NoBuildNodes,
    NoLegacyNodes,
    NoMergePairs,
    NonPositiveImprovement,
    AllOperatorsDisabled,
    DimensionMismatch,
    EmptyArchive,
    LengthMismatch,
    PoolTooSmall,
    NonFiniteInput,
    NoProbes,
    EmptyWindow,
    EmptyPopulation,
    UnknownEventKind,
    OutOfRangeEvent,
    InvalidSpec,
    InvalidConfig,
    UnknownScenario,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Exception carrying a stable error code; the message holds the diagnostic.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

    Errc code() const noexcept { return code_; }
    /// The message without the error-name prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

}  // namespace evograph
