#include "evograph/error.hpp"

namespace evograph {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::EmbeddingDimensionMismatch: return "EmbeddingDimensionMismatch";
        case Errc::UnknownEndpoint: return "UnknownEndpoint";
        case Errc::UnknownNode: return "UnknownNode";
        case Errc::IllegalSelfLoop: return "IllegalSelfLoop";
        case Errc::MalformedInput: return "MalformedInput";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::WeightsOffSimplex: return "WeightsOffSimplex";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::NoCodeNodes: return "NoCodeNodes";
        case Errc::NoDocPairs: return "NoDocPairs";
        case Errc::NoBuildNodes: return "NoBuildNodes";
        case Errc::NoLegacyNodes: return "NoLegacyNodes";
        case Errc::NoMergePairs: return "NoMergePairs";
        case Errc::NonPositiveImprovement: return "NonPositiveImprovement";
        case Errc::AllOperatorsDisabled: return "AllOperatorsDisabled";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::EmptyArchive: return "EmptyArchive";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::PoolTooSmall: return "PoolTooSmall";
        case Errc::NonFiniteInput: return "NonFiniteInput";
        case Errc::NoProbes: return "NoProbes";
        case Errc::EmptyWindow: return "EmptyWindow";
        case Errc::EmptyPopulation: return "EmptyPopulation";
        case Errc::UnknownEventKind: return "UnknownEventKind";
        case Errc::OutOfRangeEvent: return "OutOfRangeEvent";
        case Errc::InvalidSpec: return "InvalidSpec";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::UnknownScenario: return "UnknownScenario";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace evograph
