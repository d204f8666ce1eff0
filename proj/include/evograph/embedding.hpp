#pragma once

#include "evograph/graph.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>

namespace evograph {

inline constexpr std::uint64_t kEmbeddingSeed = 0x6576'6f67'7261'7068ULL;
inline constexpr std::size_t kDocChunkTokens = 4;

/// Deterministic stand-in for a learned encoder: hashes the node id and its
/// attributes into `dim` reals in [-1, 1].
Eigen::VectorXd pseudo_embedding(const std::string& id, const Attributes& attributes, int dim,
                                 std::uint64_t seed = kEmbeddingSeed);

/// Mean of the pseudo-embeddings of consecutive `chunk_tokens`-token chunks.
/// Zero vector for an empty token list.
Eigen::VectorXd pooled_text_embedding(std::span<const std::string> tokens, int dim,
                                      std::size_t chunk_tokens = kDocChunkTokens,
                                      std::uint64_t seed = kEmbeddingSeed);

/// Recomputes `node.embedding` from its content (pooled text for doc nodes).
void refresh_embedding(ArtefactNode& node, int dim);

}  // namespace evograph
