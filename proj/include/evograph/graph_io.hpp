#pragma once

#include "evograph/graph.hpp"

#include <string>
#include <string_view>

namespace evograph {

inline constexpr int kGraphFormatVersion = 1;

/// Canonical JSON encoding: nodes sorted by id, edges by (src, dst, kind).
std::string serialize(const ArtefactGraph& graph);

/// Throws Error{MalformedInput} naming the offending line or field.
ArtefactGraph deserialize(std::string_view bytes);

ArtefactGraph load_graph(const std::string& path);
void save_graph(const ArtefactGraph& graph, const std::string& path);

}  // namespace evograph
