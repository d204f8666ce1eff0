#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

namespace evograph {

inline constexpr std::size_t kNodeTypeCount = 12;
inline constexpr std::size_t kEdgeTypeCount = 8;
inline constexpr std::size_t kDescriptorSize = kNodeTypeCount + 2;
inline constexpr int kDefaultEmbeddingDim = 16;

enum class NodeType : std::uint8_t {
    code, doc, build, compiler, test, schema, policy, ticket, ui, log, metric, data
};

enum class EdgeType : std::uint8_t {
    calls, generates, derived_from, builds, documents, depends_on, emits_metric, dynamic_call
};

std::string_view to_string(NodeType t) noexcept;
std::string_view to_string(EdgeType t) noexcept;
/// Throws Error{MalformedInput} for anything outside the closed set.
NodeType parse_node_type(std::string_view s);
EdgeType parse_edge_type(std::string_view s);

const std::array<NodeType, kNodeTypeCount>& all_node_types() noexcept;
const std::array<EdgeType, kEdgeTypeCount>& all_edge_types() noexcept;

using AttributeValue = std::variant<double, std::string>;
using Attributes = std::map<std::string, AttributeValue, std::less<>>;

/// Numeric attribute lookup; `fallback` when absent or not numeric.
double numeric_attr(const Attributes& attrs, std::string_view key, double fallback = 0.0);
std::string string_attr(const Attributes& attrs, std::string_view key, std::string fallback = {});

struct ArtefactNode {
    std::string id;
    NodeType type = NodeType::code;
    Eigen::VectorXd embedding;
    Attributes attributes;
    bool locked = false;
    // Operator-model weights carried by compiler/policy nodes; empty otherwise.
    Eigen::MatrixXd tensor;

    friend bool operator==(const ArtefactNode& a, const ArtefactNode& b);
};

struct Edge {
    std::string src;
    std::string dst;
    EdgeType kind = EdgeType::calls;

    friend auto operator<=>(const Edge& a, const Edge& b) {
        return std::tie(a.src, a.dst, a.kind) <=> std::tie(b.src, b.dst, b.kind);
    }
    friend bool operator==(const Edge&, const Edge&) = default;
};

struct LineageRecord {
    int generation = 0;
    std::string op;
    bool accepted = false;
    std::map<std::string, double, std::less<>> params;

    friend bool operator==(const LineageRecord&, const LineageRecord&) = default;
};

/// Typed directed artefact graph. A value type: copies are independent and
/// the free functions below never modify their inputs.
class ArtefactGraph {
public:
    using NodeMap = std::map<std::string, ArtefactNode, std::less<>>;

    explicit ArtefactGraph(int dim = kDefaultEmbeddingDim);

    int dim() const noexcept { return dim_; }
    const NodeMap& nodes() const noexcept { return nodes_; }
    const std::set<Edge>& edges() const noexcept { return edges_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    bool contains(std::string_view id) const { return nodes_.find(id) != nodes_.end(); }
    const ArtefactNode& node(std::string_view id) const;
    const ArtefactNode* find(std::string_view id) const;

    std::vector<const ArtefactNode*> nodes_of_type(NodeType t) const;
    std::vector<Edge> edges_of_kind(EdgeType k) const;

    // In-place builders for code that owns its copy; validation matches the
    // free functions.
    void insert_node(ArtefactNode node);
    void insert_edge(Edge edge);
    void erase_node(std::string_view id);
    void erase_edge(const Edge& edge);
    void replace_node(ArtefactNode node);
    ArtefactNode& mutable_node(std::string_view id);

    std::string id;
    int generation_born = 0;
    Attributes attributes;
    std::vector<LineageRecord> lineage;

    friend bool operator==(const ArtefactGraph& a, const ArtefactGraph& b);

private:
    int dim_;
    NodeMap nodes_;
    std::set<Edge> edges_;
};

[[nodiscard]] ArtefactGraph add_node(const ArtefactGraph& graph, ArtefactNode node);
[[nodiscard]] ArtefactGraph add_edge(const ArtefactGraph& graph, std::string src, std::string dst,
                                     EdgeType kind);

/// Node-type histogram (normalized) followed by (latency_norm, repro).
using BehaviorDescriptor = Eigen::Matrix<double, kDescriptorSize, 1>;

namespace attr {
inline constexpr std::string_view latency_norm = "latency_norm";
inline constexpr std::string_view repro = "repro";
}  // namespace attr

BehaviorDescriptor descriptor(const ArtefactGraph& graph);

struct GraphHeader {
    std::string id;
    int dim = kDefaultEmbeddingDim;
    int generation_born = 0;
    Attributes attributes;
    std::vector<LineageRecord> lineage;

    friend bool operator==(const GraphHeader&, const GraphHeader&) = default;
};

struct GraphDelta {
    std::vector<ArtefactNode> nodes_added;
    std::vector<std::string> nodes_removed;
    std::vector<ArtefactNode> nodes_changed;  // new values
    std::vector<Edge> edges_added;
    std::vector<Edge> edges_removed;
    std::optional<GraphHeader> header;  // set when any graph-level field differs

    bool empty() const noexcept {
        return nodes_added.empty() && nodes_removed.empty() && nodes_changed.empty() &&
               edges_added.empty() && edges_removed.empty() && !header;
    }
};

GraphDelta diff(const ArtefactGraph& a, const ArtefactGraph& b);
[[nodiscard]] ArtefactGraph apply(const GraphDelta& delta, const ArtefactGraph& a);

/// Hash of nodes and edges only (not id, lineage or graph attributes).
std::uint64_t structural_hash(const ArtefactGraph& graph);
std::uint64_t node_hash(const ArtefactNode& node);

}  // namespace evograph
