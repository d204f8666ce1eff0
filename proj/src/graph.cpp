#include "evograph/graph.hpp"

#include "evograph/error.hpp"
#include "evograph/hashing.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace evograph {

namespace {

constexpr std::array<std::string_view, kNodeTypeCount> kNodeTypeNames = {
    "code", "doc", "build", "compiler", "test", "schema",
    "policy", "ticket", "ui", "log", "metric", "data"};

constexpr std::array<std::string_view, kEdgeTypeCount> kEdgeTypeNames = {
    "calls", "generates", "derived_from", "builds",
    "documents", "depends_on", "emits_metric", "dynamic_call"};

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.size() == b.size() && (a.size() == 0 || a == b);
}

void check_node(const ArtefactNode& node, int dim) {
    if (node.embedding.size() != dim) {
        throw Error(Errc::EmbeddingDimensionMismatch,
                    fmt::format("node '{}' has embedding length {}, graph dimension is {}", node.id,
                                node.embedding.size(), dim));
    }
}

void check_edge(const ArtefactGraph& g, const Edge& e) {
    if (!g.contains(e.src) || !g.contains(e.dst)) {
        throw Error(Errc::UnknownEndpoint,
                    fmt::format("edge {} -> {} ({}) references a missing node", e.src, e.dst,
                                to_string(e.kind)));
    }
    if (e.src == e.dst && e.kind != EdgeType::depends_on) {
        throw Error(Errc::IllegalSelfLoop,
                    fmt::format("self-loop on '{}' with kind {}", e.src, to_string(e.kind)));
    }
}

}  // namespace

std::string_view to_string(NodeType t) noexcept { return kNodeTypeNames[static_cast<std::size_t>(t)]; }
std::string_view to_string(EdgeType t) noexcept { return kEdgeTypeNames[static_cast<std::size_t>(t)]; }

NodeType parse_node_type(std::string_view s) {
    for (std::size_t i = 0; i < kNodeTypeNames.size(); ++i)
        if (kNodeTypeNames[i] == s) return static_cast<NodeType>(i);
    throw Error(Errc::MalformedInput, fmt::format("unknown node type '{}'", s));
}

EdgeType parse_edge_type(std::string_view s) {
    for (std::size_t i = 0; i < kEdgeTypeNames.size(); ++i)
        if (kEdgeTypeNames[i] == s) return static_cast<EdgeType>(i);
    throw Error(Errc::MalformedInput, fmt::format("unknown edge kind '{}'", s));
}

const std::array<NodeType, kNodeTypeCount>& all_node_types() noexcept {
    static constexpr std::array<NodeType, kNodeTypeCount> types = {
        NodeType::code,   NodeType::doc,    NodeType::build,  NodeType::compiler,
        NodeType::test,   NodeType::schema, NodeType::policy, NodeType::ticket,
        NodeType::ui,     NodeType::log,    NodeType::metric, NodeType::data};
    return types;
}

const std::array<EdgeType, kEdgeTypeCount>& all_edge_types() noexcept {
    static constexpr std::array<EdgeType, kEdgeTypeCount> kinds = {
        EdgeType::calls,     EdgeType::generates,  EdgeType::derived_from, EdgeType::builds,
        EdgeType::documents, EdgeType::depends_on, EdgeType::emits_metric, EdgeType::dynamic_call};
    return kinds;
}

double numeric_attr(const Attributes& attrs, std::string_view key, double fallback) {
    auto it = attrs.find(key);
    if (it == attrs.end()) return fallback;
    if (const auto* v = std::get_if<double>(&it->second)) return *v;
    return fallback;
}

std::string string_attr(const Attributes& attrs, std::string_view key, std::string fallback) {
    auto it = attrs.find(key);
    if (it == attrs.end()) return fallback;
    if (const auto* v = std::get_if<std::string>(&it->second)) return *v;
    return fallback;
}

bool operator==(const ArtefactNode& a, const ArtefactNode& b) {
    return a.id == b.id && a.type == b.type && a.locked == b.locked &&
           a.attributes == b.attributes && same_vector(a.embedding, b.embedding) &&
           same_matrix(a.tensor, b.tensor);
}

ArtefactGraph::ArtefactGraph(int dim) : dim_(dim) {}

const ArtefactNode& ArtefactGraph::node(std::string_view id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(Errc::UnknownNode, fmt::format("no node '{}'", id));
    return it->second;
}

const ArtefactNode* ArtefactGraph::find(std::string_view id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

std::vector<const ArtefactNode*> ArtefactGraph::nodes_of_type(NodeType t) const {
    std::vector<const ArtefactNode*> out;
    for (const auto& [id, n] : nodes_)
        if (n.type == t) out.push_back(&n);
    return out;
}

std::vector<Edge> ArtefactGraph::edges_of_kind(EdgeType k) const {
    std::vector<Edge> out;
    for (const auto& e : edges_)
        if (e.kind == k) out.push_back(e);
    return out;
}

void ArtefactGraph::insert_node(ArtefactNode node) {
    if (contains(node.id)) throw Error(Errc::DuplicateId, fmt::format("node '{}' already present", node.id));
    check_node(node, dim_);
    auto key = node.id;
    nodes_.emplace(std::move(key), std::move(node));
}

void ArtefactGraph::insert_edge(Edge edge) {
    check_edge(*this, edge);
    edges_.insert(std::move(edge));
}

void ArtefactGraph::erase_node(std::string_view id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(Errc::UnknownNode, fmt::format("no node '{}'", id));
    std::erase_if(edges_, [&](const Edge& e) { return e.src == id || e.dst == id; });
    nodes_.erase(it);
}

void ArtefactGraph::erase_edge(const Edge& edge) { edges_.erase(edge); }

void ArtefactGraph::replace_node(ArtefactNode node) {
    check_node(node, dim_);
    auto it = nodes_.find(node.id);
    if (it == nodes_.end()) throw Error(Errc::UnknownNode, fmt::format("no node '{}'", node.id));
    it->second = std::move(node);
}

ArtefactNode& ArtefactGraph::mutable_node(std::string_view id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw Error(Errc::UnknownNode, fmt::format("no node '{}'", id));
    return it->second;
}

bool operator==(const ArtefactGraph& a, const ArtefactGraph& b) {
    return a.dim_ == b.dim_ && a.id == b.id && a.generation_born == b.generation_born &&
           a.attributes == b.attributes && a.lineage == b.lineage && a.nodes_ == b.nodes_ &&
           a.edges_ == b.edges_;
}

ArtefactGraph add_node(const ArtefactGraph& graph, ArtefactNode node) {
    ArtefactGraph out = graph;
    out.insert_node(std::move(node));
    return out;
}

ArtefactGraph add_edge(const ArtefactGraph& graph, std::string src, std::string dst, EdgeType kind) {
    ArtefactGraph out = graph;
    out.insert_edge(Edge{std::move(src), std::move(dst), kind});
    return out;
}

BehaviorDescriptor descriptor(const ArtefactGraph& graph) {
    BehaviorDescriptor d = BehaviorDescriptor::Zero();
    if (graph.node_count() > 0) {
        for (const auto& [id, n] : graph.nodes()) d[static_cast<Eigen::Index>(n.type)] += 1.0;
        d.head<kNodeTypeCount>() /= static_cast<double>(graph.node_count());
    }
    d[kNodeTypeCount] = numeric_attr(graph.attributes, attr::latency_norm, 0.0);
    d[kNodeTypeCount + 1] = numeric_attr(graph.attributes, attr::repro, 0.0);
    return d;
}

GraphDelta diff(const ArtefactGraph& a, const ArtefactGraph& b) {
    GraphDelta d;
    for (const auto& [id, nb] : b.nodes()) {
        const ArtefactNode* na = a.find(id);
        if (!na) d.nodes_added.push_back(nb);
        else if (!(*na == nb)) d.nodes_changed.push_back(nb);
    }
    for (const auto& [id, na] : a.nodes())
        if (!b.contains(id)) d.nodes_removed.push_back(id);
    std::set_difference(b.edges().begin(), b.edges().end(), a.edges().begin(), a.edges().end(),
                        std::back_inserter(d.edges_added));
    std::set_difference(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end(),
                        std::back_inserter(d.edges_removed));
    if (a.id != b.id || a.dim() != b.dim() || a.generation_born != b.generation_born ||
        a.attributes != b.attributes || a.lineage != b.lineage) {
        d.header = GraphHeader{b.id, b.dim(), b.generation_born, b.attributes, b.lineage};
    }
    return d;
}

ArtefactGraph apply(const GraphDelta& delta, const ArtefactGraph& a) {
    ArtefactGraph out(delta.header ? delta.header->dim : a.dim());
    if (delta.header) {
        out.id = delta.header->id;
        out.generation_born = delta.header->generation_born;
        out.attributes = delta.header->attributes;
        out.lineage = delta.header->lineage;
    } else {
        out.id = a.id;
        out.generation_born = a.generation_born;
        out.attributes = a.attributes;
        out.lineage = a.lineage;
    }
    std::set<std::string, std::less<>> removed(delta.nodes_removed.begin(), delta.nodes_removed.end());
    std::map<std::string, const ArtefactNode*, std::less<>> changed;
    for (const auto& n : delta.nodes_changed) changed.emplace(n.id, &n);
    for (const auto& [id, n] : a.nodes()) {
        if (removed.contains(id)) continue;
        auto it = changed.find(id);
        out.insert_node(it == changed.end() ? n : *it->second);
    }
    for (const auto& n : delta.nodes_added) out.insert_node(n);

    std::set<Edge> edges_removed(delta.edges_removed.begin(), delta.edges_removed.end());
    for (const auto& e : a.edges())
        if (!edges_removed.contains(e) && out.contains(e.src) && out.contains(e.dst)) out.insert_edge(e);
    for (const auto& e : delta.edges_added) out.insert_edge(e);
    return out;
}

std::uint64_t node_hash(const ArtefactNode& node) {
    Fnv1a h;
    h.str(node.id).u64(static_cast<std::uint64_t>(node.type)).u64(node.locked ? 1 : 0);
    for (const auto& [key, value] : node.attributes) {
        h.str(key);
        if (const auto* d = std::get_if<double>(&value)) h.u64(0).f64(*d);
        else h.u64(1).str(std::get<std::string>(value));
    }
    h.u64(static_cast<std::uint64_t>(node.embedding.size()));
    for (Eigen::Index i = 0; i < node.embedding.size(); ++i) h.f64(node.embedding[i]);
    h.u64(static_cast<std::uint64_t>(node.tensor.rows())).u64(static_cast<std::uint64_t>(node.tensor.cols()));
    for (Eigen::Index i = 0; i < node.tensor.size(); ++i) h.f64(node.tensor.data()[i]);
    return h.value();
}

std::uint64_t structural_hash(const ArtefactGraph& graph) {
    Fnv1a h;
    h.u64(static_cast<std::uint64_t>(graph.dim()));
    for (const auto& [id, n] : graph.nodes()) h.u64(node_hash(n));
    for (const auto& e : graph.edges()) h.str(e.src).str(e.dst).u64(static_cast<std::uint64_t>(e.kind));
    return h.value();
}

}  // namespace evograph
