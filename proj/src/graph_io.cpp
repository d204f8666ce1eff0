#include "evograph/graph_io.hpp"

#include "evograph/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace evograph {

using nlohmann::json;

namespace {

json attributes_to_json(const Attributes& attrs) {
    json out = json::object();
    for (const auto& [key, value] : attrs) {
        if (const auto* d = std::get_if<double>(&value)) out[key] = *d;
        else out[key] = std::get<std::string>(value);
    }
    return out;
}

json lineage_to_json(const std::vector<LineageRecord>& lineage) {
    json out = json::array();
    for (const auto& r : lineage) {
        json params = json::object();
        for (const auto& [k, v] : r.params) params[k] = v;
        out.push_back({{"generation", r.generation}, {"op", r.op}, {"accepted", r.accepted}, {"params", params}});
    }
    return out;
}

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
    throw Error(Errc::MalformedInput, fmt::format("{}: {}", where, what));
}

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) malformed(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) malformed(where, fmt::format("missing field '{}'", key));
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) malformed(where, "expected a number");
    return j.get<double>();
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) malformed(where, "expected a string");
    return j.get<std::string>();
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) malformed(where, "expected an integer");
    return j.get<int>();
}

Attributes attributes_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) malformed(where, "expected an object");
    Attributes out;
    for (const auto& [key, value] : j.items()) {
        if (value.is_number()) out.emplace(key, value.get<double>());
        else if (value.is_string()) out.emplace(key, value.get<std::string>());
        else malformed(where + "." + key, "attribute values must be numbers or strings");
    }
    return out;
}

std::vector<LineageRecord> lineage_from_json(const json& j, const std::string& where) {
    if (!j.is_array()) malformed(where, "expected an array");
    std::vector<LineageRecord> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto at = fmt::format("{}[{}]", where, i);
        LineageRecord r;
        r.generation = integer(field(j[i], "generation", at), at + ".generation");
        r.op = text(field(j[i], "op", at), at + ".op");
        const auto& acc = field(j[i], "accepted", at);
        if (!acc.is_boolean()) malformed(at + ".accepted", "expected a boolean");
        r.accepted = acc.get<bool>();
        const auto& params = field(j[i], "params", at);
        if (!params.is_object()) malformed(at + ".params", "expected an object");
        for (const auto& [k, v] : params.items()) r.params.emplace(k, number(v, at + ".params." + k));
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

std::string serialize(const ArtefactGraph& graph) {
    json nodes = json::array();
    for (const auto& [id, n] : graph.nodes()) {
        json node = {{"id", n.id},
                     {"type", std::string(to_string(n.type))},
                     {"embedding", std::vector<double>(n.embedding.data(), n.embedding.data() + n.embedding.size())},
                     {"attributes", attributes_to_json(n.attributes)},
                     {"locked", n.locked}};
        if (n.tensor.size() > 0) {
            std::vector<double> data;
            data.reserve(static_cast<std::size_t>(n.tensor.size()));
            for (Eigen::Index r = 0; r < n.tensor.rows(); ++r)
                for (Eigen::Index c = 0; c < n.tensor.cols(); ++c) data.push_back(n.tensor(r, c));
            node["tensor"] = {{"rows", n.tensor.rows()}, {"cols", n.tensor.cols()}, {"data", data}};
        }
        nodes.push_back(std::move(node));
    }

    std::vector<const Edge*> sorted;
    for (const auto& e : graph.edges()) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](const Edge* a, const Edge* b) {
        return std::tie(a->src, a->dst) < std::tie(b->src, b->dst) ||
               (std::tie(a->src, a->dst) == std::tie(b->src, b->dst) && to_string(a->kind) < to_string(b->kind));
    });
    json edges = json::array();
    for (const auto* e : sorted)
        edges.push_back({{"src", e->src}, {"dst", e->dst}, {"kind", std::string(to_string(e->kind))}});

    json doc = {{"version", kGraphFormatVersion},
                {"dim", graph.dim()},
                {"id", graph.id},
                {"generation_born", graph.generation_born},
                {"attributes", attributes_to_json(graph.attributes)},
                {"lineage", lineage_to_json(graph.lineage)},
                {"nodes", std::move(nodes)},
                {"edges", std::move(edges)}};
    return doc.dump(1) + "\n";
}

ArtefactGraph deserialize(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        // Translate the byte offset reported by the parser into a line number.
        const auto offset = std::min<std::size_t>(e.byte, bytes.size());
        const auto line = 1 + std::count(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(offset), '\n');
        malformed(fmt::format("line {}", line), e.what());
    }
    const int version = integer(field(doc, "version", "$"), "$.version");
    if (version != kGraphFormatVersion) malformed("$.version", fmt::format("unsupported version {}", version));
    const int dim = integer(field(doc, "dim", "$"), "$.dim");
    if (dim <= 0) malformed("$.dim", "must be positive");

    ArtefactGraph g(dim);
    if (doc.contains("id")) g.id = text(doc["id"], "$.id");
    if (doc.contains("generation_born")) g.generation_born = integer(doc["generation_born"], "$.generation_born");
    if (doc.contains("attributes")) g.attributes = attributes_from_json(doc["attributes"], "$.attributes");
    if (doc.contains("lineage")) g.lineage = lineage_from_json(doc["lineage"], "$.lineage");

    const auto& nodes = field(doc, "nodes", "$");
    if (!nodes.is_array()) malformed("$.nodes", "expected an array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto at = fmt::format("$.nodes[{}]", i);
        const auto& jn = nodes[i];
        ArtefactNode n;
        n.id = text(field(jn, "id", at), at + ".id");
        try {
            n.type = parse_node_type(text(field(jn, "type", at), at + ".type"));
        } catch (const Error& e) {
            if (e.code() != Errc::MalformedInput) throw;
            malformed(at + ".type", e.what());
        }
        const auto& emb = field(jn, "embedding", at);
        if (!emb.is_array()) malformed(at + ".embedding", "expected an array");
        n.embedding.resize(static_cast<Eigen::Index>(emb.size()));
        for (std::size_t k = 0; k < emb.size(); ++k)
            n.embedding[static_cast<Eigen::Index>(k)] = number(emb[k], fmt::format("{}.embedding[{}]", at, k));
        n.attributes = attributes_from_json(field(jn, "attributes", at), at + ".attributes");
        const auto& locked = field(jn, "locked", at);
        if (!locked.is_boolean()) malformed(at + ".locked", "expected a boolean");
        n.locked = locked.get<bool>();
        if (jn.contains("tensor")) {
            const auto& jt = jn["tensor"];
            const int rows = integer(field(jt, "rows", at + ".tensor"), at + ".tensor.rows");
            const int cols = integer(field(jt, "cols", at + ".tensor"), at + ".tensor.cols");
            const auto& data = field(jt, "data", at + ".tensor");
            if (rows < 0 || cols < 0 || !data.is_array() || data.size() != static_cast<std::size_t>(rows) * cols)
                malformed(at + ".tensor", "data length does not match rows*cols");
            n.tensor.resize(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c)
                    n.tensor(r, c) = number(data[static_cast<std::size_t>(r) * cols + c], at + ".tensor.data");
        }
        try {
            g.insert_node(std::move(n));
        } catch (const Error& e) {
            if (e.code() == Errc::MalformedInput) throw;
            malformed(at, e.what());
        }
    }

    const auto& edges = field(doc, "edges", "$");
    if (!edges.is_array()) malformed("$.edges", "expected an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto at = fmt::format("$.edges[{}]", i);
        try {
            Edge e{text(field(edges[i], "src", at), at + ".src"), text(field(edges[i], "dst", at), at + ".dst"),
                   parse_edge_type(text(field(edges[i], "kind", at), at + ".kind"))};
            g.insert_edge(std::move(e));
        } catch (const Error& err) {
            if (err.code() == Errc::MalformedInput) throw;
            malformed(at, err.what());
        }
    }
    return g;
}

ArtefactGraph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::MalformedInput, fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

void save_graph(const ArtefactGraph& graph, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    out << serialize(graph);
}

}  // namespace evograph
