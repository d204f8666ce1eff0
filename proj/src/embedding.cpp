#include "evograph/embedding.hpp"

#include "evograph/hashing.hpp"
#include "evograph/metrics.hpp"

namespace evograph {

namespace {

Eigen::VectorXd hash_to_vector(std::uint64_t h, int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = 2.0 * unit_interval(derive_seed(h, i)) - 1.0;
    return v;
}

}  // namespace

Eigen::VectorXd pseudo_embedding(const std::string& id, const Attributes& attributes, int dim,
                                 std::uint64_t seed) {
    Fnv1a h;
    h.u64(seed).str(id);
    for (const auto& [key, value] : attributes) {
        h.str(key);
        if (const auto* d = std::get_if<double>(&value)) h.f64(*d);
        else h.str(std::get<std::string>(value));
    }
    return hash_to_vector(mix64(h.value()), dim);
}

Eigen::VectorXd pooled_text_embedding(std::span<const std::string> tokens, int dim,
                                      std::size_t chunk_tokens, std::uint64_t seed) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
    if (tokens.empty() || chunk_tokens == 0) return sum;
    std::size_t chunks = 0;
    for (std::size_t start = 0; start < tokens.size(); start += chunk_tokens, ++chunks) {
        Fnv1a h;
        h.u64(seed);
        const auto end = std::min(tokens.size(), start + chunk_tokens);
        for (auto i = start; i < end; ++i) h.str(tokens[i]);
        sum += hash_to_vector(mix64(h.value()), dim);
    }
    return sum / static_cast<double>(chunks);
}

void refresh_embedding(ArtefactNode& node, int dim) {
    if (node.type == NodeType::doc) {
        const auto tokens = tokenize(string_attr(node.attributes, "text"));
        node.embedding = pooled_text_embedding(tokens, dim);
    } else {
        node.embedding = pseudo_embedding(node.id, node.attributes, dim);
    }
}

}  // namespace evograph
