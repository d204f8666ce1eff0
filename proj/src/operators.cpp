#include "evograph/operators.hpp"

#include "evograph/embedding.hpp"
#include "evograph/error.hpp"
#include "evograph/hashing.hpp"
#include "evograph/merge.hpp"
#include "evograph/metrics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

namespace evograph {

namespace {

constexpr std::array<std::string_view, kOperatorKindCount> kKindNames = {"WM", "CP", "DS", "BW", "TR"};

std::size_t pick_index(std::uint64_t seed, std::size_t n) {
    return static_cast<std::size_t>(unit_interval(mix64(seed)) * static_cast<double>(n));
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

MutationOutcome rejected(const ArtefactGraph& graph, OutcomeRecord record) {
    return MutationOutcome{false, graph, std::move(record)};
}

// ---------------------------------------------------------------------------

class WeightMergeOperator final : public MutationOperator {
public:
    explicit WeightMergeOperator(const OperatorConfig& config) : config_(config) {}

    OperatorKind kind() const noexcept override { return OperatorKind::WM; }

    bool applicable(const ArtefactGraph& graph) const override { return !candidates(graph).empty(); }

    MutationOutcome apply(const ArtefactGraph& graph, std::uint64_t seed, const Environment& env) const override {
        const auto pairs = candidates(graph);
        if (pairs.empty()) throw Error(Errc::NoMergePairs, "no two compiler/policy tensors share a shape");
        const auto& [a_id, partners] = pairs[pick_index(derive_seed(seed, 1), pairs.size())];
        const auto& b_id = partners[pick_index(derive_seed(seed, 2), partners.size())];
        const auto& a = graph.node(a_id);
        const auto& b = graph.node(b_id);

        const auto merged = config_.forced_lambda
                                ? weight_merge_with_lambda(a.tensor, b.tensor, *config_.forced_lambda)
                                : weight_merge(a.tensor, b.tensor, config_.alpha, derive_seed(seed, 3));
        const double q_old = env.model_quality(a.tensor);
        const double q_new = env.model_quality(merged.tensor);

        OutcomeRecord record{OperatorKind::WM, a_id, q_new >= q_old ? 1.0 : 0.0,
                             {{"lambda", merged.lambda}, {"quality_before", q_old}, {"quality_after", q_new}}};
        if (q_new < q_old) return rejected(graph, std::move(record));

        ArtefactGraph out = graph;
        auto& node = out.mutable_node(a_id);
        node.tensor = merged.tensor;
        node.attributes[std::string(attr::merges)] = numeric_attr(node.attributes, attr::merges) + 1.0;
        refresh_embedding(node, out.dim());
        return MutationOutcome{true, std::move(out), std::move(record)};
    }

private:
    // Nodes with at least one same-type, same-shape tensor partner.
    static std::vector<std::pair<std::string, std::vector<std::string>>> candidates(const ArtefactGraph& graph) {
        std::vector<const ArtefactNode*> tensors;
        for (const auto& [id, n] : graph.nodes())
            if ((n.type == NodeType::compiler || n.type == NodeType::policy) && n.tensor.size() > 0)
                tensors.push_back(&n);
        std::vector<std::pair<std::string, std::vector<std::string>>> out;
        for (const auto* a : tensors) {
            std::vector<std::string> partners;
            for (const auto* b : tensors)
                if (a != b && a->type == b->type && a->tensor.rows() == b->tensor.rows() &&
                    a->tensor.cols() == b->tensor.cols())
                    partners.push_back(b->id);
            if (!partners.empty()) out.emplace_back(a->id, std::move(partners));
        }
        return out;
    }

    OperatorConfig config_;
};

// ---------------------------------------------------------------------------

class CodePatchOperator final : public MutationOperator {
public:
    explicit CodePatchOperator(const OperatorConfig& config) : config_(config) {}

    OperatorKind kind() const noexcept override { return OperatorKind::CP; }

    bool applicable(const ArtefactGraph& graph) const override {
        return !graph.nodes_of_type(NodeType::code).empty();
    }

    MutationOutcome apply(const ArtefactGraph& graph, std::uint64_t seed, const Environment& env) const override {
        const auto code = graph.nodes_of_type(NodeType::code);
        if (code.empty()) throw Error(Errc::NoCodeNodes, "code patch needs at least one code node");
        const auto& target = code[pick_index(derive_seed(seed, 1), code.size())]->id;

        const auto proposal = env.propose_patch(graph, target, derive_seed(seed, 2));
        const double p = patch_acceptance(proposal.features, config_.theta);
        const bool accept = unit_interval(derive_seed(seed, 3)) < p;

        OutcomeRecord record{OperatorKind::CP, target, p,
                             {{"compile_ok", proposal.features.compile_ok},
                              {"static_delta", proposal.features.static_delta},
                              {"size_penalty", proposal.features.size_penalty}}};
        if (!accept) return rejected(graph, std::move(record));

        ArtefactGraph out = graph;
        auto& node = out.mutable_node(target);
        node.attributes = proposal.attributes;
        refresh_embedding(node, out.dim());
        return MutationOutcome{true, std::move(out), std::move(record)};
    }

private:
    OperatorConfig config_;
};

// ---------------------------------------------------------------------------

class DocSyncOperator final : public MutationOperator {
public:
    explicit DocSyncOperator(const OperatorConfig& config) : config_(config) {}

    OperatorKind kind() const noexcept override { return OperatorKind::DS; }

    bool applicable(const ArtefactGraph& graph) const override { return !doc_pairs(graph).empty(); }

    MutationOutcome apply(const ArtefactGraph& graph, std::uint64_t /*seed*/, const Environment& env) const override {
        const auto pairs = doc_pairs(graph);
        if (pairs.empty()) throw Error(Errc::NoDocPairs, "doc sync needs a doc node documenting a code node");

        // Regenerate the stalest doc; pairs come sorted, so ties go to the
        // first pair.
        const Edge* stalest = nullptr;
        double worst = 2.0;
        for (const auto& e : pairs) {
            const double f = doc_freshness(graph.node(e.src), graph.node(e.dst), env);
            if (f < worst) {
                worst = f;
                stalest = &e;
            }
        }
        const auto tokens = env.doc_template(graph.node(stalest->dst));
        const auto embedding = pooled_text_embedding(tokens, graph.dim());
        const double fresh = freshness(tokens, tokens, embedding, embedding);
        const bool accept = fresh >= config_.tau_d && fresh >= worst;

        OutcomeRecord record{OperatorKind::DS, stalest->src, accept ? 1.0 : 0.0,
                             {{"freshness_before", worst}, {"freshness_after", fresh}}};
        if (!accept) return rejected(graph, std::move(record));

        ArtefactGraph out = graph;
        auto& doc = out.mutable_node(stalest->src);
        doc.attributes[std::string(attr::text)] = join_tokens(tokens);
        doc.embedding = embedding;
        return MutationOutcome{true, std::move(out), std::move(record)};
    }

private:
    OperatorConfig config_;
};

// ---------------------------------------------------------------------------

class BuildWeaveOperator final : public MutationOperator {
public:
    explicit BuildWeaveOperator(const OperatorConfig& config) : config_(config) {}

    OperatorKind kind() const noexcept override { return OperatorKind::BW; }

    bool applicable(const ArtefactGraph& graph) const override {
        return !graph.nodes_of_type(NodeType::build).empty();
    }

    MutationOutcome apply(const ArtefactGraph& graph, std::uint64_t seed, const Environment& env) const override {
        const auto builds = graph.nodes_of_type(NodeType::build);
        if (builds.empty()) throw Error(Errc::NoBuildNodes, "build weave needs at least one build node");
        const auto& target = builds[pick_index(derive_seed(seed, 1), builds.size())]->id;
        const auto action = pick_index(derive_seed(seed, 2), 3);

        ArtefactGraph out = graph;
        auto& node = out.mutable_node(target);
        if (action == 0 || action == 1) {
            const auto key = std::string(action == 0 ? attr::hermetic : attr::pinned);
            node.attributes[key] = numeric_attr(node.attributes, key) >= 0.5 ? 0.0 : 1.0;
            refresh_embedding(node, out.dim());
        } else {
            std::string dep_id;
            for (std::uint64_t salt = 0; dep_id.empty() || out.contains(dep_id); ++salt)
                dep_id = fmt::format("dep-{:08x}", derive_seed(seed, 4, salt) & 0xffffffffULL);
            ArtefactNode dep;
            dep.id = dep_id;
            dep.type = NodeType::data;
            dep.attributes.emplace("version", static_cast<double>(pick_index(derive_seed(seed, 5), 9) + 1));
            refresh_embedding(dep, out.dim());
            out.insert_node(std::move(dep));
            out.insert_edge(Edge{target, dep_id, EdgeType::depends_on});
        }

        const auto hashes = env.rebuild(out, config_.rebuilds);
        const double repro = reproducibility(hashes);
        const double previous = numeric_attr(graph.attributes, attr::repro, 0.0);
        OutcomeRecord record{OperatorKind::BW, target, repro >= previous ? 1.0 : 0.0,
                             {{"action", static_cast<double>(action)}, {"repro_before", previous}, {"repro", repro}}};
        if (repro < previous) return rejected(graph, std::move(record));
        out.attributes[std::string(attr::repro)] = repro;
        return MutationOutcome{true, std::move(out), std::move(record)};
    }

private:
    OperatorConfig config_;
};

// ---------------------------------------------------------------------------

class TransmuteOperator final : public MutationOperator {
public:
    explicit TransmuteOperator(const OperatorConfig& config) : config_(config) {}

    OperatorKind kind() const noexcept override { return OperatorKind::TR; }

    bool applicable(const ArtefactGraph& graph) const override { return !legacy_nodes(graph).empty(); }

    MutationOutcome apply(const ArtefactGraph& graph, std::uint64_t seed, const Environment& env) const override {
        const auto legacy = legacy_nodes(graph);
        if (legacy.empty()) throw Error(Errc::NoLegacyNodes, "transmute needs a code node tagged legacy");
        const auto& source = *legacy[pick_index(derive_seed(seed, 1), legacy.size())];

        // parse -> draft -> test-gen -> iterate; the environment stands in for
        // the first three steps through (p0, rho).
        const auto params = env.transmute_params(source);
        const auto trace = run_transmute_loop(params.initial_pass_rate, params.improvement,
                                              config_.transmute_threshold, config_.transmute_max_iters);
        OutcomeRecord record{OperatorKind::TR, source.id, trace.reached ? 1.0 : 0.0,
                             {{"p0", params.initial_pass_rate},
                              {"rho", params.improvement},
                              {"iterations", static_cast<double>(trace.iterations)},
                              {"pass_rate", trace.pass_rates.back()}}};
        if (!trace.reached) return rejected(graph, std::move(record));

        ArtefactGraph out = graph;
        auto& node = out.mutable_node(source.id);
        node.attributes[std::string(attr::legacy)] = 0.0;
        node.attributes[std::string(attr::lang)] = std::string("java");
        node.attributes[std::string(attr::security)] =
            std::min(1.0, numeric_attr(node.attributes, attr::security) + 0.05);
        node.attributes["equivalence"] = trace.pass_rates.back();
        refresh_embedding(node, out.dim());

        const auto test_id = "tests-" + source.id;
        if (!out.contains(test_id)) {
            ArtefactNode tests;
            tests.id = test_id;
            tests.type = NodeType::test;
            tests.attributes.emplace("pass_rate", trace.pass_rates.back());
            refresh_embedding(tests, out.dim());
            out.insert_node(std::move(tests));
            out.insert_edge(Edge{test_id, source.id, EdgeType::derived_from});
        }
        return MutationOutcome{true, std::move(out), std::move(record)};
    }

private:
    static std::vector<const ArtefactNode*> legacy_nodes(const ArtefactGraph& graph) {
        std::vector<const ArtefactNode*> out;
        for (const auto* n : graph.nodes_of_type(NodeType::code))
            if (numeric_attr(n->attributes, attr::legacy) >= 0.5) out.push_back(n);
        return out;
    }

    OperatorConfig config_;
};

}  // namespace

std::string_view to_string(OperatorKind kind) noexcept { return kKindNames[static_cast<std::size_t>(kind)]; }

OperatorKind parse_operator_kind(std::string_view s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == s) return static_cast<OperatorKind>(i);
    throw Error(Errc::InvalidConfig, fmt::format("unknown operator kind '{}'", s));
}

std::unique_ptr<MutationOperator> make_operator(OperatorKind kind, const OperatorConfig& config) {
    switch (kind) {
        case OperatorKind::WM: return std::make_unique<WeightMergeOperator>(config);
        case OperatorKind::CP: return std::make_unique<CodePatchOperator>(config);
        case OperatorKind::DS: return std::make_unique<DocSyncOperator>(config);
        case OperatorKind::BW: return std::make_unique<BuildWeaveOperator>(config);
        case OperatorKind::TR: return std::make_unique<TransmuteOperator>(config);
    }
    throw Error(Errc::InvalidConfig, "unknown operator kind");
}

double patch_acceptance(const PatchFeatures& features, const Eigen::Vector4d& theta) {
    const Eigen::Vector4d x(1.0, features.compile_ok, features.static_delta, -features.size_penalty);
    return 1.0 / (1.0 + std::exp(-theta.dot(x)));
}

TransmuteTrace run_transmute_loop(double p0, double rho, double threshold, int max_iters) {
    TransmuteTrace trace;
    trace.pass_rates.push_back(p0);
    if (p0 >= threshold) {
        trace.reached = true;
        return trace;
    }
    if (rho <= 0.0)
        throw Error(Errc::NonPositiveImprovement,
                    fmt::format("improvement factor {} cannot lift pass rate {} to {}", rho, p0, threshold));
    double p = p0;
    while (trace.iterations < max_iters) {
        p = std::min(1.0, p + (1.0 - p) * rho);
        trace.pass_rates.push_back(p);
        ++trace.iterations;
        if (p >= threshold) {
            trace.reached = true;
            break;
        }
    }
    return trace;
}

OpsDraw sample_ops_draw(std::uint64_t seed, const OperatorConfig& config) {
    std::vector<OperatorKind> enabled;
    for (auto k : kAllOperatorKinds)
        if (config.is_enabled(k)) enabled.push_back(k);
    if (enabled.empty()) throw Error(Errc::AllOperatorsDisabled, "every mutation operator is disabled");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    OpsDraw draw;
    constexpr int kMaxRounds = 1000;
    while (draw.kinds.empty() && draw.rounds < kMaxRounds) {
        for (auto k : enabled) {
            const bool in = unit(rng) < config.mutation_rate;
            if (draw.rounds == 0) draw.first_round[static_cast<std::size_t>(k)] = in;
            if (in) draw.kinds.push_back(k);
        }
        ++draw.rounds;
    }
    if (draw.kinds.empty()) draw.kinds.push_back(enabled[pick_index(rng(), enabled.size())]);
    return draw;
}

std::vector<OperatorKind> sample_ops(std::uint64_t seed, const OperatorConfig& config) {
    return sample_ops_draw(seed, config).kinds;
}

std::vector<Edge> doc_pairs(const ArtefactGraph& graph) {
    std::vector<Edge> out;
    for (const auto& e : graph.edges()) {
        if (e.kind != EdgeType::documents) continue;
        const auto* src = graph.find(e.src);
        const auto* dst = graph.find(e.dst);
        if (src && dst && src->type == NodeType::doc && dst->type == NodeType::code) out.push_back(e);
    }
    return out;
}

double doc_freshness(const ArtefactNode& doc, const ArtefactNode& code, const Environment& env) {
    const auto reference = env.doc_template(code);
    const auto candidate = tokenize(string_attr(doc.attributes, attr::text));
    return freshness(reference, candidate, pooled_text_embedding(reference, static_cast<int>(doc.embedding.size())),
                     doc.embedding);
}

}  // namespace evograph
