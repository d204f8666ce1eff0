#pragma once

#include "evograph/environment.hpp"
#include "evograph/graph.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evograph {

enum class OperatorKind : std::uint8_t { WM, CP, DS, BW, TR };
inline constexpr std::size_t kOperatorKindCount = 5;
inline constexpr std::array<OperatorKind, kOperatorKindCount> kAllOperatorKinds = {
    OperatorKind::WM, OperatorKind::CP, OperatorKind::DS, OperatorKind::BW, OperatorKind::TR};

std::string_view to_string(OperatorKind kind) noexcept;
OperatorKind parse_operator_kind(std::string_view s);

struct OperatorConfig {
    std::array<bool, kOperatorKindCount> enabled = {true, true, true, true, true};
    double mutation_rate = 0.3;
    double alpha = 2.0;  // Beta(alpha, alpha) concentration for weight merge
    Eigen::Vector4d theta = Eigen::Vector4d(-2.0, 4.0, 0.5, 1.0);
    double tau_d = 0.8;
    int rebuilds = 4;
    double transmute_threshold = 0.93;
    int transmute_max_iters = 10;
    std::optional<double> forced_lambda;  // test hook for weight merge endpoints

    bool is_enabled(OperatorKind kind) const noexcept { return enabled[static_cast<std::size_t>(kind)]; }
};

struct OutcomeRecord {
    OperatorKind kind = OperatorKind::CP;
    std::string target;  // primary node touched, empty when none
    double acceptance_probability = 0.0;
    std::map<std::string, double, std::less<>> params;

    friend bool operator==(const OutcomeRecord&, const OutcomeRecord&) = default;
};

struct MutationOutcome {
    bool accepted = false;
    ArtefactGraph graph;  // the input graph when rejected
    OutcomeRecord record;
};

class MutationOperator {
public:
    virtual ~MutationOperator() = default;
    virtual OperatorKind kind() const noexcept = 0;
    /// Whether the operator's precondition holds on `graph`.
    virtual bool applicable(const ArtefactGraph& graph) const = 0;
    /// Deterministic in (graph, seed, environment state).
    virtual MutationOutcome apply(const ArtefactGraph& graph, std::uint64_t seed, const Environment& env) const = 0;
};

std::unique_ptr<MutationOperator> make_operator(OperatorKind kind, const OperatorConfig& config);

/// sigma(theta . [1, compile_ok, static_delta, -size_penalty]).
double patch_acceptance(const PatchFeatures& features, const Eigen::Vector4d& theta);

struct TransmuteTrace {
    std::vector<double> pass_rates;  // p0, p1, ...
    bool reached = false;
    int iterations = 0;
};

/// Iterates p <- p + (1 - p) * rho until p >= threshold or max_iters is spent.
/// Throws NonPositiveImprovement when rho <= 0 and p0 < threshold.
TransmuteTrace run_transmute_loop(double p0, double rho, double threshold, int max_iters);

struct OpsDraw {
    std::vector<OperatorKind> kinds;
    // Inclusion mask of the first Bernoulli round, before any resampling.
    std::array<bool, kOperatorKindCount> first_round{};
    int rounds = 0;
};

/// Each enabled kind is included independently with probability
/// mutation_rate; an empty draw is resampled. Throws AllOperatorsDisabled.
OpsDraw sample_ops_draw(std::uint64_t seed, const OperatorConfig& config);
std::vector<OperatorKind> sample_ops(std::uint64_t seed, const OperatorConfig& config);

namespace attr {
inline constexpr std::string_view text = "text";
inline constexpr std::string_view quality = "quality";
inline constexpr std::string_view perf = "perf";
inline constexpr std::string_view security = "security";
inline constexpr std::string_view behavior = "behavior";
inline constexpr std::string_view contract_ok = "contract_ok";
inline constexpr std::string_view legacy = "legacy";
inline constexpr std::string_view lang = "lang";
inline constexpr std::string_view hermetic = "hermetic";
inline constexpr std::string_view pinned = "pinned";
inline constexpr std::string_view merges = "merges";
}  // namespace attr

/// Doc/code pairs joined by a `documents` edge (doc -> code).
std::vector<Edge> doc_pairs(const ArtefactGraph& graph);

/// Freshness of a doc node against the template of the code it documents.
double doc_freshness(const ArtefactNode& doc, const ArtefactNode& code, const Environment& env);

}  // namespace evograph
