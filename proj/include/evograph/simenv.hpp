#pragma once

#include "evograph/environment.hpp"
#include "evograph/graph.hpp"
#include "evograph/metrics.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evograph {

struct Range {
    double lo = 0.0;
    double hi = 1.0;
    double lerp(double t) const noexcept { return lo + (hi - lo) * t; }
};

/// Shape and latent landscape of a synthetic legacy estate.
struct EstateSpec {
    std::array<int, kNodeTypeCount> counts{};
    // Expected out-degree per source node for each edge kind.
    std::array<double, kEdgeTypeCount> edge_density{};
    Range quality{0.55, 0.9};
    Range perf{0.2, 0.5};
    Range security{0.8, 0.95};
    double legacy_fraction = 0.25;
    double stale_doc_fraction = 0.2;
    double hermetic_fraction = 0.5;
    int probe_count = 40;
    int probe_span = 2;  // code nodes observed by one behavior probe
    double flakiness = 0.2;
    Range transmute_p0{0.4, 0.9};
    Range transmute_rho{0.15, 0.5};
    WeightVector reward_weights = (WeightVector() << 0.25, 0.25, 0.15, 0.15, 0.1, 0.1).finished();
    double reward_noise = 0.01;
    double metric_noise = 0.0;
    double base_latency = 460.0;  // ms with no optimisation
    double latency_span = 300.0;  // ms removed by fully optimised code
    double latency_floor = 100.0;
    double latency_factor = 1.0;
    int tensor_rows = 4;
    int tensor_cols = 4;
    double tensor_noise = 0.25;
    int baseline_rebuilds = 4;
    int dim = kDefaultEmbeddingDim;
    NormalizationBounds bounds;

    int& count(NodeType t) { return counts[static_cast<std::size_t>(t)]; }
    int count(NodeType t) const { return counts[static_cast<std::size_t>(t)]; }
    double& density(EdgeType k) { return edge_density[static_cast<std::size_t>(k)]; }
    double density(EdgeType k) const { return edge_density[static_cast<std::size_t>(k)]; }

    /// Throws InvalidSpec.
    void validate() const;
};

inline constexpr std::array<std::string_view, 4> kEstatePresets = {"reference", "minimal", "flaky-build",
                                                                   "latency-shock"};

/// Throws InvalidSpec for an unknown name.
EstateSpec estate_preset(std::string_view name);

/// Latent-model environment; all answers are functions of (seed, spec,
/// shock state, graph content, arguments).
class SyntheticEnvironment final : public Environment {
public:
    SyntheticEnvironment(EstateSpec spec, std::uint64_t seed);

    const EstateSpec& spec() const noexcept { return spec_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const Eigen::MatrixXd& target_tensor() const noexcept { return target_; }
    const std::vector<std::vector<std::string>>& probe_coverage() const noexcept { return probes_; }

    RawMetrics metrics(const ArtefactGraph& graph) const override;
    double test_pass_rate(const ArtefactGraph& graph) const override;
    std::vector<bool> contract_probes(const ArtefactGraph& graph) const override;
    std::vector<bool> behavior_probes(const ArtefactGraph& graph) const override;
    std::vector<std::string> rebuild(const ArtefactGraph& graph, int m) const override;
    double reward(const ArtefactGraph& graph) const override;
    TransmuteParams transmute_params(const ArtefactNode& node) const override;
    std::vector<std::string> doc_template(const ArtefactNode& code_node) const override;
    PatchProposal propose_patch(const ArtefactGraph& graph, const std::string& node_id,
                                std::uint64_t seed) const override;
    double model_quality(const Eigen::MatrixXd& tensor) const override;
    void apply_shock(const Shock& shock) override;

    /// Traffic share of a code node in the latency model.
    double hot_weight(std::string_view node_id) const;
    /// Clamped-Gaussian pseudo-noise in [-4, 4] keyed by content.
    double content_noise(std::uint64_t content, std::uint64_t stream) const;

private:
    friend std::pair<ArtefactGraph, SyntheticEnvironment> generate_estate(const EstateSpec&, std::uint64_t);

    EstateSpec spec_;
    std::uint64_t seed_;
    Eigen::MatrixXd target_;
    std::vector<std::vector<std::string>> probes_;
};

std::pair<ArtefactGraph, SyntheticEnvironment> generate_estate(const EstateSpec& spec, std::uint64_t seed);

/// Hash of nodes, edges and graph-level attributes.
std::uint64_t content_hash(const ArtefactGraph& graph);

}  // namespace evograph
