#pragma once

#include "evograph/graph.hpp"
#include "evograph/metrics.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace evograph {

struct TransmuteParams {
    double initial_pass_rate = 0.0;  // p0
    double improvement = 0.0;        // rho
};

struct PatchFeatures {
    double compile_ok = 1.0;
    double static_delta = 0.0;   // signed count of static findings removed
    double size_penalty = 0.0;   // edit-script length / 100
};

/// A proposed code edit: replacement attributes for one code node plus the
/// features a critic would see.
struct PatchProposal {
    std::string node_id;
    Attributes attributes;
    PatchFeatures features;
};

/// Environment shock forwarded by the engine at a generation barrier.
struct Shock {
    std::string kind;  // latency_spike, flakiness, reward_weights
    std::vector<double> values;
};

/// Oracle for everything that would otherwise need live systems. All queries
/// are pure in (environment state, graph content, arguments).
class Environment {
public:
    virtual ~Environment() = default;

    virtual RawMetrics metrics(const ArtefactGraph& graph) const = 0;
    virtual double test_pass_rate(const ArtefactGraph& graph) const = 0;
    virtual std::vector<bool> contract_probes(const ArtefactGraph& graph) const = 0;
    virtual std::vector<bool> behavior_probes(const ArtefactGraph& graph) const = 0;
    virtual std::vector<std::string> rebuild(const ArtefactGraph& graph, int m) const = 0;
    virtual double reward(const ArtefactGraph& graph) const = 0;
    virtual TransmuteParams transmute_params(const ArtefactNode& node) const = 0;
    virtual std::vector<std::string> doc_template(const ArtefactNode& code_node) const = 0;
    virtual PatchProposal propose_patch(const ArtefactGraph& graph, const std::string& node_id,
                                        std::uint64_t seed) const = 0;
    /// Quality in [0, 1] of an operator-model tensor.
    virtual double model_quality(const Eigen::MatrixXd& tensor) const = 0;

    virtual void apply_shock(const Shock& shock) = 0;
};

}  // namespace evograph
