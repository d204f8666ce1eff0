#pragma once

#include "evograph/bandit.hpp"
#include "evograph/environment.hpp"
#include "evograph/graph.hpp"
#include "evograph/metrics.hpp"
#include "evograph/operators.hpp"
#include "evograph/safety.hpp"
#include "evograph/selection.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace evograph {

enum class EventKind : std::uint8_t { weight_shift, policy_change, environment_shock };

std::string_view to_string(EventKind kind) noexcept;

/// A scheduled change applied at the start of generation `generation`.
struct EngineEvent {
    int generation = 1;
    EventKind kind = EventKind::weight_shift;
    std::vector<std::pair<std::string, std::string>> args;  // key=value pairs in input order

    /// "<gen> <kind> k=v ..." form, which parse_event accepts.
    std::string to_string() const;
};

/// Parses "<gen> <kind> key=value ...". Throws UnknownEventKind for an
/// unrecognised kind and InvalidConfig for malformed arguments.
EngineEvent parse_event(std::string_view text);

struct Ablations {
    bool disable_wm = false;
    bool disable_cp = false;
    bool disable_novelty = false;
};

/// Asked before a rollout that needs approval and is not pre-approved.
using ApprovalCallback = std::function<bool(int generation, const ArtefactGraph& candidate, const GateReport& report)>;

struct EngineConfig {
    int n = 64;
    int T = 30;
    double gamma = 0.95;
    std::uint64_t seed = 42;
    int threads = 1;  // 0 means one per hardware thread
    std::size_t risk_window = 50;
    Ablations ablations;
    std::vector<EngineEvent> events;

    OperatorConfig operators;
    SelectionParams selection;
    std::size_t archive_capacity = kDefaultArchiveCapacity;
    std::size_t novelty_k = kDefaultNoveltyNeighbors;
    double novelty_default = kDefaultColdStartNovelty;

    double eta = kDefaultBanditEta;
    std::optional<WeightVector> initial_w;
    std::array<bool, kFitnessSize> pinned{};

    SafetyPolicy safety;
    NormalizationBounds bounds;
    ApprovalCallback approve;

    /// Throws InvalidConfig, UnknownEventKind or OutOfRangeEvent.
    void validate() const;
};

struct Candidate {
    ArtefactGraph graph;
    FitnessVector fitness;
    BehaviorDescriptor descriptor;
};

/// argmax of w.F; ties go to the lexicographically larger fitness, then the
/// smaller graph id. Throws EmptyPopulation.
std::size_t best(std::span<const Candidate> population, const WeightVector& w);

struct OperatorCounts {
    std::array<int, kOperatorKindCount> attempted{};
    std::array<int, kOperatorKindCount> accepted{};
};

struct GenerationRecord {
    int generation = 0;
    std::vector<std::string> population_ids;
    std::vector<FitnessVector> population_fitness;
    WeightVector weights;
    bool bandit_updated = false;
    std::string best_id;
    double best_utility = 0.0;
    double mean_utility = 0.0;
    GateReport gate;
    std::vector<std::string> locked_touched;
    bool rolled_out = false;
    double risk_estimate = 0.0;
    std::string production_id;
    RawMetrics production_metrics;
    FitnessVector production_fitness;
    std::optional<double> reward;
    double discounted_return = 0.0;
    std::size_t archive_size = 0;
    OperatorCounts operators;
    std::vector<std::string> events;
};

struct RolloutState {
    ArtefactGraph current;
    std::vector<ArtefactGraph> history;  // every graph rolled out, in order
    double cumulative_return = 0.0;
};

struct RunResult {
    std::vector<GenerationRecord> records;
    RolloutState rollout;
    QdArchive archive;
    std::vector<Candidate> population;
};

/// Runs the generation loop from `g0`. Environment shocks mutate `env`.
/// Module errors are rethrown with the failing generation in the message.
RunResult run(const EngineConfig& config, const ArtefactGraph& g0, Environment& env);

/// Applies one event to the mutable pieces of engine state.
void apply_event(const EngineEvent& event, BanditState& bandit, SafetyPolicy& policy, Environment& env);

/// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace evograph
