#pragma once

#include "evograph/environment.hpp"
#include "evograph/graph.hpp"

#include <array>
#include <cstddef>
#include <deque>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evograph {

struct SafetyPolicy {
    double tau_test = 0.9;
    double p_max = 450.0;  // ms
    double epsilon = 0.1;
    double delta = 0.3;
    bool require_approval = false;
    std::set<std::string, std::less<>> locked_node_ids;
    // Generations whose rollout is pre-approved in batch mode.
    std::set<int> approved_generations;

    /// Throws InvalidConfig naming the offending field.
    void validate() const;
};

enum class Clause : std::uint8_t { tests, contracts, latency, drift, locks, approval };
inline constexpr std::size_t kClauseCount = 6;
inline constexpr std::array<std::string_view, kClauseCount> kClauseNames = {"tests", "contracts", "latency",
                                                                            "drift", "locks", "approval"};

struct GateMeasurements {
    double test_rate = 0.0;
    bool contracts_ok = true;
    double latency_ms = 0.0;
    double drift = 0.0;
};

struct GateReport {
    bool passed = false;
    std::array<bool, kClauseCount> clauses{};
    GateMeasurements measured;

    bool clause(Clause c) const noexcept { return clauses[static_cast<std::size_t>(c)]; }
};

/// Fraction of behavior probes whose outcome differs. Throws NoProbes.
double drift(const ArtefactGraph& candidate, const ArtefactGraph& current, const Environment& env);

/// Ids of nodes locked in `current` (by flag or policy) that `candidate`
/// removes or changes.
std::vector<std::string> modified_locked_nodes(const ArtefactGraph& candidate, const ArtefactGraph& current,
                                               const SafetyPolicy& policy);

/// Evaluates every clause. `approved` is consulted only when the policy
/// requires approval.
GateReport gate(const ArtefactGraph& candidate, const ArtefactGraph& current, const SafetyPolicy& policy,
                const Environment& env, bool approved = false);

class RiskWindow {
public:
    explicit RiskWindow(std::size_t capacity = 50);

    void push(const GateReport& report);
    std::size_t size() const noexcept { return passes_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    /// Empirical pass fraction. Throws EmptyWindow.
    double estimate() const;

private:
    std::size_t capacity_;
    std::deque<bool> passes_;
};

double risk_estimate(std::span<const GateReport> history);

}  // namespace evograph
