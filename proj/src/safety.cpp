#include "evograph/safety.hpp"

#include "evograph/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace evograph {

void SafetyPolicy::validate() const {
    const auto unit = [](double x, const char* field) {
        if (!(x >= 0.0 && x <= 1.0)) throw Error(Errc::InvalidConfig, fmt::format("safety.{} must lie in [0, 1]", field));
    };
    unit(tau_test, "tau_test");
    unit(epsilon, "epsilon");
    unit(delta, "delta");
    if (!(p_max > 0.0) || !std::isfinite(p_max)) throw Error(Errc::InvalidConfig, "safety.p_max must be positive");
}

double drift(const ArtefactGraph& candidate, const ArtefactGraph& current, const Environment& env) {
    const auto a = env.behavior_probes(candidate);
    const auto b = env.behavior_probes(current);
    if (a.empty() || b.empty()) throw Error(Errc::NoProbes, "environment defines no behavior probes");
    if (a.size() != b.size())
        throw Error(Errc::LengthMismatch, fmt::format("probe counts differ: {} vs {}", a.size(), b.size()));
    std::size_t differing = 0;
    for (std::size_t i = 0; i < a.size(); ++i) differing += a[i] != b[i] ? 1 : 0;
    return static_cast<double>(differing) / static_cast<double>(a.size());
}

std::vector<std::string> modified_locked_nodes(const ArtefactGraph& candidate, const ArtefactGraph& current,
                                               const SafetyPolicy& policy) {
    std::vector<std::string> touched;
    for (const auto& [id, node] : current.nodes()) {
        if (!node.locked && !policy.locked_node_ids.contains(id)) continue;
        const auto* other = candidate.find(id);
        if (!other || !(*other == node)) touched.push_back(id);
    }
    return touched;
}

GateReport gate(const ArtefactGraph& candidate, const ArtefactGraph& current, const SafetyPolicy& policy,
                const Environment& env, bool approved) {
    GateReport r;
    r.measured.test_rate = env.test_pass_rate(candidate);
    const auto probes = env.contract_probes(candidate);
    r.measured.contracts_ok = std::all_of(probes.begin(), probes.end(), [](bool ok) { return ok; });
    r.measured.latency_ms = env.metrics(candidate).P;
    r.measured.drift = drift(candidate, current, env);

    const auto set = [&](Clause c, bool value) { r.clauses[static_cast<std::size_t>(c)] = value; };
    set(Clause::tests, r.measured.test_rate >= policy.tau_test);
    set(Clause::contracts, r.measured.contracts_ok);
    set(Clause::latency, r.measured.latency_ms <= policy.p_max);
    set(Clause::drift, r.measured.drift <= policy.epsilon);
    set(Clause::locks, modified_locked_nodes(candidate, current, policy).empty());
    set(Clause::approval, !policy.require_approval || approved);
    r.passed = std::all_of(r.clauses.begin(), r.clauses.end(), [](bool ok) { return ok; });
    return r;
}

RiskWindow::RiskWindow(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw Error(Errc::InvalidConfig, "risk window capacity must be positive");
}

void RiskWindow::push(const GateReport& report) {
    passes_.push_back(report.passed);
    if (passes_.size() > capacity_) passes_.pop_front();
}

double RiskWindow::estimate() const {
    if (passes_.empty()) throw Error(Errc::EmptyWindow, "no gate evaluations recorded");
    const auto passed = std::count(passes_.begin(), passes_.end(), true);
    return static_cast<double>(passed) / static_cast<double>(passes_.size());
}

double risk_estimate(std::span<const GateReport> history) {
    if (history.empty()) throw Error(Errc::EmptyWindow, "no gate evaluations recorded");
    const auto passed = std::count_if(history.begin(), history.end(), [](const GateReport& r) { return r.passed; });
    return static_cast<double>(passed) / static_cast<double>(history.size());
}

}  // namespace evograph
