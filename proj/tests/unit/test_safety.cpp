#include "evograph/error.hpp"
#include "evograph/safety.hpp"
#include "evograph/simenv.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace evograph;

namespace {

// Gate measurements are read straight from graph-level attributes.
class ScriptedEnvironment final : public Environment {
public:
    int probes = 100;

    RawMetrics metrics(const ArtefactGraph& g) const override {
        RawMetrics m;
        m.P = numeric_attr(g.attributes, "latency", 200.0);
        return m;
    }
    double test_pass_rate(const ArtefactGraph& g) const override { return numeric_attr(g.attributes, "tests", 0.95); }
    std::vector<bool> contract_probes(const ArtefactGraph& g) const override {
        return {true, numeric_attr(g.attributes, "contract_broken") < 0.5, true};
    }
    std::vector<bool> behavior_probes(const ArtefactGraph& g) const override {
        const auto flipped = static_cast<int>(numeric_attr(g.attributes, "flipped"));
        std::vector<bool> out(static_cast<std::size_t>(probes));
        for (int i = 0; i < probes; ++i) out[static_cast<std::size_t>(i)] = i < flipped;
        return out;
    }
    std::vector<std::string> rebuild(const ArtefactGraph&, int m) const override { return std::vector<std::string>(m, "h"); }
    double reward(const ArtefactGraph&) const override { return 0.0; }
    TransmuteParams transmute_params(const ArtefactNode&) const override { return {}; }
    std::vector<std::string> doc_template(const ArtefactNode&) const override { return {}; }
    PatchProposal propose_patch(const ArtefactGraph&, const std::string& id, std::uint64_t) const override {
        return {id, {}, {}};
    }
    double model_quality(const Eigen::MatrixXd&) const override { return 0.0; }
    void apply_shock(const Shock&) override {}
};

ArtefactGraph graph_with(Attributes attrs) {
    ArtefactGraph g(2);
    ArtefactNode a{"a", NodeType::code, Eigen::Vector2d(1, 0), {{"quality", 0.5}}, false, {}};
    ArtefactNode b{"b", NodeType::policy, Eigen::Vector2d(0, 1), {}, true, {}};
    g.insert_node(a);
    g.insert_node(b);
    g.attributes = std::move(attrs);
    return g;
}

SafetyPolicy example_policy() {
    SafetyPolicy p;
    p.tau_test = 0.9;
    p.p_max = 300.0;
    p.epsilon = 0.05;
    return p;
}

std::vector<bool> clause_values(const GateReport& r) {
    return std::vector<bool>(r.clauses.begin(), r.clauses.end());
}

std::vector<bool> only_false(Clause c) {
    std::vector<bool> v(kClauseCount, true);
    v[static_cast<std::size_t>(c)] = false;
    return v;
}

}  // namespace

TEST(Drift, HandFractions) {
    ScriptedEnvironment env;
    env.probes = 40;
    const auto current = graph_with({});
    EXPECT_EQ(drift(current, current, env), 0.0);
    EXPECT_DOUBLE_EQ(drift(graph_with({{"flipped", 2.0}}), current, env), 0.05);
    EXPECT_DOUBLE_EQ(drift(graph_with({{"flipped", 40.0}}), current, env), 1.0);
    EXPECT_DOUBLE_EQ(drift(current, graph_with({{"flipped", 2.0}}), env), 0.05);
    env.probes = 0;
    try {
        (void)drift(current, current, env);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NoProbes);
    }
}

TEST(Drift, ZeroOnIdenticalGraphsOfTheSyntheticEstate) {
    for (const auto* preset : {"reference", "minimal", "flaky-build"}) {
        const auto [g, env] = generate_estate(estate_preset(preset), 5);
        EXPECT_EQ(drift(g, g, env), 0.0) << preset;
    }
}

TEST(Gate, AllClausesHold) {
    ScriptedEnvironment env;
    const auto current = graph_with({});
    const auto candidate = graph_with({{"tests", 0.95}, {"latency", 200.0}, {"flipped", 1.0}});
    const auto r = gate(candidate, current, example_policy(), env);
    EXPECT_TRUE(r.passed);
    EXPECT_DOUBLE_EQ(r.measured.test_rate, 0.95);
    EXPECT_DOUBLE_EQ(r.measured.latency_ms, 200.0);
    EXPECT_DOUBLE_EQ(r.measured.drift, 0.01);
    EXPECT_TRUE(r.measured.contracts_ok);
}

TEST(Gate, SingleClauseViolations) {
    ScriptedEnvironment env;
    const auto current = graph_with({});
    const auto policy = example_policy();

    auto r = gate(graph_with({{"flipped", 6.0}}), current, policy, env);
    EXPECT_FALSE(r.passed);
    EXPECT_EQ(clause_values(r), only_false(Clause::drift));

    r = gate(graph_with({{"tests", 0.85}}), current, policy, env);
    EXPECT_EQ(clause_values(r), only_false(Clause::tests));

    r = gate(graph_with({{"latency", 301.0}}), current, policy, env);
    EXPECT_EQ(clause_values(r), only_false(Clause::latency));

    r = gate(graph_with({{"contract_broken", 1.0}}), current, policy, env);
    EXPECT_EQ(clause_values(r), only_false(Clause::contracts));
    EXPECT_FALSE(r.measured.contracts_ok);
}

TEST(Gate, LockedNodesBlockRegardlessOfMetrics) {
    ScriptedEnvironment env;
    const auto current = graph_with({});
    auto touched_flag = current;
    touched_flag.mutable_node("b").attributes["x"] = 1.0;  // b carries the locked flag
    auto r = gate(touched_flag, current, example_policy(), env);
    EXPECT_FALSE(r.passed);
    EXPECT_EQ(clause_values(r), only_false(Clause::locks));

    auto policy = example_policy();
    policy.locked_node_ids = {"a"};
    auto touched_policy = current;
    touched_policy.erase_node("a");
    EXPECT_EQ(modified_locked_nodes(touched_policy, current, policy), (std::vector<std::string>{"a"}));
    r = gate(touched_policy, current, policy, env);
    EXPECT_FALSE(r.passed);
    EXPECT_FALSE(r.clause(Clause::locks));

    auto untouched = current;
    untouched.mutable_node("a").locked = false;
    untouched.attributes["unrelated"] = 1.0;
    EXPECT_TRUE(modified_locked_nodes(untouched, current, example_policy()).empty());
}

TEST(Gate, ApprovalClause) {
    ScriptedEnvironment env;
    const auto g = graph_with({});
    auto policy = example_policy();
    EXPECT_TRUE(gate(g, g, policy, env, false).passed);
    policy.require_approval = true;
    const auto r = gate(g, g, policy, env, false);
    EXPECT_EQ(clause_values(r), only_false(Clause::approval));
    EXPECT_TRUE(gate(g, g, policy, env, true).passed);
}

TEST(Gate, PassedIsConjunctionAndRelaxingNeverHurts) {
    ScriptedEnvironment env;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto current = graph_with({});
    for (int trial = 0; trial < 2000; ++trial) {
        const auto candidate = graph_with({{"tests", 0.7 + 0.3 * unit(rng)},
                                           {"latency", 150.0 + 300.0 * unit(rng)},
                                           {"flipped", std::floor(20.0 * unit(rng))}});
        SafetyPolicy policy;
        policy.tau_test = 0.7 + 0.3 * unit(rng);
        policy.p_max = 150.0 + 300.0 * unit(rng);
        policy.epsilon = 0.2 * unit(rng);
        const auto r = gate(candidate, current, policy, env);
        bool all = true;
        for (bool c : r.clauses) all = all && c;
        ASSERT_EQ(r.passed, all);
        if (!r.passed) continue;
        auto relaxed = policy;
        relaxed.tau_test -= 0.05 * unit(rng);
        ASSERT_TRUE(gate(candidate, current, relaxed, env).passed);
        relaxed = policy;
        relaxed.p_max += 50.0 * unit(rng);
        ASSERT_TRUE(gate(candidate, current, relaxed, env).passed);
        relaxed = policy;
        relaxed.epsilon = std::min(1.0, relaxed.epsilon + 0.1 * unit(rng));
        ASSERT_TRUE(gate(candidate, current, relaxed, env).passed);
    }
}

TEST(SafetyPolicy, Validation) {
    EXPECT_NO_THROW(SafetyPolicy{}.validate());
    SafetyPolicy p;
    p.epsilon = 1.5;
    try {
        p.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidConfig);
        EXPECT_NE(e.detail().find("epsilon"), std::string::npos);
    }
    p = {};
    p.p_max = -1.0;
    EXPECT_THROW(p.validate(), Error);
}

TEST(Risk, HandFractions) {
    std::vector<GateReport> history(50);
    for (auto& r : history) r.passed = true;
    EXPECT_EQ(risk_estimate(history), 1.0);
    for (int i = 0; i < 5; ++i) history[static_cast<std::size_t>(i * 7)].passed = false;
    EXPECT_DOUBLE_EQ(risk_estimate(history), 0.9);
    try {
        (void)risk_estimate(std::span<const GateReport>());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::EmptyWindow);
    }
}

TEST(Risk, WindowKeepsTrailingEvaluations) {
    RiskWindow window(50);
    EXPECT_THROW((void)window.estimate(), Error);
    GateReport pass, fail;
    pass.passed = true;
    for (int i = 0; i < 10; ++i) window.push(fail);
    for (int i = 0; i < 45; ++i) window.push(pass);
    EXPECT_EQ(window.size(), 50u);
    EXPECT_DOUBLE_EQ(window.estimate(), 0.9);
    for (int i = 0; i < 5; ++i) window.push(pass);
    EXPECT_DOUBLE_EQ(window.estimate(), 1.0);
}
