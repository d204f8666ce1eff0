#include "evograph/embedding.hpp"
#include "evograph/error.hpp"
#include "evograph/graph_io.hpp"
#include "evograph/operators.hpp"
#include "evograph/simenv.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>

using namespace evograph;

namespace {

const std::string kGoldenPath = std::string(EVOGRAPH_GOLDEN_DIR) + "/reference_seed42_metrics.json";

EstateSpec quiet_spec() {
    EstateSpec spec;
    spec.reward_noise = 0.0;
    spec.latency_floor = 100.0;
    spec.base_latency = 460.0;
    spec.latency_span = 360.0;
    return spec;
}

// One perfect code node with a perfectly fresh doc and reproducible builds.
ArtefactGraph perfect_graph(const SyntheticEnvironment& env) {
    ArtefactGraph g(env.spec().dim);
    ArtefactNode code;
    code.id = "code-000";
    code.type = NodeType::code;
    code.attributes = {{"quality", 1.0}, {"perf", 1.0}, {"security", 1.0}, {"contract_ok", 1.0}, {"behavior", 0.0}};
    refresh_embedding(code, g.dim());
    ArtefactNode doc;
    doc.id = "doc-000";
    doc.type = NodeType::doc;
    const auto tokens = env.doc_template(code);
    std::string text;
    for (const auto& t : tokens) text += (text.empty() ? "" : " ") + t;
    doc.attributes = {{"text", text}};
    doc.embedding = pooled_text_embedding(tokens, g.dim());
    g.insert_node(code);
    g.insert_node(doc);
    g.insert_edge({"doc-000", "code-000", EdgeType::documents});
    g.attributes["repro"] = 1.0;
    return g;
}

nlohmann::json metrics_json(const RawMetrics& m) {
    return {{"U", m.U}, {"P", m.P}, {"S", m.S}, {"B", m.B}, {"D", m.D}, {"C", m.C}};
}

// Expected modal fraction when each of m hashes independently diverges
// (to a unique value) with probability f, by enumerating all 2^m patterns.
double expected_repro(double f, int m) {
    double total = 0.0;
    for (int mask = 0; mask < (1 << m); ++mask) {
        int diverged = 0;
        for (int i = 0; i < m; ++i) diverged += (mask >> i) & 1;
        const int same = m - diverged;
        const double p = std::pow(f, diverged) * std::pow(1.0 - f, same);
        total += p * static_cast<double>(std::max(same, 1)) / m;
    }
    return total;
}

}  // namespace

TEST(Estate, AllZeroCountsGiveEmptyGraph) {
    EstateSpec spec;
    const auto [g, env] = generate_estate(spec, 1);
    EXPECT_EQ(g.node_count(), 0u);
    EXPECT_EQ(g.edge_count(), 0u);
    const auto m = env.metrics(g);
    EXPECT_TRUE(std::isfinite(m.P));
    EXPECT_TRUE(env.behavior_probes(g).empty());
}

TEST(Estate, ReferencePresetIsDeterministic) {
    const auto [a, env_a] = generate_estate(estate_preset("reference"), 42);
    const auto [b, env_b] = generate_estate(estate_preset("reference"), 42);
    EXPECT_EQ(serialize(a), serialize(b));
    const auto [c, env_c] = generate_estate(estate_preset("reference"), 43);
    EXPECT_NE(serialize(a), serialize(c));
    EXPECT_EQ(a.nodes_of_type(NodeType::code).size(), 60u);
    EXPECT_EQ(a.nodes_of_type(NodeType::doc).size(), 20u);
    EXPECT_EQ(a.nodes_of_type(NodeType::build).size(), 8u);
    EXPECT_EQ(a.nodes_of_type(NodeType::schema).size(), 4u);
    EXPECT_EQ(a.nodes_of_type(NodeType::ticket).size(), 8u);
}

TEST(Estate, EdgeEndpointsResolve) {
    for (const auto* preset : {"reference", "minimal", "flaky-build", "latency-shock"}) {
        const auto [g, env] = generate_estate(estate_preset(preset), 7);
        for (const auto& e : g.edges()) {
            EXPECT_TRUE(g.contains(e.src)) << e.src;
            EXPECT_TRUE(g.contains(e.dst)) << e.dst;
            if (e.src == e.dst) EXPECT_EQ(e.kind, EdgeType::depends_on);
        }
        for (const auto& [id, n] : g.nodes()) EXPECT_EQ(n.embedding.size(), g.dim());
        EXPECT_TRUE(fitness_vector(env.metrics(g), env.spec().bounds).allFinite());
        EXPECT_TRUE(env.metrics(g).valid()) << preset;
    }
}

TEST(Estate, InvalidSpecAndPreset) {
    EstateSpec spec;
    spec.flakiness = 1.5;
    EXPECT_THROW((void)generate_estate(spec, 1), Error);
    spec = {};
    spec.count(NodeType::doc) = -1;
    try {
        (void)generate_estate(spec, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidSpec);
    }
    EXPECT_THROW((void)estate_preset("huge"), Error);
}

TEST(Estate, BaselineMetricsMatchGoldenFile) {
    const auto [g, env] = generate_estate(estate_preset("reference"), 42);
    const auto actual = metrics_json(env.metrics(g));
    if (std::getenv("EVOGRAPH_UPDATE_GOLDEN")) {
        std::ofstream(kGoldenPath) << actual.dump(2) << "\n";
        GTEST_SKIP() << "golden file rewritten";
    }
    std::ifstream in(kGoldenPath);
    ASSERT_TRUE(in) << kGoldenPath;
    const auto golden = nlohmann::json::parse(in);
    for (const auto& key : {"U", "P", "S", "B", "D", "C"})
        EXPECT_NEAR(actual.at(key).get<double>(), golden.at(key).get<double>(), 1e-12) << key;
}

TEST(Environment, QueriesArePure) {
    const auto [g, env] = generate_estate(estate_preset("reference"), 42);
    const auto copy = g;
    EXPECT_EQ(env.metrics(g), env.metrics(copy));
    EXPECT_EQ(env.reward(g), env.reward(copy));
    EXPECT_EQ(env.behavior_probes(g), env.behavior_probes(copy));
    EXPECT_EQ(env.contract_probes(g), env.contract_probes(copy));
    EXPECT_EQ(env.rebuild(g, 6), env.rebuild(copy, 6));
    EXPECT_EQ(env.test_pass_rate(g), env.test_pass_rate(copy));
    const auto& code = g.node("code-000");
    EXPECT_EQ(env.doc_template(code), env.doc_template(code));
    EXPECT_EQ(env.propose_patch(g, "code-000", 5).attributes, env.propose_patch(copy, "code-000", 5).attributes);
    EXPECT_EQ(env.transmute_params(code).initial_pass_rate, env.transmute_params(code).initial_pass_rate);
    EXPECT_EQ(env.metrics(g), env.metrics(g));  // repeated calls do not advance any state
}

TEST(Environment, LatentMonotonicity) {
    const auto [g, env] = generate_estate(estate_preset("reference"), 42);
    const auto base = env.metrics(g);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto code = g.nodes_of_type(NodeType::code);
    for (int trial = 0; trial < 300; ++trial) {
        const auto& id = code[static_cast<std::size_t>(unit(rng) * code.size())]->id;
        for (const auto* key : {"quality", "perf", "security"}) {
            auto h = g;
            auto& attrs = h.mutable_node(id).attributes;
            attrs[key] = std::min(1.0, numeric_attr(attrs, key) + 0.5 * unit(rng));
            const auto m = env.metrics(h);
            EXPECT_GE(m.U, base.U) << id << " " << key;
            EXPECT_GE(m.S, base.S) << id << " " << key;
            EXPECT_GE(m.B, base.B) << id << " " << key;
            EXPECT_LE(m.P, base.P) << id << " " << key;
        }
    }
}

TEST(Environment, ImprovingEveryCodeNodeLowersLatency) {
    const auto [g, env] = generate_estate(estate_preset("reference"), 42);
    auto h = g;
    for (const auto* n : g.nodes_of_type(NodeType::code))
        for (const auto* key : {"quality", "perf", "security"}) {
            auto& attrs = h.mutable_node(n->id).attributes;
            attrs[key] = std::min(1.0, numeric_attr(attrs, key) + 0.1);
        }
    EXPECT_LT(env.metrics(h).P, env.metrics(g).P);
    EXPECT_GT(env.metrics(h).U, env.metrics(g).U);
}

TEST(Reward, NoiselessBasisWeight) {
    auto spec = quiet_spec();
    spec.reward_weights = WeightVector::Zero();
    spec.reward_weights[kU] = 1.0;
    const auto [g, env] = generate_estate(estate_preset("reference"), 42);
    const SyntheticEnvironment quiet(spec, 42);
    EXPECT_DOUBLE_EQ(quiet.reward(g), quiet.metrics(g).U);
}

TEST(Reward, NoiselessUniformOnPerfectGraph) {
    auto spec = quiet_spec();
    spec.reward_weights = WeightVector::Constant(1.0 / 6.0);
    const SyntheticEnvironment env(spec, 3);
    const auto g = perfect_graph(env);
    const auto f = fitness_vector(env.metrics(g), spec.bounds);
    EXPECT_TRUE(f.isApproxToConstant(1.0, 1e-12)) << f.transpose();
    EXPECT_NEAR(env.reward(g), 1.0, 1e-12);
}

TEST(Reward, NoiseStaysWithinFourSigma) {
    auto [g, env] = generate_estate(estate_preset("reference"), 42);
    const double sigma = env.spec().reward_noise;
    ASSERT_GT(sigma, 0.0);
    double max_dev = 0.0;
    for (int i = 0; i < 10000; ++i) {
        g.attributes["repro"] = 0.5 + i * 1e-5;
        const double clean = env.spec().reward_weights.dot(fitness_vector(env.metrics(g), env.spec().bounds));
        max_dev = std::max(max_dev, std::abs(env.reward(g) - clean));
    }
    EXPECT_LE(max_dev, 4.0 * sigma + 1e-15);
    EXPECT_GT(max_dev, 0.0);
}

TEST(Rebuild, FlakinessCalibration) {
    for (double f : {0.1, 0.3, 0.6}) {
        auto spec = estate_preset("minimal");
        spec.flakiness = f;
        auto [g, env] = generate_estate(spec, 11);
        for (const auto* b : g.nodes_of_type(NodeType::build)) {
            auto& attrs = g.mutable_node(b->id).attributes;
            attrs["hermetic"] = 0.0;
            attrs["pinned"] = 0.0;
        }
        ArtefactNode data;
        data.id = "data-probe";
        data.type = NodeType::data;
        for (int m = 1; m <= 6; ++m) {
            double sum = 0.0;
            constexpr int calls = 4000;
            for (int k = 0; k < calls; ++k) {
                auto h = g;
                data.attributes["version"] = static_cast<double>(k);
                refresh_embedding(data, h.dim());
                h.insert_node(data);
                sum += reproducibility(env.rebuild(h, m));
            }
            EXPECT_NEAR(sum / calls, expected_repro(f, m), 0.02) << "f=" << f << " m=" << m;
        }
    }
}

TEST(Rebuild, DeterministicWithoutFlakiness) {
    auto spec = estate_preset("reference");
    spec.flakiness = 0.0;
    const auto [g, env] = generate_estate(spec, 2);
    const auto hashes = env.rebuild(g, 8);
    EXPECT_EQ(reproducibility(hashes), 1.0);
}

TEST(Shock, LatencySpikeScalesLatency) {
    auto [g, env] = generate_estate(estate_preset("reference"), 42);
    const double before = env.metrics(g).P;
    env.apply_shock({"latency_spike", {1.5}});
    EXPECT_NEAR(env.metrics(g).P, 1.5 * before, 1e-9);
    const auto [g2, shocked] = generate_estate(estate_preset("latency-shock"), 42);
    EXPECT_NEAR(shocked.metrics(g2).P, 1.5 * before, 1e-9);
}

TEST(Shock, OtherKindsAndErrors) {
    auto [g, env] = generate_estate(estate_preset("reference"), 42);
    env.apply_shock({"flakiness", {0.9}});
    EXPECT_EQ(env.spec().flakiness, 0.9);
    env.apply_shock({"reward_weights", {1, 0, 0, 0, 0, 0}});
    EXPECT_EQ(env.spec().reward_weights[kU], 1.0);
    EXPECT_THROW(env.apply_shock({"reward_weights", {1, 1, 0, 0, 0, 0}}), Error);
    EXPECT_THROW(env.apply_shock({"latency_spike", {}}), Error);
    try {
        env.apply_shock({"earthquake", {1.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::UnknownEventKind);
    }
}

TEST(ContentNoise, BoundedAndKeyedByContent) {
    const auto [g, env] = generate_estate(estate_preset("minimal"), 1);
    double sum = 0.0, sq = 0.0;
    constexpr int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = env.content_noise(static_cast<std::uint64_t>(i), 9);
        ASSERT_LE(std::abs(z), 4.0);
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.03);
    EXPECT_NEAR(sq / n, 1.0, 0.05);
    EXPECT_EQ(env.content_noise(77, 1), env.content_noise(77, 1));
}
