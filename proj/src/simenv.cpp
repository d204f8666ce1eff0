#include "evograph/simenv.hpp"

#include "evograph/embedding.hpp"
#include "evograph/error.hpp"
#include "evograph/hashing.hpp"
#include "evograph/merge.hpp"
#include "evograph/operators.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace evograph {

namespace {

constexpr std::array<std::string_view, 8> kDomains = {"ledger", "payments", "catalog", "checkout",
                                                      "accounts", "billing", "inventory", "reporting"};

double uniform(std::uint64_t seed, auto... parts) { return unit_interval(derive_seed(seed, parts...)); }

std::string tier(double x) { return fmt::format("t{}", std::clamp(static_cast<int>(x * 4.0), 0, 3)); }

bool flag(const Attributes& attrs, std::string_view key) { return numeric_attr(attrs, key) >= 0.5; }

struct EdgeRule {
    EdgeType kind;
    std::vector<NodeType> sources;
    std::vector<NodeType> targets;
};

const std::vector<EdgeRule>& edge_rules() {
    static const std::vector<EdgeRule> rules = {
        {EdgeType::calls, {NodeType::code}, {NodeType::code}},
        {EdgeType::generates, {NodeType::compiler}, {NodeType::code}},
        {EdgeType::derived_from, {NodeType::test, NodeType::ticket}, {NodeType::code}},
        {EdgeType::builds, {NodeType::build}, {NodeType::code}},
        {EdgeType::documents, {NodeType::doc}, {NodeType::code}},
        {EdgeType::depends_on, {NodeType::code}, {NodeType::schema, NodeType::data}},
        {EdgeType::emits_metric, {NodeType::code}, {NodeType::metric, NodeType::log}},
        {EdgeType::dynamic_call, {NodeType::code, NodeType::ui}, {NodeType::code}},
    };
    return rules;
}

std::string node_id(NodeType t, int index) { return fmt::format("{}-{:03}", to_string(t), index); }

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

}  // namespace

void EstateSpec::validate() const {
    const auto fail = [](const std::string& what) { throw Error(Errc::InvalidSpec, what); };
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] < 0) fail(fmt::format("count.{} must be >= 0", to_string(static_cast<NodeType>(i))));
    for (std::size_t i = 0; i < edge_density.size(); ++i)
        if (!(edge_density[i] >= 0.0) || !std::isfinite(edge_density[i]))
            fail(fmt::format("density.{} must be finite and >= 0", to_string(static_cast<EdgeType>(i))));
    const auto unit = [&](double x, const char* name) {
        if (!(x >= 0.0 && x <= 1.0)) fail(fmt::format("{} must lie in [0, 1]", name));
    };
    const auto unit_range = [&](const Range& r, const char* name) {
        unit(r.lo, name);
        unit(r.hi, name);
        if (r.lo > r.hi) fail(fmt::format("{} range is inverted", name));
    };
    unit_range(quality, "quality");
    unit_range(perf, "perf");
    unit_range(security, "security");
    unit_range(transmute_p0, "transmute_p0");
    if (!(transmute_rho.lo >= 0.0 && transmute_rho.lo <= transmute_rho.hi && transmute_rho.hi <= 1.0))
        fail("transmute_rho must be an ordered range within [0, 1]");
    unit(legacy_fraction, "legacy_fraction");
    unit(stale_doc_fraction, "stale_doc_fraction");
    unit(hermetic_fraction, "hermetic_fraction");
    unit(flakiness, "flakiness");
    if (probe_count < 0) fail("probe_count must be >= 0");
    if (probe_span < 1) fail("probe_span must be >= 1");
    if (!reward_weights.allFinite() || !on_simplex(reward_weights)) fail("reward_weights must lie on the simplex");
    if (!(reward_noise >= 0.0) || !(metric_noise >= 0.0)) fail("noise levels must be >= 0");
    if (!(latency_floor > 0.0) || !(base_latency >= latency_floor) || !(latency_span >= 0.0))
        fail("latency model requires 0 < floor <= base and span >= 0");
    if (!(latency_factor > 0.0)) fail("latency_factor must be positive");
    if (tensor_rows < 1 || tensor_cols < 1) fail("tensor shape must be positive");
    if (!(tensor_noise >= 0.0)) fail("tensor_noise must be >= 0");
    if (baseline_rebuilds < 1) fail("baseline_rebuilds must be >= 1");
    if (dim < 1) fail("dim must be >= 1");
    if (!(bounds.p_min < bounds.p_max)) fail("latency bounds must satisfy p_min < p_max");
}

EstateSpec estate_preset(std::string_view name) {
    EstateSpec spec;
    const auto set_reference = [&] {
        spec.count(NodeType::code) = 60;
        spec.count(NodeType::doc) = 20;
        spec.count(NodeType::build) = 8;
        spec.count(NodeType::compiler) = 4;
        spec.count(NodeType::test) = 10;
        spec.count(NodeType::schema) = 4;
        spec.count(NodeType::policy) = 2;
        spec.count(NodeType::ticket) = 8;
        spec.count(NodeType::ui) = 3;
        spec.count(NodeType::log) = 3;
        spec.count(NodeType::metric) = 4;
        spec.count(NodeType::data) = 4;
        spec.density(EdgeType::calls) = 1.5;
        spec.density(EdgeType::generates) = 3.0;
        spec.density(EdgeType::derived_from) = 1.0;
        spec.density(EdgeType::builds) = 7.0;
        spec.density(EdgeType::documents) = 1.0;
        spec.density(EdgeType::depends_on) = 0.5;
        spec.density(EdgeType::emits_metric) = 0.3;
        spec.density(EdgeType::dynamic_call) = 0.5;
    };
    if (name == "reference") {
        set_reference();
    } else if (name == "minimal") {
        spec.count(NodeType::code) = 4;
        spec.count(NodeType::doc) = 2;
        spec.count(NodeType::build) = 1;
        spec.count(NodeType::compiler) = 2;
        spec.count(NodeType::test) = 1;
        spec.count(NodeType::schema) = 1;
        spec.density(EdgeType::calls) = 1.0;
        spec.density(EdgeType::documents) = 1.0;
        spec.density(EdgeType::builds) = 2.0;
        spec.density(EdgeType::derived_from) = 1.0;
        spec.density(EdgeType::depends_on) = 0.5;
        spec.probe_count = 8;
        spec.probe_span = 1;
    } else if (name == "flaky-build") {
        set_reference();
        spec.flakiness = 0.5;
        spec.hermetic_fraction = 0.0;
    } else if (name == "latency-shock") {
        set_reference();
        spec.latency_factor = 1.5;
    } else {
        throw Error(Errc::InvalidSpec, fmt::format("unknown estate preset '{}'", name));
    }
    return spec;
}

SyntheticEnvironment::SyntheticEnvironment(EstateSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
    spec_.validate();
    target_.resize(spec_.tensor_rows, spec_.tensor_cols);
    for (int r = 0; r < spec_.tensor_rows; ++r)
        for (int c = 0; c < spec_.tensor_cols; ++c) target_(r, c) = 2.0 * uniform(seed_, 0x7a, r, c) - 1.0;
}

double SyntheticEnvironment::hot_weight(std::string_view id) const {
    const double u = unit_interval(hash_string(id, derive_seed(seed_, 0x407)));
    return 0.05 + u * u * u;
}

double SyntheticEnvironment::content_noise(std::uint64_t content, std::uint64_t stream) const {
    const double u1 = std::max(uniform(seed_, content, stream, 1), 1e-300);
    const double u2 = uniform(seed_, content, stream, 2);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return std::clamp(z, -4.0, 4.0);
}

RawMetrics SyntheticEnvironment::metrics(const ArtefactGraph& graph) const {
    RawMetrics m;
    const auto code = graph.nodes_of_type(NodeType::code);

    double quality_sum = 0.0, security_sum = 0.0, hot_sum = 0.0, perf_sum = 0.0;
    for (const auto* n : code) {
        const double q = numeric_attr(n->attributes, attr::quality);
        quality_sum += flag(n->attributes, attr::contract_ok) ? q : 0.5 * q;
        security_sum += numeric_attr(n->attributes, attr::security);
        const double h = hot_weight(n->id);
        hot_sum += h;
        perf_sum += h * numeric_attr(n->attributes, attr::perf);
    }
    const double n_code = static_cast<double>(code.size());
    m.U = code.empty() ? 0.0 : quality_sum / n_code;

    const double optimisation = hot_sum > 0.0 ? perf_sum / hot_sum : 0.0;
    double latency = std::max(spec_.latency_floor, spec_.base_latency - spec_.latency_span * optimisation);
    if (spec_.metric_noise > 0.0)
        latency *= std::max(0.5, 1.0 + spec_.metric_noise * content_noise(structural_hash(graph), 0x1a7));
    m.P = latency * spec_.latency_factor;

    double code_security = code.empty() ? 0.0 : security_sum / n_code;
    double model_sum = 0.0;
    int models = 0;
    for (const auto& [id, n] : graph.nodes()) {
        if ((n.type == NodeType::compiler || n.type == NodeType::policy) && n.tensor.size() > 0) {
            model_sum += model_quality(n.tensor);
            ++models;
        }
    }
    m.S = models > 0 ? 0.7 * code_security + 0.3 * model_sum / models : code_security;

    const double worst = spec_.base_latency * 1.5;
    const double latency_score = std::clamp((worst - m.P) / (worst - spec_.latency_floor), 0.0, 1.0);
    m.B = 0.5 * m.U + 0.5 * latency_score;

    // Mean over documenting doc nodes of each doc's mean freshness.
    std::map<std::string, std::pair<double, int>, std::less<>> per_doc;
    for (const auto& e : doc_pairs(graph)) {
        auto& [sum, count] = per_doc[e.src];
        sum += doc_freshness(graph.node(e.src), graph.node(e.dst), *this);
        ++count;
    }
    double fresh = 0.0;
    for (const auto& [id, acc] : per_doc) fresh += acc.first / acc.second;
    m.D = per_doc.empty() ? 0.0 : fresh / static_cast<double>(per_doc.size());

    m.C = std::clamp(numeric_attr(graph.attributes, attr::repro, 0.0), 0.0, 1.0);
    return m;
}

double SyntheticEnvironment::test_pass_rate(const ArtefactGraph& graph) const {
    const auto code = graph.nodes_of_type(NodeType::code);
    if (code.empty()) return 1.0;
    double passing = 0.0;
    for (const auto* n : code) {
        const double q = numeric_attr(n->attributes, attr::quality);
        passing += flag(n->attributes, attr::contract_ok) ? std::clamp((q - 0.3) / 0.2, 0.0, 1.0) : 0.0;
    }
    return passing / static_cast<double>(code.size());
}

std::vector<bool> SyntheticEnvironment::contract_probes(const ArtefactGraph& graph) const {
    std::vector<bool> out;
    for (const auto& e : graph.edges()) {
        if (e.kind != EdgeType::depends_on) continue;
        const auto* src = graph.find(e.src);
        const auto* dst = graph.find(e.dst);
        if (src && dst && src->type == NodeType::code && dst->type == NodeType::schema)
            out.push_back(flag(src->attributes, attr::contract_ok));
    }
    return out;
}

std::vector<bool> SyntheticEnvironment::behavior_probes(const ArtefactGraph& graph) const {
    std::vector<bool> out;
    out.reserve(probes_.size());
    for (std::size_t j = 0; j < probes_.size(); ++j) {
        Fnv1a h;
        h.u64(derive_seed(seed_, 0xb0, j));
        for (const auto& id : probes_[j]) {
            const auto* n = graph.find(id);
            if (n) h.f64(numeric_attr(n->attributes, attr::behavior));
            else h.str("missing");
        }
        out.push_back((mix64(h.value()) & 1ULL) != 0);
    }
    return out;
}

std::vector<std::string> SyntheticEnvironment::rebuild(const ArtefactGraph& graph, int m) const {
    Fnv1a h;
    double factor_sum = 0.0;
    int builds = 0;
    for (const auto& [id, n] : graph.nodes()) {
        if (n.type == NodeType::build) {
            factor_sum += (flag(n.attributes, attr::hermetic) ? 0.25 : 1.0) * (flag(n.attributes, attr::pinned) ? 0.5 : 1.0);
            ++builds;
            h.u64(node_hash(n));
        } else if (n.type == NodeType::data) {
            h.u64(node_hash(n));
        }
    }
    for (const auto& e : graph.edges())
        if (e.kind == EdgeType::depends_on || e.kind == EdgeType::builds) h.str(e.src).str(e.dst);
    const std::uint64_t content = h.value();
    const double flakiness = spec_.flakiness * (builds > 0 ? factor_sum / builds : 1.0);

    std::vector<std::string> hashes;
    hashes.reserve(static_cast<std::size_t>(std::max(m, 0)));
    for (int i = 0; i < m; ++i) {
        const bool diverges = uniform(seed_, 0xb1d, content, i) < flakiness;
        hashes.push_back(fmt::format("{:016x}", diverges ? derive_seed(content, i, 0xd1f) : mix64(content)));
    }
    return hashes;
}

double SyntheticEnvironment::reward(const ArtefactGraph& graph) const {
    const auto f = fitness_vector(metrics(graph), spec_.bounds);
    const double noise = spec_.reward_noise * content_noise(content_hash(graph), 0x2e);
    return std::clamp(spec_.reward_weights.dot(f) + noise, 0.0, 1.0);
}

TransmuteParams SyntheticEnvironment::transmute_params(const ArtefactNode& node) const {
    const auto key = hash_string(node.id, derive_seed(seed_, 0x7e));
    return {spec_.transmute_p0.lerp(unit_interval(derive_seed(key, 1))),
            spec_.transmute_rho.lerp(unit_interval(derive_seed(key, 2)))};
}

std::vector<std::string> SyntheticEnvironment::doc_template(const ArtefactNode& code) const {
    const auto domain = std::string(kDomains[hash_string(code.id, seed_) % kDomains.size()]);
    const auto& a = code.attributes;
    const auto behavior = static_cast<long>(numeric_attr(a, attr::behavior));
    return tokenize(fmt::format(
        "{} module implements the {} workflow and exposes the {} service interface to callers . "
        "latency tier {} quality tier {} security tier {} language {} behavior revision r{}",
        code.id, domain, domain, tier(numeric_attr(a, attr::perf)), tier(numeric_attr(a, attr::quality)),
        tier(numeric_attr(a, attr::security)), string_attr(a, attr::lang, "java"), behavior));
}

PatchProposal SyntheticEnvironment::propose_patch(const ArtefactGraph& graph, const std::string& id,
                                                  std::uint64_t seed) const {
    const auto& node = graph.node(id);
    const std::uint64_t key = derive_seed(seed_, 0xc0de, seed, node_hash(node));
    const auto u = [&](int stream) { return unit_interval(derive_seed(key, stream)); };

    PatchProposal p{id, node.attributes, {}};
    const bool compiles = u(1) < 0.85;
    double d_perf, d_quality, d_security;
    if (compiles) {
        d_perf = 0.3 * u(2);
        d_quality = -0.03 + 0.07 * u(3);
        d_security = -0.03 + 0.06 * u(4);
    } else {
        d_perf = -0.05 + 0.1 * u(2);
        d_quality = -0.1 * u(3);
        d_security = -0.05 * u(4);
    }
    const auto bump = [&](std::string_view key_name, double delta) {
        p.attributes[std::string(key_name)] = std::clamp(numeric_attr(node.attributes, key_name) + delta, 0.0, 1.0);
    };
    bump(attr::perf, d_perf);
    bump(attr::quality, d_quality);
    bump(attr::security, d_security);
    if (u(5) < 0.03) p.attributes[std::string(attr::behavior)] = numeric_attr(node.attributes, attr::behavior) + 1.0;
    if (compiles && u(6) < 0.01) p.attributes[std::string(attr::contract_ok)] = 0.0;

    p.features.compile_ok = compiles ? 1.0 : 0.0;
    p.features.static_delta = std::round(d_security * 100.0) / 2.0;
    p.features.size_penalty = 0.05 + 0.45 * u(7);
    return p;
}

double SyntheticEnvironment::model_quality(const Eigen::MatrixXd& tensor) const {
    if (tensor.rows() != target_.rows() || tensor.cols() != target_.cols()) return 0.0;
    const auto aligned = align(tensor, target_).aligned;
    const double mse = (aligned - target_).squaredNorm() / static_cast<double>(target_.size());
    return std::exp(-mse / 0.1);
}

void SyntheticEnvironment::apply_shock(const Shock& shock) {
    const auto need = [&](std::size_t n) {
        if (shock.values.size() != n)
            throw Error(Errc::InvalidConfig, fmt::format("shock '{}' expects {} value(s)", shock.kind, n));
    };
    if (shock.kind == "latency_spike") {
        need(1);
        if (!(shock.values[0] > 0.0)) throw Error(Errc::InvalidConfig, "latency_spike factor must be positive");
        spec_.latency_factor *= shock.values[0];
    } else if (shock.kind == "flakiness") {
        need(1);
        if (!(shock.values[0] >= 0.0 && shock.values[0] <= 1.0))
            throw Error(Errc::InvalidConfig, "flakiness must lie in [0, 1]");
        spec_.flakiness = shock.values[0];
    } else if (shock.kind == "reward_weights") {
        need(kFitnessSize);
        WeightVector w = Eigen::Map<const WeightVector>(shock.values.data());
        if (!on_simplex(w)) throw Error(Errc::InvalidConfig, "reward_weights must lie on the simplex");
        spec_.reward_weights = w;
    } else {
        throw Error(Errc::UnknownEventKind, fmt::format("unknown environment shock '{}'", shock.kind));
    }
}

std::uint64_t content_hash(const ArtefactGraph& graph) {
    Fnv1a h;
    h.u64(structural_hash(graph));
    for (const auto& [key, value] : graph.attributes) {
        h.str(key);
        if (const auto* d = std::get_if<double>(&value)) h.f64(*d);
        else h.str(std::get<std::string>(value));
    }
    return h.value();
}

std::pair<ArtefactGraph, SyntheticEnvironment> generate_estate(const EstateSpec& spec, std::uint64_t seed) {
    spec.validate();
    SyntheticEnvironment env(spec, seed);
    ArtefactGraph g(spec.dim);
    g.id = "g0";

    const int n_code = spec.count(NodeType::code);
    const int n_legacy = static_cast<int>(std::lround(spec.legacy_fraction * n_code));
    for (auto type : all_node_types()) {
        for (int i = 0; i < spec.count(type); ++i) {
            ArtefactNode n;
            n.id = node_id(type, i);
            n.type = type;
            const auto r = [&](int stream) { return uniform(seed, 0x9e, static_cast<int>(type), i, stream); };
            switch (type) {
                case NodeType::code: {
                    const bool legacy = i < n_legacy;
                    n.attributes.emplace(std::string(attr::quality), spec.quality.lerp(r(1)));
                    n.attributes.emplace(std::string(attr::perf), spec.perf.lerp(r(2)));
                    n.attributes.emplace(std::string(attr::security), spec.security.lerp(r(3)));
                    n.attributes.emplace(std::string(attr::behavior), 0.0);
                    n.attributes.emplace(std::string(attr::contract_ok), 1.0);
                    n.attributes.emplace(std::string(attr::legacy), legacy ? 1.0 : 0.0);
                    n.attributes.emplace(std::string(attr::lang), std::string(legacy ? "cobol" : "java"));
                    break;
                }
                case NodeType::build:
                    n.attributes.emplace(std::string(attr::hermetic), r(1) < spec.hermetic_fraction ? 1.0 : 0.0);
                    n.attributes.emplace(std::string(attr::pinned), 0.0);
                    break;
                case NodeType::compiler:
                case NodeType::policy: {
                    // A row-permuted noisy copy of the hidden target model.
                    Eigen::MatrixXd noisy = env.target_tensor();
                    for (Eigen::Index k = 0; k < noisy.size(); ++k) {
                        const double u1 = std::max(r(100 + static_cast<int>(k)), 1e-300);
                        const double u2 = r(200 + static_cast<int>(k));
                        noisy.data()[k] += spec.tensor_noise * std::sqrt(-2.0 * std::log(u1)) *
                                           std::cos(2.0 * std::numbers::pi * u2);
                    }
                    std::vector<Eigen::Index> perm(static_cast<std::size_t>(noisy.rows()));
                    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<Eigen::Index>(k);
                    for (std::size_t k = perm.size(); k > 1; --k)
                        std::swap(perm[k - 1], perm[static_cast<std::size_t>(r(300 + static_cast<int>(k)) * k)]);
                    n.tensor.resize(noisy.rows(), noisy.cols());
                    for (Eigen::Index k = 0; k < noisy.rows(); ++k) n.tensor.row(k) = noisy.row(perm[static_cast<std::size_t>(k)]);
                    n.attributes.emplace(std::string(attr::merges), 0.0);
                    break;
                }
                case NodeType::doc:
                    break;  // text filled once edges exist
                default:
                    n.attributes.emplace("index", static_cast<double>(i));
                    break;
            }
            refresh_embedding(n, spec.dim);
            g.insert_node(std::move(n));
        }
    }

    for (const auto& rule : edge_rules()) {
        std::vector<std::string> sources, targets;
        for (auto t : rule.sources)
            for (int i = 0; i < spec.count(t); ++i) sources.push_back(node_id(t, i));
        for (auto t : rule.targets)
            for (int i = 0; i < spec.count(t); ++i) targets.push_back(node_id(t, i));
        const double density = spec.density(rule.kind);
        if (targets.empty() || density <= 0.0) continue;
        for (const auto& src : sources) {
            const auto key = hash_string(src, derive_seed(seed, 0xed, static_cast<int>(rule.kind)));
            const double whole = std::floor(density);
            const int out_degree = static_cast<int>(whole) + (unit_interval(derive_seed(key, 0)) < density - whole ? 1 : 0);
            for (int k = 0; k < out_degree; ++k) {
                const auto& dst = targets[static_cast<std::size_t>(unit_interval(derive_seed(key, k + 1)) *
                                                                   static_cast<double>(targets.size()))];
                if (dst == src) continue;
                g.insert_edge(Edge{src, dst, rule.kind});
            }
        }
    }

    // Docs start as renderings of their code node; a stale fraction renders
    // an older revision.
    for (const auto& e : doc_pairs(g)) {
        auto& doc = g.mutable_node(e.src);
        if (doc.attributes.contains(attr::text)) continue;
        ArtefactNode code = g.node(e.dst);
        const bool stale = uniform(seed, 0xd0c, hash_string(doc.id)) < spec.stale_doc_fraction;
        if (stale) {
            code.attributes[std::string(attr::perf)] = std::max(0.0, numeric_attr(code.attributes, attr::perf) - 0.25);
            code.attributes[std::string(attr::behavior)] = -1.0;
        }
        doc.attributes[std::string(attr::text)] = join(env.doc_template(code));
        refresh_embedding(doc, g.dim());
    }
    for (auto* doc : g.nodes_of_type(NodeType::doc)) {
        if (doc->attributes.contains(attr::text)) continue;
        auto& d = g.mutable_node(doc->id);
        d.attributes[std::string(attr::text)] = std::string("undocumented");
        refresh_embedding(d, g.dim());
    }

    for (int j = 0; j < spec.probe_count && n_code > 0; ++j) {
        std::vector<std::string> covered;
        for (int k = 0; k < spec.probe_span; ++k)
            covered.push_back(node_id(NodeType::code, static_cast<int>(uniform(seed, 0x9b, j, k) * n_code)));
        env.probes_.push_back(std::move(covered));
    }

    g.attributes[std::string(attr::repro)] = reproducibility(env.rebuild(g, spec.baseline_rebuilds));
    return {std::move(g), std::move(env)};
}

}  // namespace evograph
