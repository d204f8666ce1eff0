#include "evograph/engine.hpp"

#include "evograph/error.hpp"
#include "evograph/hashing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

namespace evograph {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double parse_number(std::string_view text, std::string_view what) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw Error(Errc::InvalidConfig, fmt::format("{}: '{}' is not a number", what, text));
    return value;
}

std::vector<double> parse_numbers(std::string_view text, std::string_view what) {
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_number(part, what));
    return out;
}

WeightVector parse_weights(std::string_view text, std::string_view what) {
    const auto values = parse_numbers(text, what);
    if (values.size() != kFitnessSize)
        throw Error(Errc::InvalidConfig, fmt::format("{}: expected {} weights, got {}", what, kFitnessSize, values.size()));
    WeightVector w = Eigen::Map<const WeightVector>(values.data());
    if (!on_simplex(w)) throw Error(Errc::InvalidConfig, fmt::format("{}: weights must lie on the simplex", what));
    return w;
}

std::array<bool, kFitnessSize> parse_pins(std::string_view text) {
    std::array<bool, kFitnessSize> mask{};
    if (text == "none" || text.empty()) return mask;
    for (const auto& name : split(text, ',')) {
        const auto it = std::find(kFitnessNames.begin(), kFitnessNames.end(), name);
        if (it == kFitnessNames.end())
            throw Error(Errc::InvalidConfig, fmt::format("pin: unknown fitness component '{}'", name));
        mask[static_cast<std::size_t>(it - kFitnessNames.begin())] = true;
    }
    return mask;
}

bool parse_bool(std::string_view text, std::string_view what) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw Error(Errc::InvalidConfig, fmt::format("{}: '{}' is not a boolean", what, text));
}

void validate_event(const EngineEvent& event) {
    BanditState bandit = BanditState::uniform(kFitnessSize);
    SafetyPolicy policy;
    struct NullEnvironment final : Environment {
        RawMetrics metrics(const ArtefactGraph&) const override { return {}; }
        double test_pass_rate(const ArtefactGraph&) const override { return 0.0; }
        std::vector<bool> contract_probes(const ArtefactGraph&) const override { return {}; }
        std::vector<bool> behavior_probes(const ArtefactGraph&) const override { return {}; }
        std::vector<std::string> rebuild(const ArtefactGraph&, int) const override { return {}; }
        double reward(const ArtefactGraph&) const override { return 0.0; }
        TransmuteParams transmute_params(const ArtefactNode&) const override { return {}; }
        std::vector<std::string> doc_template(const ArtefactNode&) const override { return {}; }
        PatchProposal propose_patch(const ArtefactGraph&, const std::string&, std::uint64_t) const override { return {}; }
        double model_quality(const Eigen::MatrixXd&) const override { return 0.0; }
        void apply_shock(const Shock& shock) override {
            if (shock.kind != "latency_spike" && shock.kind != "flakiness" && shock.kind != "reward_weights")
                throw Error(Errc::UnknownEventKind, fmt::format("unknown environment shock '{}'", shock.kind));
        }
    } null_env;
    apply_event(event, bandit, policy, null_env);
}

bool better(const Candidate& a, double ua, const Candidate& b, double ub) {
    if (ua != ub) return ua > ub;
    const auto* fa = a.fitness.data();
    const auto* fb = b.fitness.data();
    if (!std::equal(fa, fa + kFitnessSize, fb)) return std::lexicographical_compare(fb, fb + kFitnessSize, fa, fa + kFitnessSize);
    return a.graph.id < b.graph.id;
}

}  // namespace

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::weight_shift: return "weight_shift";
        case EventKind::policy_change: return "policy_change";
        case EventKind::environment_shock: return "environment_shock";
    }
    return "?";
}

std::string EngineEvent::to_string() const {
    std::string out = fmt::format("{} {}", generation, evograph::to_string(kind));
    for (const auto& [k, v] : args) out += fmt::format(" {}={}", k, v);
    return out;
}

EngineEvent parse_event(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string gen, kind;
    if (!(in >> gen >> kind)) throw Error(Errc::InvalidConfig, fmt::format("event '{}': expected '<gen> <kind> ...'", text));
    EngineEvent event;
    const double g = parse_number(gen, "event generation");
    if (g != std::floor(g)) throw Error(Errc::InvalidConfig, fmt::format("event generation '{}' is not an integer", gen));
    event.generation = static_cast<int>(g);
    if (kind == "weight_shift") event.kind = EventKind::weight_shift;
    else if (kind == "policy_change") event.kind = EventKind::policy_change;
    else if (kind == "environment_shock") event.kind = EventKind::environment_shock;
    else throw Error(Errc::UnknownEventKind, fmt::format("unknown event kind '{}'", kind));
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(Errc::InvalidConfig, fmt::format("event argument '{}' is not key=value", token));
        event.args.emplace_back(token.substr(0, eq), token.substr(eq + 1));
    }
    return event;
}

void apply_event(const EngineEvent& event, BanditState& bandit, SafetyPolicy& policy, Environment& env) {
    switch (event.kind) {
        case EventKind::weight_shift: {
            std::optional<WeightVector> w;
            std::optional<std::array<bool, kFitnessSize>> pins;
            for (const auto& [key, value] : event.args) {
                if (key == "w") w = parse_weights(value, "weight_shift.w");
                else if (key == "pin") pins = parse_pins(value);
                else throw Error(Errc::InvalidConfig, fmt::format("weight_shift: unknown argument '{}'", key));
            }
            if (!w && !pins) throw Error(Errc::InvalidConfig, "weight_shift needs w= or pin=");
            if (w) bandit.w = *w;
            if (pins) {
                BanditState::Mask mask(kFitnessSize);
                for (std::size_t i = 0; i < kFitnessSize; ++i) mask[static_cast<Eigen::Index>(i)] = (*pins)[i];
                if (mask.any()) bandit.pinned = mask;
                else bandit.pinned.reset();
            }
            break;
        }
        case EventKind::policy_change: {
            SafetyPolicy next = policy;
            for (const auto& [key, value] : event.args) {
                const auto what = fmt::format("policy_change.{}", key);
                if (key == "tau_test") next.tau_test = parse_number(value, what);
                else if (key == "p_max") next.p_max = parse_number(value, what);
                else if (key == "epsilon") next.epsilon = parse_number(value, what);
                else if (key == "delta") next.delta = parse_number(value, what);
                else if (key == "require_approval") next.require_approval = parse_bool(value, what);
                else if (key == "lock") {
                    for (const auto& id : split(value, ','))
                        if (!id.empty()) next.locked_node_ids.insert(id);
                } else if (key == "unlock") {
                    for (const auto& id : split(value, ',')) next.locked_node_ids.erase(id);
                } else {
                    throw Error(Errc::InvalidConfig, fmt::format("policy_change: unknown argument '{}'", key));
                }
            }
            next.validate();
            policy = std::move(next);
            break;
        }
        case EventKind::environment_shock: {
            if (event.args.empty()) throw Error(Errc::InvalidConfig, "environment_shock needs an argument");
            for (const auto& [key, value] : event.args)
                env.apply_shock(Shock{key, parse_numbers(value, fmt::format("environment_shock.{}", key))});
            break;
        }
    }
}

void EngineConfig::validate() const {
    const auto fail = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
    if (n < 1) fail("engine.n must be >= 1");
    if (T < 1) fail("engine.T must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0)) fail("engine.gamma must lie in [0, 1]");
    if (threads < 0) fail("engine.threads must be >= 0");
    if (risk_window < 1) fail("engine.risk_window must be >= 1");
    if (!(operators.mutation_rate > 0.0 && operators.mutation_rate <= 1.0))
        fail("engine.mutation_rate must lie in (0, 1]");
    if (!(operators.alpha > 0.0)) fail("operators.alpha must be positive");
    if (!operators.theta.allFinite()) fail("operators.theta must be finite");
    if (!(operators.tau_d >= 0.0 && operators.tau_d <= 1.0)) fail("operators.tau_d must lie in [0, 1]");
    if (operators.rebuilds < 1) fail("operators.rebuilds must be >= 1");
    if (!(operators.transmute_threshold > 0.0 && operators.transmute_threshold <= 1.0))
        fail("operators.threshold must lie in (0, 1]");
    if (operators.transmute_max_iters < 1) fail("operators.max_iters must be >= 1");
    if (!std::isfinite(selection.alpha_sel) || selection.alpha_sel < 0.0) fail("selection.alpha_sel must be >= 0");
    if (!std::isfinite(selection.beta_nov) || selection.beta_nov < 0.0) fail("selection.beta_nov must be >= 0");
    if (archive_capacity < 1) fail("selection.capacity must be >= 1");
    if (novelty_k < 1) fail("selection.k must be >= 1");
    if (!(eta > 0.0) || !std::isfinite(eta)) fail("bandit.eta must be positive");
    if (initial_w && (!initial_w->allFinite() || !on_simplex(*initial_w)))
        fail("bandit.initial_w must lie on the simplex");
    if (!(bounds.p_min < bounds.p_max)) fail("metrics.p_min must be below metrics.p_max");
    safety.validate();
    for (const auto& e : events) {
        if (e.generation < 1 || e.generation > T)
            throw Error(Errc::OutOfRangeEvent,
                        fmt::format("event '{}' is scheduled outside generations 1..{}", e.to_string(), T));
        validate_event(e);
    }
}

std::size_t best(std::span<const Candidate> population, const WeightVector& w) {
    if (population.empty()) throw Error(Errc::EmptyPopulation, "best() of an empty population");
    std::size_t winner = 0;
    double top = aggregate_utility(population[0].fitness, w);
    for (std::size_t i = 1; i < population.size(); ++i) {
        const double u = aggregate_utility(population[i].fitness, w);
        if (better(population[i], u, population[winner], top)) {
            winner = i;
            top = u;
        }
    }
    return winner;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(work);
    work();
    pool.clear();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

RunResult run(const EngineConfig& config, const ArtefactGraph& g0, Environment& env) {
    config.validate();

    OperatorConfig op_config = config.operators;
    if (config.ablations.disable_wm) op_config.enabled[static_cast<std::size_t>(OperatorKind::WM)] = false;
    if (config.ablations.disable_cp) op_config.enabled[static_cast<std::size_t>(OperatorKind::CP)] = false;
    std::array<std::unique_ptr<MutationOperator>, kOperatorKindCount> operators;
    for (auto kind : kAllOperatorKinds) operators[static_cast<std::size_t>(kind)] = make_operator(kind, op_config);

    SelectionParams selection = config.selection;
    if (config.ablations.disable_novelty) selection.beta_nov = 0.0;

    BanditState bandit = BanditState::uniform(kFitnessSize, config.eta);
    if (config.initial_w) bandit.w = *config.initial_w;
    if (std::any_of(config.pinned.begin(), config.pinned.end(), [](bool p) { return p; })) {
        BanditState::Mask mask(kFitnessSize);
        for (std::size_t i = 0; i < kFitnessSize; ++i) mask[static_cast<Eigen::Index>(i)] = config.pinned[i];
        bandit.pinned = mask;
    }

    SafetyPolicy policy = config.safety;
    RiskWindow window(config.risk_window);
    QdArchive archive(config.archive_capacity, config.novelty_k, config.novelty_default);
    RolloutState rollout{g0, {}, 0.0};

    const auto evaluate = [&](ArtefactGraph graph) {
        const auto raw = env.metrics(graph);
        Candidate c{std::move(graph), fitness_vector(raw, config.bounds), {}};
        c.graph.attributes[std::string(attr::latency_norm)] = c.fitness[kLatency];
        c.descriptor = descriptor(c.graph);
        return c;
    };

    std::vector<ArtefactGraph> population(static_cast<std::size_t>(config.n), g0);
    std::optional<std::pair<FitnessVector, double>> last_reward;
    std::vector<GenerationRecord> records;
    records.reserve(static_cast<std::size_t>(config.T));
    std::vector<Candidate> survivors;

    for (int t = 1; t <= config.T; ++t) {
        try {
            GenerationRecord rec;
            rec.generation = t;

            for (const auto& event : config.events) {
                if (event.generation != t) continue;
                apply_event(event, bandit, policy, env);
                rec.events.push_back(event.to_string());
            }

            const std::size_t n = population.size();
            std::vector<ArtefactGraph> mutants(n);
            std::vector<OperatorCounts> counts(n);
            parallel_for(n, config.threads, [&](std::size_t i) {
                ArtefactGraph g = population[i];
                const auto kinds = sample_ops(derive_seed(config.seed, t, i, 0x0b5), op_config);
                for (std::size_t k = 0; k < kinds.size(); ++k) {
                    const auto& op = *operators[static_cast<std::size_t>(kinds[k])];
                    if (!op.applicable(g)) continue;
                    auto outcome = op.apply(g, derive_seed(config.seed, t, i, k + 1), env);
                    const auto slot = static_cast<std::size_t>(kinds[k]);
                    ++counts[i].attempted[slot];
                    if (outcome.accepted) ++counts[i].accepted[slot];
                    LineageRecord lineage{t, std::string(to_string(kinds[k])), outcome.accepted, outcome.record.params};
                    lineage.params.emplace("acceptance_probability", outcome.record.acceptance_probability);
                    g = std::move(outcome.graph);
                    g.lineage.push_back(std::move(lineage));
                }
                g.id = fmt::format("t{}.{}", t, i);
                g.generation_born = t;
                mutants[i] = std::move(g);
            });
            for (const auto& c : counts)
                for (std::size_t k = 0; k < kOperatorKindCount; ++k) {
                    rec.operators.attempted[k] += c.attempted[k];
                    rec.operators.accepted[k] += c.accepted[k];
                }

            std::vector<Candidate> pool(2 * n);
            parallel_for(2 * n, config.threads, [&](std::size_t j) {
                pool[j] = evaluate(j < n ? std::move(population[j]) : std::move(mutants[j - n]));
            });

            if (last_reward) {
                bandit = bandit_update(bandit, last_reward->first, last_reward->second);
                rec.bandit_updated = true;
            }
            last_reward.reset();

            std::vector<PoolMember> members;
            members.reserve(pool.size());
            for (const auto& c : pool) members.push_back({c.fitness, c.descriptor, c.graph.id});
            auto selected = select_qd(members, n, selection, archive, derive_seed(config.seed, t, 0x5e1));
            archive = std::move(selected.archive);
            survivors.clear();
            for (auto idx : selected.survivors) survivors.push_back(std::move(pool[idx]));

            const WeightVector w = bandit.w;
            const std::size_t b = best(survivors, w);
            const Candidate& champion = survivors[b];
            rec.weights = w;
            rec.best_id = champion.graph.id;
            rec.best_utility = aggregate_utility(champion.fitness, w);
            double total = 0.0;
            for (const auto& c : survivors) {
                total += aggregate_utility(c.fitness, w);
                rec.population_ids.push_back(c.graph.id);
                rec.population_fitness.push_back(c.fitness);
            }
            rec.mean_utility = total / static_cast<double>(survivors.size());

            const bool preapproved = policy.approved_generations.contains(t);
            rec.gate = gate(champion.graph, rollout.current, policy, env, preapproved);
            if (policy.require_approval && !preapproved && config.approve) {
                bool others = true;
                for (std::size_t c = 0; c < kClauseCount; ++c)
                    if (c != static_cast<std::size_t>(Clause::approval)) others = others && rec.gate.clauses[c];
                if (others && config.approve(t, champion.graph, rec.gate)) {
                    rec.gate.clauses[static_cast<std::size_t>(Clause::approval)] = true;
                    rec.gate.passed = true;
                }
            }
            rec.locked_touched = modified_locked_nodes(champion.graph, rollout.current, policy);
            window.push(rec.gate);
            rec.risk_estimate = window.estimate();

            if (rec.gate.passed && 1.0 - rec.risk_estimate <= policy.delta) {
                rec.rolled_out = true;
                rollout.current = champion.graph;
                rollout.history.push_back(champion.graph);
                rollout.cumulative_return += std::pow(config.gamma, t - 1) * rec.best_utility;
                const double r = env.reward(rollout.current);
                rec.reward = r;
                last_reward.emplace(champion.fitness, r);
            }

            rec.production_id = rollout.current.id;
            rec.production_metrics = env.metrics(rollout.current);
            rec.production_fitness = fitness_vector(rec.production_metrics, config.bounds);
            rec.discounted_return = rollout.cumulative_return;
            rec.archive_size = archive.size();
            records.push_back(std::move(rec));

            population.clear();
            for (const auto& c : survivors) population.push_back(c.graph);
        } catch (const Error& e) {
            throw Error(e.code(), fmt::format("generation {}: {}", t, e.detail()));
        }
    }

    return RunResult{std::move(records), std::move(rollout), std::move(archive), std::move(survivors)};
}

}  // namespace evograph
