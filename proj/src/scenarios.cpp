#include "evograph/scenarios.hpp"

#include "evograph/bandit.hpp"
#include "evograph/error.hpp"
#include "evograph/hashing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <random>

namespace evograph {

RunConfig scenario_config(std::uint64_t seed, int n, int T) {
    RunConfig config;
    config.estate_preset = "reference";
    config.estate = estate_preset("reference");
    config.estate_seed = seed;
    config.engine.seed = seed;
    config.engine.n = n;
    config.engine.T = T;
    return config;
}

RunOutcome execute(const RunConfig& config) {
    auto [g0, env] = generate_estate(config.estate, config.estate_seed);
    auto result = run(config.engine, g0, env);
    return {std::move(result), std::move(env)};
}

AdaptationTrial adaptation_trial(std::uint64_t seed, int threads) {
    auto config = scenario_config(seed, 64, kShiftGeneration + kAdaptationHorizon);
    config.engine.threads = threads;
    config.engine.events.push_back(parse_event(fmt::format("{} weight_shift w=0.1,0.5,0.1,0.1,0.1,0.1 pin=P", kShiftGeneration)));
    const auto outcome = execute(config);
    const auto& records = outcome.result.records;

    AdaptationTrial trial;
    trial.seed = seed;
    trial.latency_before = records[kShiftGeneration - 1].production_metrics.P;
    trial.latency_after = records[kShiftGeneration + kAdaptationHorizon - 1].production_metrics.P;
    trial.min_security = 1.0;
    trial.min_freshness = 1.0;
    for (const auto& r : records) {
        trial.min_security = std::min(trial.min_security, r.production_fitness[kS]);
        trial.min_freshness = std::min(trial.min_freshness, r.production_fitness[kD]);
        trial.rollouts += r.rolled_out ? 1 : 0;
    }
    trial.passed = trial.latency_after < trial.latency_before && trial.min_security >= kSecurityFloor &&
                   trial.min_freshness >= kFreshnessFloor;
    return trial;
}

AblationTrial ablation_trial(Ablation ablation, std::uint64_t seed, int threads) {
    auto full = scenario_config(seed, kAblationPopulation, kAblationGenerations);
    full.engine.threads = threads;
    auto reduced = full;
    switch (ablation) {
        case Ablation::wm: reduced.engine.ablations.disable_wm = true; break;
        case Ablation::cp: reduced.engine.ablations.disable_cp = true; break;
        case Ablation::novelty: reduced.engine.ablations.disable_novelty = true; break;
    }
    const auto a = execute(full);
    const auto b = execute(reduced);
    const auto& last_a = a.result.records.back();
    const auto& last_b = b.result.records.back();

    AblationTrial trial;
    trial.seed = seed;
    switch (ablation) {
        case Ablation::novelty:
            trial.full = static_cast<double>(last_a.archive_size);
            trial.ablated = static_cast<double>(last_b.archive_size);
            trial.passed = trial.ablated < trial.full;
            break;
        case Ablation::cp:
            trial.full = last_a.production_metrics.P;
            trial.ablated = last_b.production_metrics.P;
            trial.passed = trial.ablated > trial.full;
            break;
        case Ablation::wm:
            trial.full = last_a.best_utility;
            trial.ablated = last_b.best_utility;
            trial.passed = trial.ablated < trial.full;
            break;
    }
    return trial;
}

BanditTrial bandit_trial(std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 0xba));
    std::gamma_distribution<double> gamma(1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, kBanditNoise);

    WeightVector target;
    for (auto& x : target) x = gamma(rng);
    target /= target.sum();

    BanditState state = BanditState::uniform(kFitnessSize, kDefaultBanditEta);
    for (int step = 0; step < kBanditUpdates; ++step) {
        FitnessVector f;
        for (auto& x : f) x = unit(rng);
        state = bandit_update(state, f, target.dot(f) + noise(rng));
    }
    BanditTrial trial;
    trial.seed = seed;
    trial.l1_error = (state.w - target).lpNorm<1>();
    trial.passed = trial.l1_error < kBanditTolerance;
    return trial;
}

bool run_scenario(std::string_view name, std::ostream& out, int threads) {
    constexpr int kSeeds = 10;
    if (name == "adaptation") {
        int passed = 0;
        for (int s = 1; s <= kSeeds; ++s) {
            const auto t = adaptation_trial(static_cast<std::uint64_t>(s), threads);
            passed += t.passed ? 1 : 0;
            out << fmt::format("seed {:2}: latency gen {} = {:.3f} ms, gen {} = {:.3f} ms, min S = {:.3f}, min D = {:.3f}, "
                               "rollouts = {} {}\n",
                               s, kShiftGeneration, t.latency_before, kShiftGeneration + kAdaptationHorizon,
                               t.latency_after, t.min_security, t.min_freshness, t.rollouts, t.passed ? "PASS" : "FAIL");
        }
        const bool ok = passed >= 8;
        out << fmt::format("adaptation: {}/{} seeds passed (need 8) {}\n", passed, kSeeds, ok ? "PASS" : "FAIL");
        return ok;
    }
    if (name == "ablation-wm" || name == "ablation-cp" || name == "ablation-novelty") {
        const auto ablation = name == "ablation-wm" ? Ablation::wm : name == "ablation-cp" ? Ablation::cp : Ablation::novelty;
        const char* quantity = ablation == Ablation::wm ? "best utility"
                               : ablation == Ablation::cp ? "rolled-out latency ms"
                                                          : "archive size";
        int passed = 0;
        for (int s = 1; s <= kSeeds; ++s) {
            const auto t = ablation_trial(ablation, static_cast<std::uint64_t>(s), threads);
            passed += t.passed ? 1 : 0;
            out << fmt::format("seed {:2}: {} full = {:.6g}, ablated = {:.6g} {}\n", s, quantity, t.full, t.ablated,
                               t.passed ? "PASS" : "FAIL");
        }
        const bool ok = passed >= 7;
        out << fmt::format("{}: {}/{} seeds in the expected direction (need 7) {}\n", name, passed, kSeeds,
                           ok ? "PASS" : "FAIL");
        return ok;
    }
    if (name == "bandit-convergence") {
        constexpr int kBanditSeeds = 100;
        int passed = 0;
        double worst = 0.0;
        for (int s = 1; s <= kBanditSeeds; ++s) {
            const auto t = bandit_trial(static_cast<std::uint64_t>(s));
            passed += t.passed ? 1 : 0;
            worst = std::max(worst, t.l1_error);
        }
        const bool ok = passed >= 95;
        out << fmt::format("bandit-convergence: {}/{} seeds with |w - w*|_1 < {} after {} updates (worst {:.4g}) {}\n",
                           passed, kBanditSeeds, kBanditTolerance, kBanditUpdates, worst, ok ? "PASS" : "FAIL");
        return ok;
    }
    throw Error(Errc::UnknownScenario, fmt::format("unknown scenario '{}'", name));
}

}  // namespace evograph
