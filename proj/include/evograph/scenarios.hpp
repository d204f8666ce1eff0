#pragma once

#include "evograph/config.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace evograph {

inline constexpr std::array<std::string_view, 5> kScenarioNames = {"adaptation", "ablation-wm", "ablation-cp",
                                                                   "ablation-novelty", "bandit-convergence"};

/// Reference-estate run configuration used by the canned scenarios.
RunConfig scenario_config(std::uint64_t seed, int n, int T);

struct RunOutcome {
    RunResult result;
    SyntheticEnvironment env;
};

/// Generates the estate for `config` and runs the engine on it.
RunOutcome execute(const RunConfig& config);

struct AdaptationTrial {
    std::uint64_t seed = 0;
    double latency_before = 0.0;  // production latency at the shift generation
    double latency_after = 0.0;   // three generations later
    double min_security = 0.0;    // normalized, over the whole run
    double min_freshness = 0.0;
    int rollouts = 0;
    bool passed = false;
};

inline constexpr int kShiftGeneration = 10;
inline constexpr int kAdaptationHorizon = 3;
inline constexpr double kSecurityFloor = 0.7;
inline constexpr double kFreshnessFloor = 0.8;

AdaptationTrial adaptation_trial(std::uint64_t seed, int threads = 1);

enum class Ablation : std::uint8_t { wm, cp, novelty };

struct AblationTrial {
    std::uint64_t seed = 0;
    double full = 0.0;     // measured quantity with every component on
    double ablated = 0.0;  // same quantity with the component removed
    bool passed = false;
};

inline constexpr int kAblationPopulation = 32;
inline constexpr int kAblationGenerations = 25;

/// Archive size (novelty), final rolled-out latency (cp) or final best
/// utility (wm), each with and without the component.
AblationTrial ablation_trial(Ablation ablation, std::uint64_t seed, int threads = 1);

struct BanditTrial {
    std::uint64_t seed = 0;
    double l1_error = 0.0;
    bool passed = false;
};

inline constexpr int kBanditUpdates = 2000;
inline constexpr double kBanditNoise = 0.01;
inline constexpr double kBanditTolerance = 0.1;

/// Stationary bandit: F uniform on [0,1]^6, w* ~ Dirichlet(1), reward
/// w*.F + N(0, 0.01^2), eta 0.05.
BanditTrial bandit_trial(std::uint64_t seed);

/// Runs a named scenario over seeds 1..10 (bandit: 1..100), prints one line
/// per seed and a summary. Returns whether the scenario's pass bar is met.
/// Throws UnknownScenario.
bool run_scenario(std::string_view name, std::ostream& out, int threads = 1);

}  // namespace evograph
