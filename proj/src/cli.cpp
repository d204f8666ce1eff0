#include "evograph/cli.hpp"

#include "evograph/config.hpp"
#include "evograph/error.hpp"
#include "evograph/outputs.hpp"
#include "evograph/scenarios.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

namespace evograph {

namespace {

bool is_config_error(Errc code) {
    switch (code) {
        case Errc::InvalidConfig:
        case Errc::InvalidSpec:
        case Errc::UnknownEventKind:
        case Errc::OutOfRangeEvent:
        case Errc::UnknownScenario:
            return true;
        default:
            return false;
    }
}

RunConfig load(const std::string& path, const std::vector<std::string>& overrides,
               std::optional<std::uint64_t> seed = std::nullopt) {
    auto flat = read_config_file(path);
    for (const auto& o : overrides) apply_override(flat, o);
    if (seed) flat["engine.seed"] = std::to_string(*seed);
    try {
        return build_config(flat);
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}: {}", path, e.detail()));
    }
}

int report(const Error& e, std::ostream& err) {
    err << "error: " << e.what() << '\n';
    return is_config_error(e.code()) ? kExitConfig : kExitRuntime;
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err, std::istream& in) {
    RunConfig config;
    try {
        config = load(options.config_path, options.overrides, options.seed);
        if (options.out_dir) config.output_dir = *options.out_dir;
    } catch (const Error& e) {
        return report(e, err);
    }
    if (options.approve) {
        config.engine.approve = [&out, &in](int generation, const ArtefactGraph& candidate, const GateReport& gate) {
            out << fmt::format("generation {}: approve rollout of {} (latency {:.3f} ms, drift {:.3f})? [y/N] ",
                               generation, candidate.id, gate.measured.latency_ms, gate.measured.drift)
                << std::flush;
            std::string answer;
            if (!std::getline(in, answer)) return false;
            return answer == "y" || answer == "Y" || answer == "yes";
        };
    }
    try {
        const auto outcome = execute(config);
        write_run_outputs(config.output_dir, outcome.result, effective_config(config));
        const auto& last = outcome.result.records.back();
        out << fmt::format("{} generations, {} rollouts, final best utility {:.6f}, archive {}, outputs in {}\n",
                           outcome.result.records.size(), outcome.result.rollout.history.size(), last.best_utility,
                           last.archive_size, config.output_dir);
        return kExitOk;
    } catch (const Error& e) {
        return report(e, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

int cmd_validate(const std::string& config_path, const std::vector<std::string>& overrides, std::ostream& out,
                 std::ostream& err) {
    try {
        out << effective_config(load(config_path, overrides));
        return kExitOk;
    } catch (const Error& e) {
        return report(e, err);
    }
}

int cmd_scenario(const std::string& name, std::ostream& out, std::ostream& err, int threads) {
    try {
        return run_scenario(name, out, threads) ? kExitOk : kExitRuntime;
    } catch (const Error& e) {
        return report(e, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
    CLI::App app{"Graph evolution of software artefacts against a synthetic estate"};
    app.require_subcommand(1);

    RunOptions run_options;
    std::uint64_t seed = 0;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run an experiment and write its outputs");
    run->add_option("--config", run_options.config_path, "Configuration file (INI or JSON)")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides engine.seed)");
    run->add_option("--override", run_options.overrides, "section.key=value, repeatable");
    auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    run->add_flag("--approve", run_options.approve, "Ask before each rollout that needs approval");

    std::string validate_path;
    std::vector<std::string> validate_overrides;
    auto* validate = app.add_subcommand("validate", "Check a configuration and print its effective form");
    validate->add_option("config", validate_path, "Configuration file")->required();
    validate->add_option("--override", validate_overrides, "section.key=value, repeatable");

    std::string scenario_name;
    int threads = 1;
    auto* scenario = app.add_subcommand("scenario", "Run a canned experiment and print pass/fail");
    scenario->add_option("name", scenario_name, "adaptation | ablation-wm | ablation-cp | ablation-novelty | bandit-convergence")
        ->required();
    scenario->add_option("--threads", threads, "Worker threads for candidate evaluation (0 = all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (run->parsed()) {
        if (*seed_opt) run_options.seed = seed;
        if (*out_opt) run_options.out_dir = out_dir;
        return cmd_run(run_options, out, err, in);
    }
    if (validate->parsed()) return cmd_validate(validate_path, validate_overrides, out, err);
    return cmd_scenario(scenario_name, out, err, threads);
}

}  // namespace evograph
