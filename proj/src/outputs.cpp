#include "evograph/outputs.hpp"

#include "evograph/error.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>

namespace evograph {

namespace {

template <typename V>
nlohmann::json vector_json(const V& v) {
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, fmt::format("cannot write {}", path.string()));
    return out;
}

}  // namespace

nlohmann::json to_json(const GateReport& report) {
    nlohmann::json clauses = nlohmann::json::object();
    for (std::size_t i = 0; i < kClauseCount; ++i) clauses[std::string(kClauseNames[i])] = report.clauses[i];
    return {{"passed", report.passed},
            {"clauses", clauses},
            {"measured",
             {{"test_rate", report.measured.test_rate},
              {"contracts_ok", report.measured.contracts_ok},
              {"latency_ms", report.measured.latency_ms},
              {"drift", report.measured.drift}}}};
}

nlohmann::json to_json(const GenerationRecord& r) {
    nlohmann::json fitness = nlohmann::json::array();
    for (const auto& f : r.population_fitness) fitness.push_back(vector_json(f));
    nlohmann::json ops = nlohmann::json::object();
    for (auto kind : kAllOperatorKinds) {
        const auto k = static_cast<std::size_t>(kind);
        ops[std::string(to_string(kind))] = {{"attempted", r.operators.attempted[k]}, {"accepted", r.operators.accepted[k]}};
    }
    const auto& m = r.production_metrics;
    return {{"gen", r.generation},
            {"events", r.events},
            {"weights", vector_json(r.weights)},
            {"bandit_updated", r.bandit_updated},
            {"population_ids", r.population_ids},
            {"population_fitness", fitness},
            {"best_id", r.best_id},
            {"best_utility", r.best_utility},
            {"mean_utility", r.mean_utility},
            {"gate", to_json(r.gate)},
            {"locked_touched", r.locked_touched},
            {"risk_estimate", r.risk_estimate},
            {"rolled_out", r.rolled_out},
            {"reward", r.reward ? nlohmann::json(*r.reward) : nlohmann::json(nullptr)},
            {"production",
             {{"id", r.production_id},
              {"metrics", {{"U", m.U}, {"P", m.P}, {"S", m.S}, {"B", m.B}, {"D", m.D}, {"C", m.C}}},
              {"fitness", vector_json(r.production_fitness)}}},
            {"discounted_return", r.discounted_return},
            {"archive_size", r.archive_size},
            {"operators", ops}};
}

nlohmann::json archive_to_json(const QdArchive& archive) {
    auto out = nlohmann::json::array();
    for (const auto& e : archive.entries())
        out.push_back({{"graph_id", e.graph_id}, {"fitness", vector_json(e.fitness)}, {"descriptor", vector_json(e.descriptor)}});
    return out;
}

void write_metrics_csv(std::ostream& out, const std::vector<GenerationRecord>& records) {
    out << kMetricsCsvHeader << '\n';
    for (const auto& r : records) {
        out << fmt::format("{},{},{}", r.generation, r.best_utility, r.mean_utility);
        for (Eigen::Index i = 0; i < r.weights.size(); ++i) out << fmt::format(",{}", r.weights[i]);
        out << fmt::format(",{},{},{},{}\n", r.gate.passed ? 1 : 0, r.rolled_out ? 1 : 0, r.archive_size,
                           r.discounted_return);
    }
}

void write_events_jsonl(std::ostream& out, const std::vector<GenerationRecord>& records) {
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_run_outputs(const std::string& dir, const RunResult& result, const std::string& effective_config_text) {
    const std::filesystem::path root(dir);
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw Error(Errc::IoError, fmt::format("cannot create {}: {}", dir, ec.message()));
    {
        auto out = open_output(root / "metrics.csv");
        write_metrics_csv(out, result.records);
    }
    {
        auto out = open_output(root / "events.jsonl");
        write_events_jsonl(out, result.records);
    }
    {
        auto out = open_output(root / "archive.json");
        out << archive_to_json(result.archive).dump(1) << '\n';
    }
    {
        auto out = open_output(root / "effective-config.ini");
        out << effective_config_text;
    }
}

}  // namespace evograph
