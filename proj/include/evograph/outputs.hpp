#pragma once

#include "evograph/engine.hpp"
#include "evograph/selection.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace evograph {

inline constexpr std::string_view kMetricsCsvHeader =
    "gen,best_utility,mean_utility,w_U,w_P,w_S,w_B,w_D,w_C,gate_passed,rolled_out,archive_size,discounted_return";

nlohmann::json to_json(const GateReport& report);
nlohmann::json to_json(const GenerationRecord& record);
nlohmann::json archive_to_json(const QdArchive& archive);

void write_metrics_csv(std::ostream& out, const std::vector<GenerationRecord>& records);
void write_events_jsonl(std::ostream& out, const std::vector<GenerationRecord>& records);

/// Writes metrics.csv, events.jsonl, archive.json and effective-config.ini
/// into `dir`, creating it if needed.
void write_run_outputs(const std::string& dir, const RunResult& result, const std::string& effective_config_text);

}  // namespace evograph
