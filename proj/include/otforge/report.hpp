#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "otforge/protocol.hpp"

namespace otforge::report {

// Run report shared by the CLI and the acceptance suite. Thread counts are
// deliberately excluded: identical config and seed must give identical bytes.
nlohmann::json protocol_run_report(const std::string& protocol_name,
                                   const protocol::EstimateConfig& config,
                                   const protocol::TrialStats& stats);

// Serialization used for every report file: 2-space indent, trailing newline.
std::string render(const nlohmann::json& j);

void write_file(const std::string& path, const std::string& content);

}  // namespace otforge::report
