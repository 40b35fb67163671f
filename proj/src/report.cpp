#include "otforge/report.hpp"

#include <fstream>
#include <stdexcept>

namespace otforge::report {

nlohmann::json protocol_run_report(const std::string& protocol_name,
                                   const protocol::EstimateConfig& config,
                                   const protocol::TrialStats& stats) {
    nlohmann::json cfg{{"protocol", protocol_name},
                       {"n", config.params.n},
                       {"delta", config.params.delta},
                       {"trials", config.trials},
                       {"seed", config.master_seed}};
    if (config.variant != protocol::Variant::P3) {
        cfg["p1"] = config.params.p1;
        cfg["q1"] = config.params.q1;
        cfg["T"] = config.params.rounds;
        cfg["schedule"] = protocol::Schedule::derive(config.params).to_json();
    } else {
        const auto dims = protocol::protocol3_dims(config.params.n, config.params.delta);
        cfg["schedule"] = nlohmann::json{{"pool_erase", dims.pool_erase},
                                         {"pool_pairs", dims.pool_pairs},
                                         {"phase1_key_bits", dims.phase1_key_bits},
                                         {"phase2_key_bits", dims.phase2_key_bits}};
    }
    if (config.options.decode_mode == protocol::DecodeMode::Genie)
        cfg["decode_mode"] = "genie-diagnostic";

    nlohmann::json results{{"aborts", stats.aborts},
                           {"abort_fraction",
                            static_cast<double>(stats.aborts) / static_cast<double>(stats.trials)},
                           {"decode_failures", stats.decode_failures},
                           {"key_mismatches", stats.key_mismatches},
                           {"failures", stats.failures},
                           {"error_or_abort_fraction", stats.estimate},
                           {"wilson95", {stats.wilson.lo, stats.wilson.hi}},
                           {"mean_rate_completed", stats.mean_rate_completed},
                           {"mean_rate_all", stats.mean_rate_all},
                           {"mean_phase_rates", stats.mean_phase_rates}};
    return nlohmann::json{{"command", "run"}, {"config", cfg}, {"results", results}};
}

std::string render(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace otforge::report
