#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/annotation.hpp"
#include "duet/experiment.hpp"
#include "duet/synthgen.hpp"

namespace duet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitContract = 1;  // validation, contract or usage failure
inline constexpr int kExitIo = 2;        // missing inputs, unwritable outputs

inline constexpr const char* kToolVersion = "0.1.0";

/// The single configuration document. Every section is optional; unknown keys anywhere are
/// rejected before any stage runs.
struct RunConfig {
    synth::SynthConfig synth;
    SplitRule split = SplitRule::experiment_default();
    ExperimentConfig stages;  // backbone and head
    std::optional<SuiteManifest> suite;
    double alpha = 0.05;
    nlohmann::json source = nlohmann::json::object();  // the document as read, for hashing

    /// --seed replaces the synth, backbone, head and suite seeds.
    void override_seed(std::uint64_t seed);
};

/// Throws ParseError on schema violations.
RunConfig run_config_from_json(const nlohmann::json& j);

/// {"tool", "version", "command", "config_hash", "seed", "created"}. Only "created" varies
/// between identical invocations.
nlohmann::json provenance(const std::string& command, const RunConfig& config, std::optional<std::uint64_t> seed);

/// Replaces the provenance creation time in serialized artifacts with a fixed marker, so that
/// reruns can be compared byte for byte.
std::string strip_timestamps(const std::string& artifact);

/// Entry point: tool <command> [--config PATH] [--out PATH] [--seed N] [--root PATH] ...
/// Returns kExitOk, kExitContract or kExitIo.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace duet::cli
