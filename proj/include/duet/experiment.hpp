#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "duet/annotation.hpp"
#include "duet/head.hpp"
#include "duet/stats.hpp"
#include "duet/stgcn.hpp"

namespace duet {

/// One experiment: an activity subset, trained backbone then head.
struct SubsetSpec {
    int experiment_id = 0;
    std::vector<int> labels;  // strictly increasing, 2..12 entries in 0..11

    /// Throws ContractError on an invalid label list.
    void validate() const;
};

struct SuiteManifest {
    std::vector<SubsetSpec> experiments;  // unique ids
    SplitRule split = SplitRule::experiment_default();
    std::uint64_t suite_seed = 1;

    void validate() const;
};

struct ExperimentConfig {
    StgcnConfig backbone = StgcnConfig::desk();
    HeadConfig head;
};

struct ExperimentResult {
    int experiment_id = 0;
    std::vector<int> labels;
    double stgcn_accuracy = 0.0;  // percent
    double cnn_accuracy = 0.0;    // percent
    bool failed = false;          // sentinel row: accuracies are NaN
    std::string error;            // why, for failed rows; not serialised

    /// Equal ids, labels and accuracies (NaN sentinels compare equal to each other).
    friend bool operator==(const ExperimentResult& a, const ExperimentResult& b);
};

/// Raised by run_experiment with the experiment id prefixed to the cause.
class ExperimentError : public std::runtime_error {
public:
    ExperimentError(int id, const std::string& what)
        : std::runtime_error("experiment " + std::to_string(id) + ": " + what), id_(id) {}
    [[nodiscard]] int experiment_id() const noexcept { return id_; }

private:
    int id_;
};

/// The thirty reference subsets in order, with pairs CC..01 and CM..10 held out.
SuiteManifest table5_manifest();

/// Uniform size in [min_size, max_size], then a uniform combination of that many labels.
/// Draws holding a single kinesic function are rejected and redrawn.
SubsetSpec sample_random_subset(std::uint64_t& rng, int experiment_id, int min_size = 5, int max_size = 12);

/// `count` random subsets with ids 0..count-1 drawn from one generator seeded with `seed`.
SuiteManifest random_manifest(std::uint64_t seed, int count, int min_size = 5, int max_size = 12);

/// Trains the backbone on the subset's train names (container.xsub_train filtered to the
/// subset) and selects on its test names, freezes it, then trains the head on the train
/// features with function labels from the taxonomy and the same selection rule. `seed`
/// replaces both configs' seeds. Failures are rethrown as ExperimentError.
ExperimentResult run_experiment(const SubsetSpec& spec, const AnnotationContainer& container,
                                const ExperimentConfig& config, std::uint64_t seed);

using ResultCallback = std::function<void(const ExperimentResult&)>;

/// Re-splits the container's samples with manifest.split, then runs every experiment in id
/// order with seed suite_seed XOR id. A failed experiment yields a sentinel row and the
/// suite continues.
std::vector<ExperimentResult> run_suite(const SuiteManifest& manifest, const AnnotationContainer& container,
                                        const ExperimentConfig& config, const ResultCallback& on_result = {});

/// Header "experiment,num_interactions,labels,stgcn_acc,cnn_acc"; labels space-separated;
/// accuracies to 17 significant digits, "nan" for sentinels.
std::string results_csv(const std::vector<ExperimentResult>& results);
/// Leading lines starting with '#' are skipped. Throws FormatError on a malformed table.
std::vector<ExperimentResult> parse_results_csv(const std::string& text);

/// Accuracy pairs of the successful rows.
stats::AccuracyPairs accuracy_pairs(const std::vector<ExperimentResult>& results);

/// {"experiments": [{"id": 0, "labels": [...]}, ...], "split": {...}, "suite_seed": 1}, or
/// {"table5": true, ...} for the reference subsets, or {"random": {"seed", "count", "min_size",
/// "max_size"}, ...}. Exactly one source of experiments; unknown keys raise ParseError.
SuiteManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json manifest_to_json(const SuiteManifest& m);

nlohmann::json experiment_config_to_json(const ExperimentConfig& c);
/// Keys "backbone" and "head", each optional; unknown keys are rejected with ParseError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

}  // namespace duet
