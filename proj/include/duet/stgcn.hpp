#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/annotation.hpp"
#include "duet/graph.hpp"
#include "duet/nn.hpp"

namespace duet {

struct StgcnConfig {
    std::vector<int> unit_channels = {64, 64, 64, 128, 128, 128, 256, 256, 256};
    std::vector<int> unit_strides = {1, 1, 1, 2, 1, 1, 2, 1, 1};
    int temporal_kernel = 9;
    double dropout = 0.5;
    double lr0 = 0.01;
    double lr_decay = 0.1;
    int lr_step = 10;  // epochs between decays
    double momentum = 0.9;
    double weight_decay = 1e-4;
    int epochs = 50;
    int batch_size = 16;
    std::uint64_t seed = 1;
    int frame_step = 1;  // input frame t reads source frame t * frame_step
    int frames = 91;     // after subsampling, inputs are cropped or zero-padded to this length
    /// Re-centre and heading-align each dyad (canonicalize_dyad) before standardisation.
    bool canonicalize = true;
    bool residual = true;
    /// Drops batch norm, ReLU and dropout: the network becomes linear in its input.
    bool linear = false;
    PartitionStrategy partition = PartitionStrategy::Uniform;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    /// 64/128/256 channels, nine units, 512-wide dyad feature.
    static StgcnConfig paper();
    /// Nine units at one eighth of the width (64-wide feature) on every second frame, without
    /// dropout: at this width a 0.5 drop rate stalls training.
    static StgcnConfig desk();
    /// Two units of four channels, for gradient checks.
    static StgcnConfig tiny();

    /// Throws ContractError on inconsistent fields.
    void validate() const;
    /// Per-subject pooled channels times the two subjects.
    [[nodiscard]] int feature_dim() const { return 2 * unit_channels.back(); }
};

nlohmann::json stgcn_config_to_json(const StgcnConfig& c);
/// An optional "preset" (paper, desk, tiny) is applied first; other missing keys keep the
/// preset's values. Unknown keys are rejected with ParseError.
StgcnConfig stgcn_config_from_json(const nlohmann::json& j);

struct StgcnModel {
    StgcnConfig config;
    SkeletonGraph graph;
    std::vector<int> class_labels;  // dense output index -> activity label
    nn::ParamSet params;

    [[nodiscard]] int num_classes() const { return static_cast<int>(class_labels.size()); }
};

/// Fresh parameters: fan-in uniform convolutions, unit batch-norm scales, zero offsets,
/// identity input standardisation.
StgcnModel init_stgcn(const StgcnConfig& config, const SkeletonGraph& graph, std::vector<int> class_labels,
                      std::uint64_t seed);

using KeypointBatch = std::vector<const KeypointArray*>;

/// Evaluation-mode logits, B x num_classes.
nn::Matrix forward(const StgcnModel& model, const KeypointBatch& batch);
/// Evaluation-mode dyad features, B x feature_dim: subject 0's pooled channels, then subject 1's.
nn::Matrix extract_features(const StgcnModel& model, const KeypointBatch& batch);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
};

struct StgcnTrainResult {
    StgcnModel model;  // parameters from the best validation epoch (earliest on ties)
    std::vector<EpochRecord> curve;
    double val_accuracy = 0.0;
    int best_epoch = 0;
};

/// Trains on container.xsub_train, validates on container.xsub_value. Output classes are the
/// sorted distinct activity labels of both lists. Throws TrainingError on a non-finite loss.
StgcnTrainResult train_stgcn(const StgcnConfig& config, const SkeletonGraph& graph,
                             const AnnotationContainer& container);
/// Same, on explicit name lists drawn from container.annotation.
StgcnTrainResult train_stgcn(const StgcnConfig& config, const SkeletonGraph& graph,
                             const AnnotationContainer& container, const std::vector<std::string>& train_names,
                             const std::vector<std::string>& val_names);

/// Predicted activity labels for the named records.
std::vector<int> predict(const StgcnModel& model, const AnnotationContainer& container,
                         const std::vector<std::string>& names);
/// Top-1 accuracy in [0, 1]; records whose label the model cannot emit count as wrong.
double evaluate(const StgcnModel& model, const AnnotationContainer& container,
                const std::vector<std::string>& names);
/// Features for the named records, one row each.
nn::Matrix extract_features(const StgcnModel& model, const AnnotationContainer& container,
                            const std::vector<std::string>& names);

/// Training-mode loss and its analytic gradient with a fixed dropout mask.
double stgcn_loss_and_grad(const StgcnModel& model, const KeypointBatch& batch, const std::vector<int>& labels,
                           std::uint64_t dropout_seed, nn::Grads* grads);

/// Analytic gradients against central differences on `count` random parameters of a freshly
/// initialised model. Input standardisation statistics come from the batch itself.
nn::GradCheckResult stgcn_gradient_check(const StgcnConfig& config, const SkeletonGraph& graph,
                                         const std::vector<KeypointArray>& batch, const std::vector<int>& labels,
                                         int num_classes, double epsilon, int count = 128,
                                         std::uint64_t seed = 1);

nlohmann::json stgcn_checkpoint(const StgcnModel& model);
/// Throws ParseError on schema violations and ContractError if the graph digest disagrees.
StgcnModel stgcn_from_checkpoint(const nlohmann::json& doc);
void save_stgcn(const std::filesystem::path& path, const StgcnModel& model,
                const nlohmann::json& provenance = nlohmann::json::object());
StgcnModel load_stgcn(const std::filesystem::path& path);

}  // namespace duet
