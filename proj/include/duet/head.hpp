#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "duet/nn.hpp"

namespace duet {

/// Function classifier over frozen dyad features. Each feature vector is read as a
/// single-channel sequence: conv -> ReLU -> conv -> ReLU -> flatten -> dense (dropout) -> ReLU
/// -> dense (linear) -> dense to the function count -> softmax.
struct HeadConfig {
    std::vector<int> conv_channels = {64, 128};
    int conv_kernel = 3;  // stride 1, zero padding keeps the length
    int dense_width = 256;
    double dropout = 0.5;  // first dense layer only
    double lr0 = 0.01;
    double lr_decay = 0.1;
    int lr_step = 10;
    double momentum = 0.9;
    double weight_decay = 1e-4;
    int epochs = 50;
    int batch_size = 16;
    std::uint64_t seed = 1;
    /// Standardise each feature dimension with training-set statistics before the first conv.
    bool standardize = true;

    /// Throws ContractError on inconsistent fields.
    void validate() const;
};

nlohmann::json head_config_to_json(const HeadConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected with ParseError.
HeadConfig head_config_from_json(const nlohmann::json& j);

struct HeadModel {
    HeadConfig config;
    int feature_dim = 0;
    std::vector<int> class_functions;  // dense output index -> KinesicFunction value
    nn::ParamSet params;

    [[nodiscard]] int num_functions() const { return static_cast<int>(class_functions.size()); }
};

/// He-uniform weights for layers followed by ReLU, 1/sqrt(fan-in) for the two linear ones,
/// zero biases, identity standardisation. Needs 2 to 5 functions.
HeadModel init_head(const HeadConfig& config, int feature_dim, std::vector<int> class_functions, std::uint64_t seed);

/// Evaluation-mode logits, B x num_functions. Throws ContractError if features are not B x feature_dim.
nn::Matrix head_logits(const HeadModel& model, const nn::Matrix& features);
/// Softmax of head_logits; rows sum to one.
nn::Matrix head_forward(const HeadModel& model, const nn::Matrix& features);
/// Predicted KinesicFunction values.
std::vector<int> head_predict(const HeadModel& model, const nn::Matrix& features);
/// Top-1 accuracy against KinesicFunction values. Throws ContractError on a length mismatch or
/// empty input; labels the head cannot emit count as wrong.
double head_evaluate(const HeadModel& model, const nn::Matrix& features, const std::vector<int>& functions);

struct HeadEpoch {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct HeadTrainResult {
    HeadModel model;  // parameters from the best validation epoch (earliest on ties)
    std::vector<HeadEpoch> curve;
    double val_accuracy = 0.0;
    int best_epoch = 0;
};

/// Labels are KinesicFunction values; output classes are the sorted distinct functions of both
/// sets. Throws ContractError if the training labels hold a single function and TrainingError
/// on a non-finite loss.
HeadTrainResult head_train(const HeadConfig& config, const nn::Matrix& train_features,
                           const std::vector<int>& train_functions, const nn::Matrix& val_features,
                           const std::vector<int>& val_functions);

/// Training-mode loss (dense labels 0..F-1) and its gradient under a fixed dropout mask.
double head_loss_and_grad(const HeadModel& model, const nn::Matrix& features, const std::vector<int>& dense_labels,
                          std::uint64_t dropout_seed, nn::Grads* grads);

/// Analytic gradients against central differences on `count` parameters of a fresh head.
nn::GradCheckResult head_gradient_check(const HeadConfig& config, const nn::Matrix& features,
                                        const std::vector<int>& dense_labels, int num_functions, double epsilon,
                                        int count = 128, std::uint64_t seed = 1);

nlohmann::json head_checkpoint(const HeadModel& model);
/// Throws ParseError on schema violations.
HeadModel head_from_checkpoint(const nlohmann::json& doc);
void save_head(const std::filesystem::path& path, const HeadModel& model,
               const nlohmann::json& provenance = nlohmann::json::object());
HeadModel load_head(const std::filesystem::path& path);

/// Frozen backbone features of named samples with their split membership.
struct FeatureTable {
    std::vector<std::string> names;
    std::vector<int> activity_labels;
    std::vector<bool> is_train;
    nn::Matrix features;  // one row per name

    /// Throws ContractError if the columns disagree in length.
    void validate() const;
    /// Rows whose is_train flag equals `train`.
    [[nodiscard]] FeatureTable subset(bool train) const;
    /// KinesicFunction values of the activity labels.
    [[nodiscard]] std::vector<int> functions() const;
};

/// Header "name,split,activity_label,f0,...,f{D-1}"; split is "train" or "test"; values to 17
/// significant digits so parsing restores them exactly.
std::string feature_table_csv(const FeatureTable& t);
/// Leading '#' lines are skipped. Throws FormatError on a malformed table.
FeatureTable parse_feature_table_csv(const std::string& text);

struct Projection2d {
    nn::Matrix coords;  // N x 2
    /// Empty unless the input had no spread; the coordinates are then all zero.
    std::string warning;
};

/// Centred projection onto the top two principal directions, each signed so that its
/// largest-magnitude component is positive. Directions with no variance project to exactly
/// zero. Throws ContractError if N < 2.
Projection2d project_features_2d(const nn::Matrix& features);

/// CSV with header "name,x,y,activity_label,function"; function is the canonical name.
std::string projection_csv(const std::vector<std::string>& names, const nn::Matrix& coords,
                           const std::vector<int>& activity_labels);

}  // namespace duet
