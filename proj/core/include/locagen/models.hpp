#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "locagen/dataset.hpp"

namespace locagen::ml {

// ---------------------------------------------------------------- forest --

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<int> histogram;  // leaf only: class counts of training samples
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    // class index with the largest count at the reached leaf (ties go to the
    // lowest class)
    int predict(const std::array<double, data::kNumFeatures>& features) const;
    const TreeNode& leaf_for(const std::array<double, data::kNumFeatures>& features) const;
};

struct RfParams {
    int n_trees = 100;
    int max_depth = 12;
    int min_samples_leaf = 2;
    int n_bins = 12;            // 12 or 24 bin labeling
    bool bootstrap = true;
    int features_per_split = 0;  // 0 -> floor(sqrt(n_features))
    std::uint64_t seed = 0;
    int n_threads = 1;
};

struct RandomForest {
    std::vector<DecisionTree> trees;
    RfParams params;
    int n_classes = 0;

    // majority vote over trees; ties broken by the lowest bin index
    int predict(const std::array<double, data::kNumFeatures>& features) const;
};

// ------------------------------------------------------------------- mlp --

struct MlpParams {
    std::vector<int> hidden{64, 64};
    int epochs = 300;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    bool raw_angle = false;  // regress degrees directly instead of (sin, cos)
};

// Fully-connected network, tanh hidden activations, linear outputs. The
// default head emits (sin theta, cos theta).
struct MlpRegressor {
    std::vector<int> layer_sizes;                 // e.g. {3, 64, 64, 2}
    std::vector<std::vector<double>> weights;     // per layer, row-major [out][in]
    std::vector<std::vector<double>> biases;
    bool raw_angle = false;

    std::vector<double> forward(const std::array<double, data::kNumFeatures>& input) const;
    std::size_t parameter_count() const;
};

// Loss and gradients of the batch mean squared error; exposed so gradients
// can be checked against finite differences.
struct MlpGradients {
    double loss = 0.0;
    std::vector<std::vector<double>> weight_grads;
    std::vector<std::vector<double>> bias_grads;
};

MlpGradients mlp_loss_and_gradients(const MlpRegressor& net,
                                    const std::vector<std::array<double, data::kNumFeatures>>& inputs,
                                    const std::vector<std::array<double, 2>>& targets);

// ----------------------------------------------------------------- model --

struct TrainedModel {
    enum class Kind { random_forest, mlp };
    Kind kind = Kind::random_forest;
    data::FeatureScaler scaler{};
    RandomForest forest{};
    MlpRegressor mlp{};
    MlpParams mlp_params{};

    std::uint64_t seed = 0;
    std::uint64_t dataset_fingerprint = 0;
    std::vector<double> epoch_losses;  // mlp training curve
};

TrainedModel train_rf(const std::vector<data::LabeledSample>& train, const RfParams& params);

struct RfPrediction {
    int bin = 0;
    double angle_deg = 0.0;  // bin center
};
RfPrediction predict_rf(const TrainedModel& model,
                        const std::array<double, data::kNumFeatures>& raw_features);

// Mini-batch Adam on (sin, cos) targets; throws std::runtime_error naming
// the epoch if the loss diverges to NaN.
TrainedModel train_mlp(const std::vector<data::LabeledSample>& train, const MlpParams& params);

double predict_mlp(const TrainedModel& model,
                   const std::array<double, data::kNumFeatures>& raw_features);

// Dispatch on model kind; forest predictions are bin centers.
double predict_azimuth(const TrainedModel& model,
                       const std::array<double, data::kNumFeatures>& raw_features);

// Mean over min(|delta|, 360 - |delta|), in degrees.
double circular_mae(const std::vector<double>& predicted_deg,
                    const std::vector<double>& truth_deg);

// Versioned text container; round-trips every parameter bit-exactly.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

// FNV-1a hash over the serialized parameters.
std::uint64_t model_fingerprint(const TrainedModel& model);

}  // namespace locagen::ml
