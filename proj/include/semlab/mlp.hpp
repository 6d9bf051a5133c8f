#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "semlab/forest.hpp"
#include "semlab/rng.hpp"

namespace semlab {

struct MlpConfig {
    std::vector<std::size_t> hidden_layers{100, 100, 100};
    double dropout = 0.5;  // applied after the first hidden layer, training only
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::optional<std::size_t> input_width;  // checked against the data when set
    bool standardize = true;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Fully connected tanh network with a softmax output and cross-entropy loss.
class MlpNetwork {
public:
    MlpNetwork() = default;
    /// Xavier-uniform weights, zero biases.
    MlpNetwork(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs, double dropout,
               Rng& rng);

    std::size_t inputs() const { return weights_.empty() ? 0 : static_cast<std::size_t>(weights_.front().cols()); }
    std::size_t outputs() const { return weights_.empty() ? 0 : static_cast<std::size_t>(weights_.back().rows()); }
    double dropout() const { return dropout_; }

    /// Class probabilities, one column per input column. Dropout is off.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& inputs) const;

    /// Mean cross-entropy over the columns of `inputs`; with `rng` set, dropout
    /// is sampled from it. Fills `gradient` (same layout as parameters()) when
    /// non-null.
    double loss(const Eigen::MatrixXd& inputs, std::span<const int> targets, Rng* rng = nullptr,
                std::vector<double>* gradient = nullptr) const;

    std::size_t parameter_count() const;
    /// Flattened parameters: per layer, weights (column-major) then biases.
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
    void set_layers(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases, double dropout);

private:
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::VectorXd> biases_;
    double dropout_ = 0.0;
};

struct MlpModel {
    MlpNetwork network;
    std::vector<double> input_mean;
    std::vector<double> input_scale;  // divide by this after subtracting the mean

    std::vector<double> predict_proba(std::span<const double> x) const;
};

/// Mini-batch SGD with momentum. Throws TrainingError on a non-finite loss.
MlpModel train_mlp(const Dataset& data, const MlpConfig& cfg);

}  // namespace semlab
