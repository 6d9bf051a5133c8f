#include "semlab/mlp.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "semlab/error.hpp"

namespace semlab {

void MlpConfig::validate() const {
    if (!(dropout >= 0.0 && dropout < 1.0)) throw InputError("dropout probability must lie in [0, 1)");
    if (epochs < 1) throw InputError("epochs must be positive");
    if (batch_size < 1) throw InputError("batch_size must be positive");
    if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("momentum must lie in [0, 1)");
    for (std::size_t h : hidden_layers) {
        if (h < 1) throw InputError("hidden layers need at least one node");
    }
}

MlpNetwork::MlpNetwork(std::size_t inputs, const std::vector<std::size_t>& hidden, std::size_t outputs,
                       double dropout, Rng& rng)
    : dropout_(dropout) {
    std::vector<std::size_t> widths{inputs};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(outputs);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(widths[l]);
        const auto out = static_cast<Eigen::Index>(widths[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        Eigen::MatrixXd w(out, in);
        for (Eigen::Index j = 0; j < in; ++j) {
            for (Eigen::Index i = 0; i < out; ++i) w(i, j) = (2.0 * rng.unit() - 1.0) * limit;
        }
        weights_.push_back(std::move(w));
        biases_.push_back(Eigen::VectorXd::Zero(out));
    }
}

void MlpNetwork::set_layers(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases, double dropout) {
    if (weights.size() != biases.size() || weights.empty()) throw InputError("inconsistent network layers");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != biases[l].size() || (l > 0 && weights[l].cols() != weights[l - 1].rows())) {
            throw InputError("inconsistent network layer shapes");
        }
    }
    weights_ = std::move(weights);
    biases_ = std::move(biases);
    dropout_ = dropout;
}

namespace {

void softmax_columns(Eigen::MatrixXd& z) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        auto col = z.col(j);
        col.array() -= col.maxCoeff();
        col = col.array().exp();
        col /= col.sum();
    }
}

}  // namespace

Eigen::MatrixXd MlpNetwork::predict(const Eigen::MatrixXd& inputs) const {
    Eigen::MatrixXd a = inputs;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
        if (l + 1 < weights_.size()) {
            a = z.array().tanh();
        } else {
            softmax_columns(z);
            a = std::move(z);
        }
    }
    return a;
}

double MlpNetwork::loss(const Eigen::MatrixXd& inputs, std::span<const int> targets, Rng* rng,
                        std::vector<double>* gradient) const {
    const std::size_t layers = weights_.size();
    const Eigen::Index batch = inputs.cols();
    if (static_cast<std::size_t>(batch) != targets.size()) throw InputError("one target per input column is required");

    // activations[l] is the input to layer l; hidden[l] the unmasked tanh output.
    std::vector<Eigen::MatrixXd> activations{inputs};
    std::vector<Eigen::MatrixXd> hidden;
    Eigen::MatrixXd mask;
    Eigen::MatrixXd probs;
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = (weights_[l] * activations.back()).colwise() + biases_[l];
        if (l + 1 == layers) {
            softmax_columns(z);
            probs = std::move(z);
            break;
        }
        Eigen::MatrixXd h = z.array().tanh();
        Eigen::MatrixXd next = h;
        if (l == 0 && rng != nullptr && dropout_ > 0.0) {
            const double keep = 1.0 - dropout_;
            mask.resize(h.rows(), h.cols());
            for (Eigen::Index j = 0; j < h.cols(); ++j) {
                for (Eigen::Index i = 0; i < h.rows(); ++i) mask(i, j) = rng->unit() < keep ? 1.0 / keep : 0.0;
            }
            next = h.cwiseProduct(mask);
        }
        hidden.push_back(std::move(h));
        activations.push_back(std::move(next));
    }

    double total = 0.0;
    for (Eigen::Index j = 0; j < batch; ++j) total -= std::log(probs(targets[static_cast<std::size_t>(j)], j));
    const double mean_loss = total / static_cast<double>(batch);
    if (gradient == nullptr) return mean_loss;

    std::vector<Eigen::MatrixXd> grad_w(layers);
    std::vector<Eigen::VectorXd> grad_b(layers);
    Eigen::MatrixXd delta = probs;
    for (Eigen::Index j = 0; j < batch; ++j) delta(targets[static_cast<std::size_t>(j)], j) -= 1.0;
    delta /= static_cast<double>(batch);
    for (std::size_t l = layers; l-- > 0;) {
        grad_w[l] = delta * activations[l].transpose();
        grad_b[l] = delta.rowwise().sum();
        if (l == 0) break;
        Eigen::MatrixXd back = weights_[l].transpose() * delta;
        if (l - 1 == 0 && mask.size() > 0) back = back.cwiseProduct(mask);
        delta = back.cwiseProduct((1.0 - hidden[l - 1].array().square()).matrix());
    }

    gradient->clear();
    gradient->reserve(parameter_count());
    for (std::size_t l = 0; l < layers; ++l) {
        gradient->insert(gradient->end(), grad_w[l].data(), grad_w[l].data() + grad_w[l].size());
        gradient->insert(gradient->end(), grad_b[l].data(), grad_b[l].data() + grad_b[l].size());
    }
    return mean_loss;
}

std::size_t MlpNetwork::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
    }
    return n;
}

std::vector<double> MlpNetwork::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
        flat.insert(flat.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
    }
    return flat;
}

void MlpNetwork::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw InputError("parameter vector has the wrong length");
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (Eigen::Index i = 0; i < weights_[l].size(); ++i) weights_[l].data()[i] = flat[k++];
        for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l].data()[i] = flat[k++];
    }
}

std::vector<double> MlpModel::predict_proba(std::span<const double> x) const {
    if (x.size() != input_mean.size()) {
        throw ContractError("input width " + std::to_string(x.size()) + " does not match network width " +
                            std::to_string(input_mean.size()));
    }
    Eigen::MatrixXd column(static_cast<Eigen::Index>(x.size()), 1);
    for (std::size_t i = 0; i < x.size(); ++i) column(static_cast<Eigen::Index>(i), 0) = (x[i] - input_mean[i]) / input_scale[i];
    const Eigen::MatrixXd p = network.predict(column);
    return {p.data(), p.data() + p.size()};
}

MlpModel train_mlp(const Dataset& data, const MlpConfig& cfg) {
    cfg.validate();
    if (data.rows == 0) throw InputError("cannot train on an empty dataset");
    if (cfg.input_width && *cfg.input_width != data.cols) {
        throw InputError("MLP input width " + std::to_string(*cfg.input_width) + " does not match feature width " +
                         std::to_string(data.cols));
    }
    {
        std::vector<bool> seen(data.classes, false);
        for (int y : data.y) seen[static_cast<std::size_t>(y)] = true;
        if (std::count(seen.begin(), seen.end(), true) < 2) throw InputError("training set needs at least two classes");
    }

    MlpModel model;
    model.input_mean.assign(data.cols, 0.0);
    model.input_scale.assign(data.cols, 1.0);
    if (cfg.standardize) {
        for (std::size_t j = 0; j < data.cols; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < data.rows; ++i) mean += data.x[i * data.cols + j];
            mean /= static_cast<double>(data.rows);
            double var = 0.0;
            for (std::size_t i = 0; i < data.rows; ++i) {
                const double d = data.x[i * data.cols + j] - mean;
                var += d * d;
            }
            const double sd = std::sqrt(var / static_cast<double>(data.rows));
            model.input_mean[j] = mean;
            model.input_scale[j] = sd > 1e-12 ? sd : 1.0;
        }
    }
    const auto n = static_cast<Eigen::Index>(data.rows);
    const auto d = static_cast<Eigen::Index>(data.cols);
    Eigen::MatrixXd inputs(d, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            inputs(j, i) = (data.x[static_cast<std::size_t>(i * d + j)] - model.input_mean[static_cast<std::size_t>(j)]) /
                           model.input_scale[static_cast<std::size_t>(j)];
        }
    }

    Rng init(derive_seed(cfg.seed, 0));
    model.network = MlpNetwork(data.cols, cfg.hidden_layers, data.classes, cfg.dropout, init);

    std::vector<double> params = model.network.parameters();
    std::vector<double> velocity(params.size(), 0.0);
    std::vector<double> gradient;
    std::vector<std::size_t> order(data.rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Eigen::MatrixXd batch_inputs;
    std::vector<int> batch_targets;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, epoch + 1));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            batch_inputs.resize(d, static_cast<Eigen::Index>(stop - start));
            batch_targets.clear();
            for (std::size_t k = start; k < stop; ++k) {
                batch_inputs.col(static_cast<Eigen::Index>(k - start)) = inputs.col(static_cast<Eigen::Index>(order[k]));
                batch_targets.push_back(data.y[order[k]]);
            }
            const double loss = model.network.loss(batch_inputs, batch_targets, &rng, &gradient);
            if (!std::isfinite(loss)) {
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
            }
            for (std::size_t p = 0; p < params.size(); ++p) {
                velocity[p] = cfg.momentum * velocity[p] - cfg.learning_rate * gradient[p];
                params[p] += velocity[p];
            }
            model.network.set_parameters(params);
        }
    }
    return model;
}

}  // namespace semlab
