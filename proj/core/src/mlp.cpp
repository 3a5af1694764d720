#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "locagen/models.hpp"
#include "locagen/rng.hpp"

namespace locagen::ml {

namespace {

std::vector<double> forward_layers(const MlpRegressor& net, const double* input,
                                   std::vector<std::vector<double>>* activations) {
    const std::size_t n_layers = net.weights.size();
    std::vector<double> cur(input, input + net.layer_sizes[0]);
    if (activations) activations->push_back(cur);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int n_in = net.layer_sizes[l];
        const int n_out = net.layer_sizes[l + 1];
        std::vector<double> next(static_cast<std::size_t>(n_out));
        const auto& w = net.weights[l];
        const auto& b = net.biases[l];
        for (int o = 0; o < n_out; ++o) {
            double acc = b[static_cast<std::size_t>(o)];
            const double* row = w.data() + static_cast<std::size_t>(o) * n_in;
            for (int i = 0; i < n_in; ++i) acc += row[i] * cur[static_cast<std::size_t>(i)];
            next[static_cast<std::size_t>(o)] =
                l + 1 < n_layers ? std::tanh(acc) : acc;  // linear output layer
        }
        cur = std::move(next);
        if (activations) activations->push_back(cur);
    }
    return cur;
}

}  // namespace

std::vector<double> MlpRegressor::forward(
    const std::array<double, data::kNumFeatures>& input) const {
    return forward_layers(*this, input.data(), nullptr);
}

std::size_t MlpRegressor::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

MlpGradients mlp_loss_and_gradients(
    const MlpRegressor& net, const std::vector<std::array<double, data::kNumFeatures>>& inputs,
    const std::vector<std::array<double, 2>>& targets) {
    if (inputs.empty() || inputs.size() != targets.size())
        throw std::invalid_argument("mlp_loss_and_gradients: bad batch");

    const std::size_t n_layers = net.weights.size();
    MlpGradients grads;
    grads.weight_grads.resize(n_layers);
    grads.bias_grads.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        grads.weight_grads[l].assign(net.weights[l].size(), 0.0);
        grads.bias_grads[l].assign(net.biases[l].size(), 0.0);
    }

    const double batch = static_cast<double>(inputs.size());
    const int n_out = net.layer_sizes.back();
    double loss = 0.0;

    for (std::size_t s = 0; s < inputs.size(); ++s) {
        std::vector<std::vector<double>> acts;
        acts.reserve(n_layers + 1);
        const std::vector<double> out = forward_layers(net, inputs[s].data(), &acts);

        // loss: mean over batch and outputs of squared error
        std::vector<double> delta(static_cast<std::size_t>(n_out));
        for (int o = 0; o < n_out; ++o) {
            const double diff = out[static_cast<std::size_t>(o)] -
                                targets[s][static_cast<std::size_t>(o)];
            loss += diff * diff / (batch * n_out);
            delta[static_cast<std::size_t>(o)] = 2.0 * diff / (batch * n_out);
        }

        for (std::size_t l = n_layers; l-- > 0;) {
            const int in_size = net.layer_sizes[l];
            const int out_size = net.layer_sizes[l + 1];
            const auto& a_in = acts[l];
            auto& wg = grads.weight_grads[l];
            auto& bg = grads.bias_grads[l];
            for (int o = 0; o < out_size; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                bg[static_cast<std::size_t>(o)] += d;
                double* row = wg.data() + static_cast<std::size_t>(o) * in_size;
                for (int i = 0; i < in_size; ++i) row[i] += d * a_in[static_cast<std::size_t>(i)];
            }
            if (l > 0) {
                std::vector<double> prev(static_cast<std::size_t>(in_size), 0.0);
                const auto& w = net.weights[l];
                for (int i = 0; i < in_size; ++i) {
                    double acc = 0.0;
                    for (int o = 0; o < out_size; ++o)
                        acc += delta[static_cast<std::size_t>(o)] *
                               w[static_cast<std::size_t>(o) * in_size + i];
                    // tanh'(z) = 1 - tanh(z)^2, and acts[l] stores tanh(z)
                    const double a = acts[l][static_cast<std::size_t>(i)];
                    prev[static_cast<std::size_t>(i)] = acc * (1.0 - a * a);
                }
                delta = std::move(prev);
            }
        }
    }

    grads.loss = loss;
    return grads;
}

namespace {

MlpRegressor init_network(const MlpParams& params, int n_inputs) {
    MlpRegressor net;
    net.raw_angle = params.raw_angle;
    net.layer_sizes.push_back(n_inputs);
    for (int h : params.hidden) net.layer_sizes.push_back(h);
    net.layer_sizes.push_back(params.raw_angle ? 1 : 2);

    Rng rng(stream_rng(params.seed, 0, 0x696e6974ULL).next_u64());
    for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
        const int n_in = net.layer_sizes[l];
        const int n_out = net.layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / (n_in + n_out));  // Glorot uniform
        std::vector<double> w(static_cast<std::size_t>(n_in) * n_out);
        for (auto& v : w) v = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.emplace_back(static_cast<std::size_t>(n_out), 0.0);
    }
    return net;
}

double dataset_loss(const MlpRegressor& net,
                    const std::vector<std::array<double, data::kNumFeatures>>& inputs,
                    const std::vector<std::array<double, 2>>& targets) {
    const int n_out = net.layer_sizes.back();
    double loss = 0.0;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        const auto out = forward_layers(net, inputs[s].data(), nullptr);
        for (int o = 0; o < n_out; ++o) {
            const double diff =
                out[static_cast<std::size_t>(o)] - targets[s][static_cast<std::size_t>(o)];
            loss += diff * diff;
        }
    }
    return loss / (static_cast<double>(inputs.size()) * n_out);
}

}  // namespace

TrainedModel train_mlp(const std::vector<data::LabeledSample>& train, const MlpParams& params) {
    if (static_cast<int>(train.size()) < params.batch_size)
        throw std::invalid_argument("train_mlp: fewer samples than one batch");

    TrainedModel model;
    model.kind = TrainedModel::Kind::mlp;
    model.seed = params.seed;
    model.mlp_params = params;
    model.scaler = data::fit_scaler(train);
    model.dataset_fingerprint = data::fingerprint(train);

    std::vector<std::array<double, data::kNumFeatures>> inputs(train.size());
    std::vector<std::array<double, 2>> targets(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        inputs[i] = model.scaler.transform(train[i].features);
        if (params.raw_angle) {
            targets[i] = {train[i].azimuth_deg, 0.0};
        } else {
            const double rad = deg_to_rad(train[i].azimuth_deg);
            targets[i] = {std::sin(rad), std::cos(rad)};
        }
    }

    MlpRegressor net = init_network(params, data::kNumFeatures);
    const std::size_t n_layers = net.weights.size();

    // Adam state
    std::vector<std::vector<double>> mw(n_layers), vw(n_layers), mb(n_layers), vb(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        mw[l].assign(net.weights[l].size(), 0.0);
        vw[l].assign(net.weights[l].size(), 0.0);
        mb[l].assign(net.biases[l].size(), 0.0);
        vb[l].assign(net.biases[l].size(), 0.0);
    }

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    long long step = 0;
    Rng shuffle_rng(stream_rng(params.seed, 1, 0x73687566ULL).next_u64());

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(params.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(params.batch_size));
            std::vector<std::array<double, data::kNumFeatures>> bx(stop - start);
            std::vector<std::array<double, 2>> by(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                bx[i - start] = inputs[order[i]];
                by[i - start] = targets[order[i]];
            }

            MlpGradients grads = mlp_loss_and_gradients(net, bx, by);
            if (!std::isfinite(grads.loss))
                throw std::runtime_error("train_mlp: loss diverged at epoch " +
                                         std::to_string(epoch));

            ++step;
            const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < n_layers; ++l) {
                auto update = [&](std::vector<double>& p, std::vector<double>& m,
                                  std::vector<double>& v, const std::vector<double>& g) {
                    for (std::size_t k = 0; k < p.size(); ++k) {
                        m[k] = params.beta1 * m[k] + (1.0 - params.beta1) * g[k];
                        v[k] = params.beta2 * v[k] + (1.0 - params.beta2) * g[k] * g[k];
                        const double mhat = m[k] / bc1;
                        const double vhat = v[k] / bc2;
                        p[k] -= params.learning_rate * mhat /
                                (std::sqrt(vhat) + params.adam_epsilon);
                    }
                };
                update(net.weights[l], mw[l], vw[l], grads.weight_grads[l]);
                update(net.biases[l], mb[l], vb[l], grads.bias_grads[l]);
            }
        }

        // frozen-weights loss at the epoch boundary
        double epoch_loss;
        if (params.raw_angle) {
            // evaluate only the single angle output
            double acc = 0.0;
            for (std::size_t s = 0; s < inputs.size(); ++s) {
                const auto out = forward_layers(net, inputs[s].data(), nullptr);
                const double diff = out[0] - targets[s][0];
                acc += diff * diff;
            }
            epoch_loss = acc / static_cast<double>(inputs.size());
        } else {
            epoch_loss = dataset_loss(net, inputs, targets);
        }
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train_mlp: loss diverged at epoch " +
                                     std::to_string(epoch));
        model.epoch_losses.push_back(epoch_loss);
    }

    model.mlp = std::move(net);
    return model;
}

double predict_mlp(const TrainedModel& model,
                   const std::array<double, data::kNumFeatures>& raw_features) {
    if (model.kind != TrainedModel::Kind::mlp)
        throw std::invalid_argument("predict_mlp: model is not an MLP");
    const auto scaled = model.scaler.transform(raw_features);
    const auto out = model.mlp.forward(scaled);
    if (model.mlp.raw_angle) return normalize_deg(out[0]);
    return normalize_deg(rad_to_deg(std::atan2(out[0], out[1])));
}

}  // namespace locagen::ml
