#include "efold/rl/mlp.hpp"

#include <cmath>
#include <string>

#include "efold/errors.hpp"

namespace efold::rl {

Mlp::Mlp(std::vector<int> layer_sizes, OutputActivation output) : sizes_(std::move(layer_sizes)), output_(output) {
    if (sizes_.size() < 2) throw UsageError("mlp needs at least an input and an output layer");
    Eigen::Index offset = 0;
    for (std::size_t l = 1; l < sizes_.size(); ++l) {
        if (sizes_[l - 1] <= 0 || sizes_[l] <= 0) throw UsageError("mlp layer sizes must be positive");
        weight_offset_.push_back(offset);
        offset += static_cast<Eigen::Index>(sizes_[l]) * sizes_[l - 1];
        bias_offset_.push_back(offset);
        offset += sizes_[l];
    }
    params_ = Eigen::VectorXd::Zero(offset);
}

Eigen::Map<Eigen::MatrixXd> Mlp::weight(std::size_t layer) {
    return {params_.data() + weight_offset_.at(layer), sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(std::size_t layer) const {
    return {params_.data() + weight_offset_.at(layer), sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<Eigen::VectorXd> Mlp::bias(std::size_t layer) {
    return {params_.data() + bias_offset_.at(layer), sizes_[layer + 1]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(std::size_t layer) const {
    return {params_.data() + bias_offset_.at(layer), sizes_[layer + 1]};
}

void Mlp::initialize(std::mt19937_64& rng) {
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const double limit = std::sqrt(6.0 / (sizes_[l] + sizes_[l + 1]));
        std::uniform_real_distribution<double> dist(-limit, limit);
        auto w = weight(l);
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
        }
        bias(l).setZero();
    }
    clear_cache();
}

namespace {

void apply_activation(Eigen::MatrixXd& z, bool hidden, OutputActivation output) {
    if (hidden) {
        z = z.cwiseMax(0.0);
    } else if (output == OutputActivation::tanh) {
        z = z.array().tanh().matrix();
    }
}

}  // namespace

const Eigen::MatrixXd& Mlp::forward(const Eigen::MatrixXd& input) {
    if (input.rows() != sizes_.front()) {
        throw UsageError("mlp forward: expected input of size " + std::to_string(sizes_.front()) + ", got " +
                         std::to_string(input.rows()));
    }
    const std::size_t layers = sizes_.size() - 1;
    activations_.resize(layers + 1);
    activations_[0] = input;
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = weight(l) * activations_[l];
        z.colwise() += bias(l);
        apply_activation(z, l + 1 < layers, output_);
        activations_[l + 1] = std::move(z);
    }
    return activations_.back();
}

Eigen::MatrixXd Mlp::predict(const Eigen::MatrixXd& input) const {
    if (input.rows() != sizes_.front()) {
        throw UsageError("mlp predict: expected input of size " + std::to_string(sizes_.front()) + ", got " +
                         std::to_string(input.rows()));
    }
    const std::size_t layers = sizes_.size() - 1;
    Eigen::MatrixXd a = input;
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd z = weight(l) * a;
        z.colwise() += bias(l);
        apply_activation(z, l + 1 < layers, output_);
        a = std::move(z);
    }
    return a;
}

std::vector<double> Mlp::predict(std::span<const double> input) const {
    const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
    const Eigen::MatrixXd y = predict(Eigen::MatrixXd(x));
    return {y.data(), y.data() + y.size()};
}

Eigen::MatrixXd Mlp::backpropagate(const Eigen::MatrixXd& output_gradient, Eigen::VectorXd* grads) {
    if (!has_cache()) throw UsageError("mlp backward called without a cached forward pass");
    const std::size_t layers = sizes_.size() - 1;
    const Eigen::MatrixXd& out = activations_.back();
    if (output_gradient.rows() != out.rows() || output_gradient.cols() != out.cols()) {
        throw UsageError("mlp backward: gradient shape does not match the cached output");
    }
    Eigen::MatrixXd delta = output_gradient;
    if (output_ == OutputActivation::tanh) {
        delta.array() *= 1.0 - out.array().square();
    }
    for (std::size_t l = layers; l-- > 0;) {
        const Eigen::MatrixXd& in = activations_[l];
        if (grads) {
            Eigen::Map<Eigen::MatrixXd>(grads->data() + weight_offset_[l], sizes_[l + 1], sizes_[l]).noalias() =
                delta * in.transpose();
            Eigen::Map<Eigen::VectorXd>(grads->data() + bias_offset_[l], sizes_[l + 1]) = delta.rowwise().sum();
        }
        Eigen::MatrixXd upstream = weight(l).transpose() * delta;
        if (l > 0) {
            // Rectifier derivative, read off the stored post-activation values.
            upstream.array() *= (in.array() > 0.0).cast<double>();
        }
        delta = std::move(upstream);
    }
    return delta;
}

Eigen::VectorXd Mlp::backward(const Eigen::MatrixXd& output_gradient, Eigen::MatrixXd* input_gradient) {
    Eigen::VectorXd grads = Eigen::VectorXd::Zero(params_.size());
    Eigen::MatrixXd din = backpropagate(output_gradient, &grads);
    if (input_gradient) *input_gradient = std::move(din);
    return grads;
}

Eigen::MatrixXd Mlp::input_gradient(const Eigen::MatrixXd& output_gradient) {
    return backpropagate(output_gradient, nullptr);
}

void Mlp::clear_cache() { activations_.clear(); }

bool operator==(const Mlp& a, const Mlp& b) {
    return a.sizes_ == b.sizes_ && a.output_ == b.output_ && a.params_.size() == b.params_.size() &&
           a.params_ == b.params_;
}

Adam::Adam(Eigen::Index size, Settings settings)
    : settings_(settings), m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (grad.size() != params.size() || m_.size() != params.size()) {
        throw UsageError("adam step: parameter/gradient size mismatch");
    }
    ++t_;
    m_ = settings_.beta1 * m_ + (1.0 - settings_.beta1) * grad;
    v_ = settings_.beta2 * v_ + (1.0 - settings_.beta2) * grad.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(t_));
    const double lr = settings_.learning_rate * std::sqrt(bc2) / bc1;
    params.array() -= lr * m_.array() / (v_.array().sqrt() + settings_.epsilon);
}

void Adam::restore(Eigen::VectorXd m, Eigen::VectorXd v, long long t) {
    if (m.size() != v.size()) throw LoadError("adam state: moment sizes differ");
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = t;
}

bool operator==(const Adam& a, const Adam& b) {
    return a.settings_.learning_rate == b.settings_.learning_rate && a.settings_.beta1 == b.settings_.beta1 &&
           a.settings_.beta2 == b.settings_.beta2 && a.settings_.epsilon == b.settings_.epsilon && a.t_ == b.t_ &&
           a.m_.size() == b.m_.size() && a.m_ == b.m_ && a.v_ == b.v_;
}

void soft_update(Mlp& target, const Mlp& source, double polyak) {
    if (target.parameter_count() != source.parameter_count()) {
        throw UsageError("soft update between networks of different shape");
    }
    if (polyak == 1.0) return;
    target.parameters() = polyak * target.parameters() + (1.0 - polyak) * source.parameters();
}

}  // namespace efold::rl
