#pragma once

#include <Eigen/Dense>
#include <random>
#include <span>
#include <vector>

namespace efold::rl {

enum class OutputActivation { tanh, linear };

/// Fully connected network with rectifier hidden layers. Parameters live in
/// one flat vector (per layer: weights column-major, then biases) so that
/// optimizers, soft target updates and checkpoints can treat them uniformly.
/// Batched calls take one sample per column.
class Mlp {
public:
    Mlp() = default;
    Mlp(std::vector<int> layer_sizes, OutputActivation output);

    const std::vector<int>& layer_sizes() const { return sizes_; }
    OutputActivation output_activation() const { return output_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    std::size_t layer_count() const { return sizes_.size(); }

    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }
    Eigen::Index parameter_count() const { return params_.size(); }

    Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
    Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
    Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);
    Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

    /// Glorot-uniform weights, zero biases.
    void initialize(std::mt19937_64& rng);

    /// Forward pass that caches activations for a following backward().
    const Eigen::MatrixXd& forward(const Eigen::MatrixXd& input);
    /// Forward pass without touching the cache.
    Eigen::MatrixXd predict(const Eigen::MatrixXd& input) const;
    std::vector<double> predict(std::span<const double> input) const;

    /// Reverse-mode gradients for the batch of the last forward(), given
    /// dLoss/dOutput. Returns the flat parameter gradient; when
    /// `input_gradient` is non-null it receives dLoss/dInput.
    Eigen::VectorXd backward(const Eigen::MatrixXd& output_gradient, Eigen::MatrixXd* input_gradient = nullptr);
    /// Only dLoss/dInput, skipping the parameter gradient products.
    Eigen::MatrixXd input_gradient(const Eigen::MatrixXd& output_gradient);

    bool has_cache() const { return !activations_.empty(); }
    void clear_cache();

    bool all_finite() const { return params_.allFinite(); }

    friend bool operator==(const Mlp& a, const Mlp& b);

private:
    Eigen::MatrixXd backpropagate(const Eigen::MatrixXd& output_gradient, Eigen::VectorXd* grads);

    std::vector<int> sizes_;
    OutputActivation output_ = OutputActivation::linear;
    Eigen::VectorXd params_;
    std::vector<Eigen::Index> weight_offset_;
    std::vector<Eigen::Index> bias_offset_;
    // activations_[0] is the input, activations_[l] the output of layer l.
    std::vector<Eigen::MatrixXd> activations_;
};

/// Adaptive moment estimation over a flat parameter vector.
class Adam {
public:
    struct Settings {
        double learning_rate = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
    };

    Adam() = default;
    Adam(Eigen::Index size, Settings settings);

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

    const Settings& settings() const { return settings_; }
    const Eigen::VectorXd& first_moment() const { return m_; }
    const Eigen::VectorXd& second_moment() const { return v_; }
    long long steps() const { return t_; }
    void restore(Eigen::VectorXd m, Eigen::VectorXd v, long long t);

    friend bool operator==(const Adam&, const Adam&);

private:
    Settings settings_;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
    long long t_ = 0;
};

/// target <- polyak * target + (1 - polyak) * source
void soft_update(Mlp& target, const Mlp& source, double polyak);

}  // namespace efold::rl
