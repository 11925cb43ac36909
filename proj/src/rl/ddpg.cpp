#include "efold/rl/ddpg.hpp"

#include <algorithm>
#include <cmath>

#include "efold/errors.hpp"

namespace efold::rl {

void TrainConfig::validate() const {
    if (epochs < 0) throw ConfigError("training.epochs must be non-negative");
    if (cycles_per_epoch <= 0 || episodes_per_cycle <= 0 || updates_per_cycle <= 0 || batch_size <= 0) {
        throw ConfigError("training counts must be positive");
    }
    if (!(gamma >= 0 && gamma < 1)) throw ConfigError("training.gamma must be in [0, 1)");
    if (!(polyak >= 0 && polyak <= 1)) throw ConfigError("training.polyak must be in [0, 1]");
    if (!(actor_lr > 0 && critic_lr > 0)) throw ConfigError("learning rates must be positive");
    if (noise_sigma < 0 || random_action_prob < 0 || random_action_prob > 1) {
        throw ConfigError("exploration parameters out of range");
    }
    if (her_k < 0) throw ConfigError("training.her_k must be non-negative");
    if (buffer_capacity == 0) throw ConfigError("training.buffer_capacity must be positive");
    if (hidden_width <= 0) throw ConfigError("training.hidden_width must be positive");
    if (!(normalizer_clip > 0)) throw ConfigError("training.normalizer_clip must be positive");
    if (action_l2 < 0) throw ConfigError("training.action_l2 must be non-negative");
    if (eval_trials <= 0) throw ConfigError("training.eval_trials must be positive");
}

namespace {

std::vector<int> five_layers(std::size_t in, int hidden, std::size_t out) {
    return {static_cast<int>(in), hidden, hidden, hidden, static_cast<int>(out)};
}

const TrainConfig& checked(const TrainConfig& c) {
    c.validate();
    return c;
}

Eigen::MatrixXd column(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

DdpgAgent::DdpgAgent(std::size_t obs_size, std::size_t action_size, const TrainConfig& config, std::uint64_t seed)
    : actor(five_layers(obs_size, checked(config).hidden_width, action_size), OutputActivation::tanh),
      critic(five_layers(obs_size + action_size, config.hidden_width, 1), OutputActivation::linear),
      normalizer(static_cast<Eigen::Index>(obs_size), config.normalizer_clip),
      config_(config),
      obs_size_(obs_size),
      action_size_(action_size),
      floor_(config.target_floor()) {
    std::mt19937_64 rng(seed);
    actor.initialize(rng);
    critic.initialize(rng);
    actor_target = actor;
    critic_target = critic;
    actor_optimizer = Adam(actor.parameter_count(), {config.actor_lr});
    critic_optimizer = Adam(critic.parameter_count(), {config.critic_lr});
}

Action DdpgAgent::act(std::span<const double> obs) const {
    if (obs.size() != obs_size_) throw UsageError("agent act: observation size mismatch");
    const Eigen::MatrixXd out = actor.predict(normalizer.normalize(column(obs)));
    return {out.data(), out.data() + out.size()};
}

Action DdpgAgent::explore(std::span<const double> obs, std::mt19937_64& rng) const {
    Action a = act(obs);
    std::normal_distribution<double> noise(0.0, config_.noise_sigma);
    for (double& v : a) v = std::clamp(v + noise(rng), -1.0, 1.0);
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < config_.random_action_prob) {
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);
        for (double& v : a) v = uniform(rng);
    }
    return a;
}

Eigen::MatrixXd DdpgAgent::critic_input(const Eigen::MatrixXd& norm_obs, const Eigen::MatrixXd& actions) const {
    Eigen::MatrixXd in(norm_obs.rows() + actions.rows(), norm_obs.cols());
    in.topRows(norm_obs.rows()) = norm_obs;
    in.bottomRows(actions.rows()) = actions;
    return in;
}

Eigen::VectorXd DdpgAgent::critic_targets(const Batch& batch) const {
    const Eigen::MatrixXd next = normalizer.normalize(batch.next_obs);
    const Eigen::MatrixXd next_actions = actor_target.predict(next);
    const Eigen::VectorXd next_q = critic_target.predict(critic_input(next, next_actions)).row(0).transpose();
    const double floor = floor_;
    Eigen::VectorXd y(batch.rewards.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        // A dropped object is absorbing failure: bootstrap from the floor.
        const double future = batch.done(i) > 0.5 ? floor : next_q(i);
        y(i) = std::clamp(batch.rewards(i) + config_.gamma * future, floor, 0.0);
    }
    return y;
}

double DdpgAgent::critic_loss(const Batch& batch) const {
    const Eigen::VectorXd y = critic_targets(batch);
    const Eigen::MatrixXd obs = normalizer.normalize(batch.obs);
    const Eigen::VectorXd q = critic.predict(critic_input(obs, batch.actions)).row(0).transpose();
    return (q - y).squaredNorm() / static_cast<double>(y.size());
}

UpdateStats DdpgAgent::update(const Batch& batch) {
    const auto b = batch.obs.cols();
    if (b == 0) throw UsageError("agent update: empty batch");
    normalizer.update(batch.obs);

    UpdateStats stats;
    const Eigen::VectorXd y = critic_targets(batch);
    const Eigen::MatrixXd obs = normalizer.normalize(batch.obs);

    // Critic: mean squared Bellman error.
    const Eigen::MatrixXd q = critic.forward(critic_input(obs, batch.actions));
    const Eigen::RowVectorXd err = q.row(0) - y.transpose();
    stats.critic_loss = err.squaredNorm() / static_cast<double>(b);
    const Eigen::VectorXd critic_grad = critic.backward(err * (2.0 / static_cast<double>(b)));
    critic_optimizer.step(critic.parameters(), critic_grad);

    // Actor: maximize Q(s, mu(s)) with an L2 penalty on the action magnitude.
    const Eigen::MatrixXd mu = actor.forward(obs);
    const Eigen::MatrixXd q_pi = critic.forward(critic_input(obs, mu));
    const double l2_scale = config_.action_l2 / static_cast<double>(mu.size());
    stats.actor_loss = -q_pi.mean() + l2_scale * mu.squaredNorm();
    const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, b, -1.0 / static_cast<double>(b));
    const Eigen::MatrixXd din = critic.input_gradient(dq);
    const Eigen::MatrixXd dmu = din.bottomRows(static_cast<Eigen::Index>(action_size_)) + 2.0 * l2_scale * mu;
    const Eigen::VectorXd actor_grad = actor.backward(dmu);
    actor_optimizer.step(actor.parameters(), actor_grad);
    critic.clear_cache();
    actor.clear_cache();
    return stats;
}

void DdpgAgent::set_target_floor(double floor) {
    if (!(floor < 0.0) || !std::isfinite(floor)) throw UsageError("target floor must be finite and negative");
    floor_ = floor;
}

void DdpgAgent::update_targets() {
    soft_update(actor_target, actor, config_.polyak);
    soft_update(critic_target, critic, config_.polyak);
}

ActorPolicy::ActorPolicy(Mlp actor, Normalizer normalizer)
    : actor_(std::move(actor)), normalizer_(std::move(normalizer)) {
    if (actor_.input_size() != normalizer_.size()) throw UsageError("actor and normalizer sizes differ");
}

Action ActorPolicy::act(std::span<const double> obs) {
    if (static_cast<Eigen::Index>(obs.size()) != actor_.input_size()) {
        throw UsageError("actor policy: observation size mismatch");
    }
    const Eigen::MatrixXd out = actor_.predict(normalizer_.normalize(column(obs)));
    return {out.data(), out.data() + out.size()};
}

}  // namespace efold::rl
