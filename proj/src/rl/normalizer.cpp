#include "efold/rl/normalizer.hpp"

#include "efold/errors.hpp"

namespace efold::rl {

Normalizer::Normalizer(Eigen::Index size, double clip, double min_std)
    : clip_(clip), min_std_(min_std), mean_(Eigen::VectorXd::Zero(size)), m2_(Eigen::VectorXd::Zero(size)) {}

void Normalizer::update(const Eigen::MatrixXd& samples) {
    if (samples.rows() != mean_.size()) throw UsageError("normalizer update: dimension mismatch");
    const double nb = static_cast<double>(samples.cols());
    if (nb == 0) return;
    // Chan et al. pairwise merge of (count, mean, M2).
    const Eigen::VectorXd batch_mean = samples.rowwise().mean();
    const Eigen::VectorXd batch_m2 = (samples.colwise() - batch_mean).rowwise().squaredNorm();
    const double total = count_ + nb;
    const Eigen::VectorXd delta = batch_mean - mean_;
    mean_ += delta * (nb / total);
    m2_ += batch_m2 + delta.cwiseAbs2() * (count_ * nb / total);
    count_ = total;
}

Eigen::VectorXd Normalizer::variance() const {
    if (count_ <= 0) return Eigen::VectorXd::Ones(mean_.size());
    return m2_ / count_;
}

Eigen::VectorXd Normalizer::stddev() const {
    return variance().cwiseSqrt().cwiseMax(min_std_);
}

Eigen::MatrixXd Normalizer::normalize(const Eigen::MatrixXd& samples) const {
    if (samples.rows() != mean_.size()) throw UsageError("normalizer: dimension mismatch");
    const Eigen::VectorXd inv_std = stddev().cwiseInverse();
    Eigen::MatrixXd out = (samples.colwise() - mean_).array().colwise() * inv_std.array();
    return out.cwiseMax(-clip_).cwiseMin(clip_);
}

void Normalizer::restore(Eigen::VectorXd mean, Eigen::VectorXd m2, double count) {
    if (mean.size() != m2.size()) throw LoadError("normalizer state: size mismatch");
    mean_ = std::move(mean);
    m2_ = std::move(m2);
    count_ = count;
}

bool operator==(const Normalizer& a, const Normalizer& b) {
    return a.clip_ == b.clip_ && a.min_std_ == b.min_std_ && a.count_ == b.count_ && a.mean_.size() == b.mean_.size() &&
           a.mean_ == b.mean_ && a.m2_ == b.m2_;
}

}  // namespace efold::rl
