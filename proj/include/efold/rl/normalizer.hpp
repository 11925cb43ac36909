#pragma once

#include <Eigen/Dense>

namespace efold::rl {

/// Running per-dimension mean/variance with clipped standardization.
class Normalizer {
public:
    Normalizer() = default;
    Normalizer(Eigen::Index size, double clip = 5.0, double min_std = 1e-2);

    /// Merge a batch (one sample per column) into the running statistics.
    void update(const Eigen::MatrixXd& samples);
    Eigen::MatrixXd normalize(const Eigen::MatrixXd& samples) const;

    Eigen::Index size() const { return mean_.size(); }
    double clip() const { return clip_; }
    double min_std() const { return min_std_; }
    double count() const { return count_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    /// Population variance of everything seen so far.
    Eigen::VectorXd variance() const;
    Eigen::VectorXd stddev() const;

    /// Sum of squared deviations (M2); exposed for serialization.
    const Eigen::VectorXd& m2() const { return m2_; }
    void restore(Eigen::VectorXd mean, Eigen::VectorXd m2, double count);

    friend bool operator==(const Normalizer&, const Normalizer&);

private:
    double clip_ = 5.0;
    double min_std_ = 1e-2;
    double count_ = 0.0;
    Eigen::VectorXd mean_;
    Eigen::VectorXd m2_;
};

}  // namespace efold::rl
