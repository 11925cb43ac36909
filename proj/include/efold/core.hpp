#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace efold {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDefaultDt = 0.04;

/// Planar rotation angle kept in (-pi, pi].
class Angle {
public:
    constexpr Angle() = default;

    /// Wraps `raw` into (-pi, pi]. Throws DomainError for non-finite input.
    explicit Angle(double raw);

    constexpr double value() const { return value_; }
    constexpr operator double() const { return value_; }

    friend Angle operator+(Angle a, Angle b) { return Angle(a.value_ + b.value_); }
    friend Angle operator-(Angle a, Angle b) { return Angle(a.value_ - b.value_); }
    friend constexpr bool operator==(Angle a, Angle b) = default;

private:
    double value_ = 0.0;
};

struct YawQuaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const;
    YawQuaternion conjugate() const { return {w, -x, -y, -z}; }
    friend bool operator==(const YawQuaternion&, const YawQuaternion&) = default;
};

YawQuaternion operator*(const YawQuaternion& a, const YawQuaternion& b);

Angle wrap_angle(double raw);
YawQuaternion yaw_to_quaternion(Angle yaw);
/// Inverse of yaw_to_quaternion for rotations about Z.
Angle quaternion_to_yaw(const YawQuaternion& q);

/// Minimal rotation between two yaws, in [0, pi]. Computed from the
/// relative quaternion q_a * conj(q_b) as 2*acos(|w|), evaluated through
/// atan2 so that small distances keep full precision.
double angular_distance(Angle a, Angle b);
double quaternion_distance(const YawQuaternion& a, const YawQuaternion& b);

struct Goal {
    Angle yaw;
    YawQuaternion quat;

    Goal() = default;
    explicit Goal(Angle yaw_) : yaw(yaw_), quat(yaw_to_quaternion(yaw_)) {}
    static Goal from_radians(double raw) { return Goal(wrap_angle(raw)); }

    friend bool operator==(const Goal& a, const Goal& b) { return a.yaw == b.yaw; }
};

/// Policy input: [(s_i, n_i) x K | (sdot_i, ndot_i) x K | object(13) | goal(7)].
using Observation = std::vector<double>;

/// 2K entries in [-1, 1]; finger-major (a_s, a_n) pairs.
using Action = std::vector<double>;

constexpr std::size_t observation_size(std::size_t fingers) { return 4 * fingers + 20; }
constexpr std::size_t action_size(std::size_t fingers) { return 2 * fingers; }

/// Clamp every entry into [-1, 1]; NaN entries become 0.
Action clamp_action(std::span<const double> raw);

struct Transition {
    Observation obs;
    Action action;
    double reward = 0.0;
    Observation next_obs;
    Goal goal;
    Goal achieved_goal;
    bool done = false;
};

struct StepRecord {
    int step = 0;
    double phi = 0.0;
    double goal = 0.0;         // true goal G_i
    double goal_sensed = 0.0;  // goal after the sensor model, as seen by the policy
    Action action;
    double reward = 0.0;
    bool dropped = false;
};

struct EpisodeLog {
    double dt = kDefaultDt;
    std::size_t fingers = 5;
    std::vector<StepRecord> steps;

    /// Throws UsageError unless step indices are strictly increasing.
    void append(StepRecord rec);
    bool dropped() const { return !steps.empty() && steps.back().dropped; }
};

}  // namespace efold
