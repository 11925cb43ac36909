#include "efold/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "efold/errors.hpp"

namespace efold {

Angle::Angle(double raw) {
    if (!std::isfinite(raw)) {
        throw DomainError("angle must be finite, got " + std::to_string(raw));
    }
    // In-range values pass through untouched so wrapping is idempotent.
    if (raw > -kPi && raw <= kPi) {
        value_ = raw;
        return;
    }
    double r = std::fmod(raw + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    value_ = r - kPi;
}

Angle wrap_angle(double raw) { return Angle(raw); }

double YawQuaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

YawQuaternion operator*(const YawQuaternion& a, const YawQuaternion& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

YawQuaternion yaw_to_quaternion(Angle yaw) {
    const double half = 0.5 * yaw.value();
    return {std::cos(half), 0.0, 0.0, std::sin(half)};
}

Angle quaternion_to_yaw(const YawQuaternion& q) {
    return wrap_angle(2.0 * std::atan2(q.z, q.w));
}

double quaternion_distance(const YawQuaternion& a, const YawQuaternion& b) {
    const YawQuaternion rel = a * b.conjugate();
    const double vec = std::sqrt(rel.x * rel.x + rel.y * rel.y + rel.z * rel.z);
    // 2*acos(|w|) == 2*atan2(|v|, |w|) for unit quaternions.
    return 2.0 * std::atan2(vec, std::abs(rel.w));
}

double angular_distance(Angle a, Angle b) {
    return quaternion_distance(yaw_to_quaternion(a), yaw_to_quaternion(b));
}

Action clamp_action(std::span<const double> raw) {
    Action out(raw.begin(), raw.end());
    for (double& v : out) {
        v = std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0);
    }
    return out;
}

void EpisodeLog::append(StepRecord rec) {
    if (!steps.empty() && rec.step <= steps.back().step) {
        throw UsageError("episode log step indices must increase strictly");
    }
    steps.push_back(std::move(rec));
}

}  // namespace efold
