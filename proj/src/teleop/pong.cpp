#include "efold/teleop/pong.hpp"

#include <algorithm>
#include <cmath>

#include "efold/errors.hpp"

namespace efold::teleop {

void PongConfig::validate() const {
    if (!(ball_speed > 0)) throw ConfigError("pong.ball_speed must be positive");
    if (!(paddle_half_height > 0 && paddle_half_height < 0.5)) {
        throw ConfigError("pong.paddle_half_height must be in (0, 0.5)");
    }
    if (!(max_serve_angle >= 0 && max_serve_angle < 1.5707963267948966)) {
        throw ConfigError("pong.max_serve_angle must be in [0, pi/2)");
    }
}

double paddle_from_yaw(double yaw) { return 0.5 + std::clamp(yaw, -1.0, 1.0) / 2.0 * 0.8; }

PongState pong_serve(const PongConfig& config, std::mt19937_64& rng) {
    PongState p;
    p.paddle_half_height = config.paddle_half_height;
    const double angle =
        std::uniform_real_distribution<double>(-config.max_serve_angle, config.max_serve_angle)(rng);
    p.vx = config.ball_speed * std::cos(angle);
    p.vy = config.ball_speed * std::sin(angle);
    return p;
}

PongState pong_step(const PongState& pong, double object_yaw, double dt, bool dropped, const PongConfig& config,
                    std::mt19937_64& rng) {
    PongState next = pong;
    if (pong.status != PongStatus::active) return next;
    next.paddle_y = paddle_from_yaw(object_yaw);
    if (dropped) {
        next.status = PongStatus::ended_early;
        return next;
    }
    next.x += next.vx * dt;
    next.y += next.vy * dt;
    if (next.y < 0.0) {
        next.y = -next.y;
        next.vy = -next.vy;
    } else if (next.y > 1.0) {
        next.y = 2.0 - next.y;
        next.vy = -next.vy;
    }
    if (next.x > 1.0) {
        next.x = 2.0 - next.x;
        next.vx = -next.vx;
    }
    if (next.x < 0.0) {
        if (std::abs(next.y - next.paddle_y) <= next.paddle_half_height) {
            ++next.hits;
            next.x = -next.x;
            next.vx = -next.vx;
        } else {
            ++next.failures;
            PongState served = pong_serve(config, rng);
            next.x = served.x;
            next.y = served.y;
            next.vx = served.vx;
            next.vy = served.vy;
        }
    }
    return next;
}

}  // namespace efold::teleop
