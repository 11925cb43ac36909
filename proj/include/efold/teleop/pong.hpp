#pragma once

#include <random>

namespace efold::teleop {

struct PongConfig {
    double ball_speed = 0.6;      // units/s
    double paddle_half_height = 0.1;
    double max_serve_angle = 0.7853981633974483;  // 45 degrees off horizontal

    void validate() const;
    friend bool operator==(const PongConfig&, const PongConfig&) = default;
};

enum class PongStatus { active, ended_early };

/// Single-paddle wall-return Pong on the unit square. The paddle sits on the
/// left edge; the ball bounces off the top, bottom and right walls.
struct PongState {
    double x = 0.5;
    double y = 0.5;
    double vx = 0.0;
    double vy = 0.0;
    double paddle_y = 0.5;
    double paddle_half_height = 0.1;
    int hits = 0;
    int failures = 0;
    PongStatus status = PongStatus::active;

    friend bool operator==(const PongState&, const PongState&) = default;
};

/// Paddle center for an object yaw: yaw in [-1, 1] rad maps onto [0.1, 0.9].
double paddle_from_yaw(double yaw);

/// Ball at the center, served toward the right wall at a random angle.
PongState pong_serve(const PongConfig& config, std::mt19937_64& rng);

/// Advance one frame. A drop ends the game and freezes the counters.
PongState pong_step(const PongState& pong, double object_yaw, double dt, bool dropped, const PongConfig& config,
                    std::mt19937_64& rng);

}  // namespace efold::teleop
