#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "efold/core.hpp"

namespace efold {

/// Trajectory file: comment header lines `# key=value` (format, version, dt,
/// fingers, source parameters), one column-name line, then one row per step:
///   step,goal,goal_sensed,actual,a0..a{2K-1},reward,dropped
/// Values are printed with 17 significant digits so files reproduce the
/// in-memory doubles exactly.
struct TrajectoryFile {
    std::map<std::string, std::string> header;
    EpisodeLog log;
};

void write_trajectory(const std::filesystem::path& path, const EpisodeLog& log,
                      const std::map<std::string, std::string>& header = {});

/// Throws LoadError on malformed files (bad header, wrong column count,
/// non-numeric fields, non-increasing steps).
TrajectoryFile read_trajectory(const std::filesystem::path& path);

/// Goal-only input for `replay`: either a trajectory file or a CSV whose
/// first column is the step index and second the goal in radians (a header
/// line and '#' comments are allowed).
std::vector<double> read_goal_sequence(const std::filesystem::path& path);

}  // namespace efold
