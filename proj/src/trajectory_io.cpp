#include "efold/trajectory_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "efold/errors.hpp"

namespace efold {

namespace {

constexpr const char* kFormat = "efold-trajectory";
constexpr const char* kVersion = "1";

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& text, const std::filesystem::path& path, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw LoadError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + text + "'");
    }
}

}  // namespace

void write_trajectory(const std::filesystem::path& path, const EpisodeLog& log,
                      const std::map<std::string, std::string>& header) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeFault("cannot write trajectory " + path.string());
    out << "# format=" << kFormat << '\n' << "# version=" << kVersion << '\n';
    out << "# dt=" << fmt(log.dt) << '\n' << "# fingers=" << log.fingers << '\n';
    for (const auto& [k, v] : header) {
        if (k == "format" || k == "version" || k == "dt" || k == "fingers") continue;
        out << "# " << k << '=' << v << '\n';
    }
    const std::size_t m = action_size(log.fingers);
    out << "step,goal,goal_sensed,actual";
    for (std::size_t j = 0; j < m; ++j) out << ",a" << j;
    out << ",reward,dropped\n";
    for (const StepRecord& s : log.steps) {
        if (s.action.size() != m) throw UsageError("write_trajectory: action width mismatch");
        out << s.step << ',' << fmt(s.goal) << ',' << fmt(s.goal_sensed) << ',' << fmt(s.phi);
        for (double a : s.action) out << ',' << fmt(a);
        out << ',' << fmt(s.reward) << ',' << (s.dropped ? 1 : 0) << '\n';
    }
    if (!out) throw RuntimeFault("failed writing trajectory " + path.string());
}

TrajectoryFile read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open trajectory " + path.string());
    TrajectoryFile file;
    std::string line;
    std::size_t line_no = 0;
    bool columns_seen = false;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            file.header[key] = line.substr(eq + 1);
            continue;
        }
        if (!columns_seen) {
            if (file.header["format"] != kFormat) throw LoadError(path.string() + ": not an efold trajectory file");
            if (file.header["version"] != kVersion) {
                throw LoadError(path.string() + ": unsupported trajectory version " + file.header["version"]);
            }
            try {
                file.log.dt = std::stod(file.header.at("dt"));
                file.log.fingers = static_cast<std::size_t>(std::stoul(file.header.at("fingers")));
            } catch (const std::exception&) {
                throw LoadError(path.string() + ": header lacks a valid dt/fingers entry");
            }
            width = 4 + action_size(file.log.fingers) + 2;
            if (split(line, ',').size() != width) {
                throw LoadError(path.string() + ": column header does not match fingers=" +
                                std::to_string(file.log.fingers));
            }
            columns_seen = true;
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != width) {
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                            " fields, found " + std::to_string(cells.size()));
        }
        StepRecord rec;
        rec.step = static_cast<int>(parse_double(cells[0], path, line_no));
        rec.goal = parse_double(cells[1], path, line_no);
        rec.goal_sensed = parse_double(cells[2], path, line_no);
        rec.phi = parse_double(cells[3], path, line_no);
        const std::size_t m = action_size(file.log.fingers);
        rec.action.resize(m);
        for (std::size_t j = 0; j < m; ++j) rec.action[j] = parse_double(cells[4 + j], path, line_no);
        rec.reward = parse_double(cells[4 + m], path, line_no);
        rec.dropped = parse_double(cells[5 + m], path, line_no) != 0.0;
        try {
            file.log.append(std::move(rec));
        } catch (const UsageError& e) {
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!columns_seen) throw LoadError(path.string() + ": missing column header");
    return file;
}

std::vector<double> read_goal_sequence(const std::filesystem::path& path) {
    std::ifstream probe(path);
    if (!probe) throw LoadError("cannot open goal file " + path.string());
    std::string first;
    std::getline(probe, first);
    if (first.rfind("# format=", 0) == 0) {
        std::vector<double> goals;
        for (const auto& s : read_trajectory(path).log.steps) goals.push_back(s.goal);
        return goals;
    }
    probe.clear();
    probe.seekg(0);
    std::vector<double> goals;
    std::string line;
    std::size_t line_no = 0;
    bool first_row = true;
    while (std::getline(probe, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto cells = split(line, ',');
        if (cells.size() < 2) throw LoadError(path.string() + ":" + std::to_string(line_no) + ": expected step,goal");
        const bool header = first_row && !cells[0].empty() &&
                            !std::isdigit(static_cast<unsigned char>(cells[0].front())) && cells[0].front() != '-';
        first_row = false;
        if (header) continue;  // column names
        const auto step = static_cast<std::size_t>(parse_double(cells[0], path, line_no));
        if (step != goals.size()) {
            throw LoadError(path.string() + ":" + std::to_string(line_no) + ": steps must be 0,1,2,...");
        }
        goals.push_back(parse_double(cells[1], path, line_no));
    }
    if (goals.empty()) throw LoadError(path.string() + ": no goals");
    return goals;
}

}  // namespace efold
