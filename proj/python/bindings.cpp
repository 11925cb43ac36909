// Python bindings for the efold core: plant, rewards, goals, metrics,
// training, checkpoints and headless replay.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "efold/config.hpp"
#include "efold/errors.hpp"
#include "efold/metrics.hpp"
#include "efold/plant.hpp"
#include "efold/reward.hpp"
#include "efold/rl/checkpoint.hpp"
#include "efold/rl/train.hpp"
#include "efold/trajectory_io.hpp"
#include "efold/workbench.hpp"

namespace py = pybind11;
using namespace efold;

namespace {

metrics::TrajectoryRecord make_record(const std::vector<double>& goal, const std::vector<double>& actual,
                                      const std::optional<Eigen::MatrixXd>& actions, double dt) {
    metrics::TrajectoryRecord r;
    r.dt = dt;
    r.goal = goal;
    r.actual = actual;
    r.actions = actions ? *actions : Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(goal.size()), 1);
    r.validate();
    return r;
}

py::dict log_to_dict(const EpisodeLog& log) {
    std::vector<int> step;
    std::vector<double> phi, goal, sensed, reward;
    Eigen::MatrixXd actions(static_cast<Eigen::Index>(log.steps.size()),
                            static_cast<Eigen::Index>(2 * log.fingers));
    for (std::size_t i = 0; i < log.steps.size(); ++i) {
        const auto& s = log.steps[i];
        step.push_back(s.step);
        phi.push_back(s.phi);
        goal.push_back(s.goal);
        sensed.push_back(s.goal_sensed);
        reward.push_back(s.reward);
        for (std::size_t j = 0; j < s.action.size(); ++j)
            actions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.action[j];
    }
    py::dict d;
    d["dt"] = log.dt;
    d["step"] = step;
    d["phi"] = phi;
    d["goal"] = goal;
    d["goal_sensed"] = sensed;
    d["reward"] = reward;
    d["actions"] = actions;
    d["dropped"] = log.dropped();
    return d;
}

WorkbenchConfig config_from(const std::string& text) {
    return text.empty() ? WorkbenchConfig{} : workbench_config_from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_efold, m) {
    m.doc() = "efold core bindings";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<LoadError>(m, "LoadError", PyExc_IOError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<RuntimeFault>(m, "RuntimeFault", PyExc_RuntimeError);

    m.def("wrap_angle", [](double a) { return wrap_angle(a).value(); });
    m.def("angular_distance", [](double a, double b) { return angular_distance(Angle(a), Angle(b)); });
    m.def("quaternion_distance", [](double a, double b) {
        return quaternion_distance(yaw_to_quaternion(Angle(a)), yaw_to_quaternion(Angle(b)));
    });

    // Rewards take yaw angles; the tolerance defaults to the kind's own.
    m.def("sparse_reward",
          [](double achieved, double goal, bool dropped, double tol) {
              return sparse_reward(Goal(Angle(achieved)), Goal(Angle(goal)), dropped, tol);
          },
          py::arg("achieved"), py::arg("goal"), py::arg("dropped") = false, py::arg("tolerance") = kSparseTolerance);
    m.def("dense_reward",
          [](double achieved, double goal, bool dropped, double tol) {
              return dense_reward(Goal(Angle(achieved)), Goal(Angle(goal)), dropped, tol);
          },
          py::arg("achieved"), py::arg("goal"), py::arg("dropped") = false, py::arg("tolerance") = kDenseTolerance);

    m.def("sinusoid_goal", [](double alpha, double omega, int i) { return sinusoid_goal(alpha, omega, i).yaw.value(); });
    m.def("step_goal",
          [](int i, double magnitude, int onset) { return step_goal(i, {magnitude, onset}).yaw.value(); },
          py::arg("step"), py::arg("magnitude") = 1.0, py::arg("onset") = 50);

    py::class_<PlantState>(m, "PlantState")
        .def_property_readonly("phi", [](const PlantState& s) { return s.phi.value(); })
        .def_readonly("phidot", &PlantState::phidot)
        .def_readonly("s", &PlantState::s)
        .def_readonly("n", &PlantState::n)
        .def_readonly("under_grip_steps", &PlantState::under_grip_steps)
        .def_readonly("dropped", &PlantState::dropped);

    py::class_<Plant>(m, "Plant")
        .def(py::init([](const std::string& config_json) { return Plant(config_from(config_json).plant); }),
             py::arg("config_json") = "")
        .def_property_readonly("fingers", [](const Plant& p) { return p.config().fingers; })
        .def_property_readonly("dt", [](const Plant& p) { return p.config().dt; })
        .def("reset", [](const Plant& p, std::uint64_t seed, double lo, double hi) { return p.reset(seed, {lo, hi}); },
             py::arg("seed"), py::arg("lo") = -kPi, py::arg("hi") = kPi)
        .def("rest_state", [](const Plant& p, double yaw) { return p.rest_state(Angle(yaw)); })
        .def("step", [](const Plant& p, const PlantState& s, const std::vector<double>& a) {
            auto r = p.step(s, a);
            return py::make_tuple(r.state, r.dropped);
        });

    // Metrics over plain sequences / arrays.
    m.def("mse", [](const std::vector<double>& g, const std::vector<double>& a) {
        return metrics::mse(make_record(g, a, std::nullopt, kDefaultDt));
    });
    m.def("latency", [](const std::vector<double>& g, const std::vector<double>& a) {
        return metrics::latency(make_record(g, a, std::nullopt, kDefaultDt));
    });
    m.def("saturation",
          [](const Eigen::MatrixXd& actions, double threshold) {
              metrics::TrajectoryRecord r;
              r.goal.assign(static_cast<std::size_t>(actions.rows()), 0.0);
              r.actual = r.goal;
              r.actions = actions;
              return metrics::saturation(r, threshold);
          },
          py::arg("actions"), py::arg("threshold") = 0.99);
    m.def("energy", [](const Eigen::MatrixXd& actions) {
        metrics::TrajectoryRecord r;
        r.goal.assign(static_cast<std::size_t>(actions.rows()), 0.0);
        r.actual = r.goal;
        r.actions = actions;
        return metrics::energy(r);
    });
    m.def("step_metrics",
          [](const std::vector<double>& g, const std::vector<double>& a, double magnitude, int onset, double band,
             int window) {
              const auto rep = metrics::step_metrics(make_record(g, a, std::nullopt, kDefaultDt),
                                                     {magnitude, onset, band, window});
              py::dict d;
              d["t_p"] = rep.peak_time;
              d["t_st"] = rep.settling_time;
              d["settled"] = rep.settled;
              d["os_pct"] = rep.overshoot;
              d["e_ss_pct"] = rep.steady_state_error;
              return d;
          },
          py::arg("goal"), py::arg("actual"), py::arg("magnitude") = 1.0, py::arg("onset") = 50,
          py::arg("band") = 0.05, py::arg("window") = 20);

    py::class_<rl::PolicyCheckpoint>(m, "Checkpoint")
        .def_property_readonly("fingers", [](const rl::PolicyCheckpoint& c) { return c.plant.fingers; })
        .def_property_readonly("reward", [](const rl::PolicyCheckpoint& c) { return std::string(to_string(c.reward.kind)); })
        .def_readonly("seed", &rl::PolicyCheckpoint::seed)
        .def_readonly("epochs_completed", &rl::PolicyCheckpoint::epochs_completed)
        .def("act", [](const rl::PolicyCheckpoint& c, const std::vector<double>& obs) { return c.policy()->act(obs); })
        .def("__eq__", [](const rl::PolicyCheckpoint& a, const rl::PolicyCheckpoint& b) { return a == b; });

    m.def("load_checkpoint", [](const std::filesystem::path& p) { return rl::load_checkpoint(p); });
    m.def("save_checkpoint", [](const rl::PolicyCheckpoint& c, const std::filesystem::path& p) { rl::save_checkpoint(c, p); });

    m.def("train",
          [](const std::string& config_json, std::uint64_t seed, const std::function<void(int, double)>& on_epoch) {
              const auto cfg = config_from(config_json);
              rl::TrainResult result;
              {
                  py::gil_scoped_release release;
                  result = rl::train(cfg.plant, cfg.reward, cfg.training, seed, [&](const rl::EpochRecord& e) {
                      if (on_epoch) {
                          py::gil_scoped_acquire acquire;
                          on_epoch(e.epoch, e.success_rate);
                      }
                  });
              }
              std::vector<double> rates;
              for (const auto& e : result.log) rates.push_back(e.success_rate);
              return py::make_tuple(result.checkpoint, rates);
          },
          py::arg("config_json") = "", py::arg("seed") = 0, py::arg("on_epoch") = nullptr);

    m.def("evaluate_success_rate", &rl::evaluate_success_rate, py::arg("checkpoint"), py::arg("trials") = 50,
          py::arg("seed") = 0);

    m.def("replay",
          [](const rl::PolicyCheckpoint& c, const std::vector<double>& goals, const std::string& sensor,
             std::uint64_t seed) {
              SensorModel model;
              model.kind = sensor_kind_from_string(sensor);
              return log_to_dict(replay_goals(c, goals, model, seed));
          },
          py::arg("checkpoint"), py::arg("goals"), py::arg("sensor") = "ideal", py::arg("seed") = 0);

    m.def("read_trajectory", [](const std::filesystem::path& p) {
        auto f = read_trajectory(p);
        py::dict d = log_to_dict(f.log);
        d["header"] = f.header;
        return d;
    });

    m.def("default_config_json", [] { return to_json(WorkbenchConfig{}).dump(); });
    m.def("normalize_config_json", [](const std::string& text) {
        auto cfg = config_from(text);
        cfg.validate();
        return to_json(cfg).dump();
    });
}
