#pragma once

#include <limits>
#include <string>
#include <vector>

#include "thermred/building.hpp"

namespace thermred::sim {

enum class Strategy { Full, ReduceLti, Conditional, Separate };

Strategy parse_strategy(const std::string& name);  // ConfigError on unknown
std::string strategy_name(Strategy strategy);

struct SimOptions {
    Strategy strategy = Strategy::Full;
    double eps = 0.2;
    /// Conditional update tolerance in kg/s; negative requests the default
    /// (10% of the mean absolute flow at simulation start, 0.01 kg/s floor).
    double flow_tolerance = -1.0;
    double iteration_eps = 1e-3;  // °C, separate-strategy coupling loop
    int max_iterations = 50;
    double dt = 3600.0;
    double t_start = 0.0;  // epoch seconds
    double t_end = 0.0;
    /// Uniform initial temperature; NaN picks the outdoor value at t_start.
    double initial_temperature = std::numeric_limits<double>::quiet_NaN();
    int airflow_coupling_max = 3;       // thermal/airflow sweeps per step
    double airflow_relative_tol = 0.01; // flow change ending the sweep
    bool periodic_weather = false;
};

struct SimulationResult {
    std::vector<double> times;            // epoch seconds, one per step
    Matrix zone_air;                      // steps x zones, °C
    Matrix flows;                         // steps x openings, kg/s
    Eigen::VectorXi airflow_iterations;   // thermal/airflow sweeps used
    Eigen::VectorXi inner_iterations;     // separate: fixed-point iterations;
                                          // conditional: zones re-reduced
    std::vector<std::string> zone_names;
    std::vector<std::string> opening_ids;
    std::vector<int> full_orders;
    std::vector<int> reduced_orders;      // per zone; equals full for Strategy::Full
    std::vector<double> error_bounds;     // a-priori bounds, 0 for Strategy::Full
    double setup_seconds = 0.0;
    double stepping_seconds = 0.0;
    int rereductions = 0;                 // conditional strategy total

    Index steps() const { return std::ssize(times); }
};

/// Fixed-step simulation of a building: per step, the airflow solution
/// (network or schedule) and the thermal advance of every zone are swept to
/// consistency, then committed. `schedule` may be null; when present its
/// link ids must name building openings.
SimulationResult run_simulation(const building::BuildingModel& model,
                                const building::WeatherSeries& weather,
                                const airflow::FlowSchedule* schedule,
                                const SimOptions& options);

}  // namespace thermred::sim
