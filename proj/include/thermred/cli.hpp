#pragma once

#include <optional>
#include <string>
#include <vector>

#include "thermred/runner.hpp"

namespace thermred::cli {

/// Options shared by the CLI subcommands. Strategy-specific fields are
/// validated against the requested strategies when a case is loaded.
struct RunConfig {
    std::string building_path;
    std::string weather_path;
    std::string schedule_path;  // optional prescribed flows
    std::vector<sim::Strategy> strategies{sim::Strategy::Full};
    double eps = 0.2;
    double flow_tolerance = -1.0;  // conditional only; <0 = auto
    double iteration_eps = 1e-3;   // separate only
    double dt = 3600.0;
    std::string from_iso;  // empty: weather start
    std::string to_iso;    // empty: weather end
    std::string out_path;
    int runs = 3;
    bool periodic_weather = false;
    std::vector<double> eps_sweep;
    std::vector<double> flow_tolerance_sweep;
    std::vector<int> order_sweep;
};

struct LoadedCase {
    building::BuildingModel model;
    building::WeatherSeries weather;
    std::optional<airflow::FlowSchedule> schedule;
    sim::SimOptions options;  // strategy left at the config's first entry
};

LoadedCase load_case(const RunConfig& config);

/// Trajectory CSV: timestamp, per-zone air temperature (6 decimals),
/// per-opening mass flow, sweep and inner iteration counts. Identical
/// configurations yield byte-identical files.
void write_trajectory_csv(const sim::SimulationResult& result,
                          const std::string& path);

// ---- reduce ----

struct ZoneReductionReport {
    std::string zone;
    int full_order = 0;
    int envelope_order = 0;  // meaningful for the separate strategy
    int reduced_order = 0;
    double bound = 0.0;
    std::vector<double> hsv;
    bool minimality_warning = false;
};

struct ReduceReport {
    std::string building;
    std::string strategy;
    double eps = 0.0;
    std::vector<ZoneReductionReport> zones;
};

ReduceReport make_reduce_report(const RunConfig& config);
void write_reduce_report(const ReduceReport& report, const std::string& path);

// ---- compare ----

struct StrategyResult {
    sim::Strategy strategy = sim::Strategy::Full;
    double wall_seconds = 0.0;  // median over config.runs
    double setup_seconds = 0.0;
    double stepping_seconds = 0.0;
    std::vector<int> reduced_orders;
    std::vector<double> error_bounds;
    std::vector<double> zone_max_dev;  // vs the full baseline, °C
    std::vector<double> zone_std_dev;
    double max_dev = 0.0;
    double std_dev = 0.0;
    double speedup = 1.0;  // baseline wall / this wall
    sim::SimulationResult sim;
};

struct ComparisonReport {
    std::vector<StrategyResult> strategies;
    std::size_t baseline = 0;  // index of the full strategy
};

/// Runs every configured strategy on the identical case; deviations are
/// computed against the full baseline on the 6-decimal values that the
/// trajectory CSVs carry, so reports are reproducible from the emitted files.
ComparisonReport run_compare(const RunConfig& config);

/// Writes <path> (JSON report) plus one trajectory CSV per strategy next to
/// it (<stem>_<strategy>.csv).
void write_comparison_report(const ComparisonReport& report,
                             const std::string& path);

// ---- bench ----

struct TimingFit {
    double t_fixed = 0.0;
    double cubic_coefficient = 0.0;
    double r_squared = 0.0;
};

/// Least squares of seconds against the cubed order sum: t = t_f + c x.
TimingFit fit_cubic(const std::vector<double>& order_cubed,
                    const std::vector<double>& seconds);

struct BenchRow {
    double eps = 0.0;
    std::vector<int> reduced_orders;
    double sum_order_cubed = 0.0;
    double setup_seconds = 0.0;
    double stepping_seconds = 0.0;
    double total_seconds = 0.0;
    double max_dev = 0.0;
    double std_dev = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    TimingFit fit;  // total seconds vs sum of cubed reduced orders
    double baseline_seconds = 0.0;
    std::string strategy;
};

/// Tolerance sweep (config.eps_sweep, >= 4 values, each point the median of
/// config.runs >= 3 runs) against the full baseline.
BenchReport run_bench(const RunConfig& config);
void write_bench_csv(const BenchReport& report, const std::string& path);

struct OrderSweepRow {
    int order = 0;
    double order_cubed = 0.0;
    double stepping_seconds = 0.0;  // median
};

struct OrderSweepReport {
    std::vector<OrderSweepRow> rows;
    TimingFit fit;
};

/// Times the full simulation of a synthetic single-zone model at the given
/// orders under per-step varying airflow (the factorization is rebuilt each
/// step) and fits the cubic cost model to the stepping time.
OrderSweepReport run_order_sweep(const std::vector<int>& orders, int runs,
                                 double dt = 3600.0, Index steps = 3000);
void write_order_sweep_csv(const OrderSweepReport& report,
                           const std::string& path);

struct FlowToleranceRow {
    double flow_tolerance = 0.0;
    int rereductions = 0;
    double wall_seconds = 0.0;
    double max_dev = 0.0;
    double std_dev = 0.0;
};

/// Conditional-strategy tolerance sweep (config.flow_tolerance_sweep).
std::vector<FlowToleranceRow> run_flow_tolerance_sweep(const RunConfig& config);
void write_flow_tolerance_csv(const std::vector<FlowToleranceRow>& rows,
                              const std::string& path);

/// Deviation statistics on 6-decimal-rounded series, pooled and per zone.
struct DeviationStats {
    std::vector<double> zone_max;
    std::vector<double> zone_std;
    double max = 0.0;
    double std_dev = 0.0;
};
DeviationStats deviations(const Matrix& baseline_air, const Matrix& other_air);

}  // namespace thermred::cli
