#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thermred/cli.hpp"

namespace {

using thermred::cli::RunConfig;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;
constexpr int kIoError = 4;

std::vector<thermred::sim::Strategy> parse_strategies(const std::string& csv) {
    std::vector<thermred::sim::Strategy> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::string token =
            csv.substr(pos, comma == std::string::npos ? csv.size() - pos
                                                       : comma - pos);
        if (!token.empty()) {
            out.push_back(thermred::sim::parse_strategy(token));
        }
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

int dispatch(const std::string& command, const RunConfig& config,
             const std::vector<int>& order_sweep) {
    using namespace thermred;

    if (command == "reduce") {
        const cli::ReduceReport report = cli::make_reduce_report(config);
        cli::write_reduce_report(report, config.out_path);
        std::printf("wrote reduction report: %s\n", config.out_path.c_str());
        for (const cli::ZoneReductionReport& zr : report.zones) {
            std::printf("  %-12s order %3d -> %2d (bound %.4g)%s\n", zr.zone.c_str(),
                        zr.full_order, zr.reduced_order, zr.bound,
                        zr.minimality_warning ? " [minimality warning]" : "");
        }
        return kOk;
    }
    if (command == "simulate") {
        cli::LoadedCase c = cli::load_case(config);
        const sim::SimulationResult result = sim::run_simulation(
            c.model, c.weather, c.schedule ? &*c.schedule : nullptr, c.options);
        cli::write_trajectory_csv(result, config.out_path);
        std::printf("wrote trajectory: %s (%lld steps, setup %.3fs, stepping %.3fs)\n",
                    config.out_path.c_str(),
                    static_cast<long long>(result.steps()), result.setup_seconds,
                    result.stepping_seconds);
        return kOk;
    }
    if (command == "compare") {
        const cli::ComparisonReport report = cli::run_compare(config);
        cli::write_comparison_report(report, config.out_path);
        std::printf("wrote comparison report: %s\n", config.out_path.c_str());
        for (const cli::StrategyResult& sr : report.strategies) {
            std::printf("  %-11s wall %8.3fs  speedup %5.2fx  max dev %.4f C  std %.4f C\n",
                        sim::strategy_name(sr.strategy).c_str(), sr.wall_seconds,
                        sr.speedup, sr.max_dev, sr.std_dev);
        }
        return kOk;
    }
    if (command == "bench") {
        if (!order_sweep.empty()) {
            const cli::OrderSweepReport report =
                cli::run_order_sweep(order_sweep, config.runs, config.dt);
            cli::write_order_sweep_csv(report, config.out_path);
            std::printf("order sweep fit: t = %.6g + %.6g * n^3 (r2 = %.4f)\n",
                        report.fit.t_fixed, report.fit.cubic_coefficient,
                        report.fit.r_squared);
            return kOk;
        }
        if (!config.flow_tolerance_sweep.empty()) {
            const auto rows = cli::run_flow_tolerance_sweep(config);
            cli::write_flow_tolerance_csv(rows, config.out_path);
            std::printf("wrote flow-tolerance sweep: %s\n", config.out_path.c_str());
            return kOk;
        }
        const cli::BenchReport report = cli::run_bench(config);
        cli::write_bench_csv(report, config.out_path);
        std::printf("baseline %.3fs; fit t = %.6g + %.6g * sum(nr^3) (r2 = %.4f)\n",
                    report.baseline_seconds, report.fit.t_fixed,
                    report.fit.cubic_coefficient, report.fit.r_squared);
        return kOk;
    }
    std::fprintf(stderr, "unknown command\n");
    return kConfigError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-zone thermal simulation with balanced model reduction"};
    app.require_subcommand(1);

    RunConfig config;
    std::string strategies_csv;
    std::vector<int> order_sweep;

    const auto add_common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--building", config.building_path, "building JSON file");
        cmd->add_option("--weather", config.weather_path, "weather CSV file");
        cmd->add_option("--schedule", config.schedule_path,
                        "prescribed airflow CSV (timestamp,link,kg/s)");
        cmd->add_option("--strategy", strategies_csv,
                        "strategy or comma list: full, reduce-lti, conditional, separate");
        cmd->add_option("--eps", config.eps, "reduction tolerance");
        cmd->add_option("--flow-tol", config.flow_tolerance,
                        "conditional update tolerance, kg/s");
        cmd->add_option("--iter-eps", config.iteration_eps,
                        "separate-strategy coupling tolerance, C");
        cmd->add_option("--dt", config.dt, "time step, s");
        cmd->add_option("--from", config.from_iso, "start timestamp (ISO-8601)");
        cmd->add_option("--to", config.to_iso, "end timestamp (ISO-8601)");
        cmd->add_option("--runs", config.runs, "timing repetitions (median)");
        cmd->add_flag("--periodic-weather", config.periodic_weather,
                      "tile the weather series past its end");
        auto* out = cmd->add_option("--out", config.out_path, "output file");
        if (needs_out) {
            out->required();
        }
    };

    CLI::App* reduce = app.add_subcommand("reduce", "per-zone balanced reduction report");
    add_common(reduce, true);
    CLI::App* simulate = app.add_subcommand("simulate", "run one strategy, write a trajectory CSV");
    add_common(simulate, true);
    CLI::App* compare = app.add_subcommand("compare", "run strategies against the full baseline");
    add_common(compare, true);
    CLI::App* bench = app.add_subcommand("bench", "tolerance/order sweeps with timing fits");
    add_common(bench, true);
    bench->add_option("--eps-sweep", config.eps_sweep, "reduction tolerances to sweep");
    bench->add_option("--flow-tols", config.flow_tolerance_sweep,
                      "conditional flow tolerances to sweep");
    bench->add_option("--orders", order_sweep, "single-zone order sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (!strategies_csv.empty()) {
            config.strategies = parse_strategies(strategies_csv);
        }
        return dispatch(app.get_subcommands().front()->get_name(), config,
                        order_sweep);
    } catch (const thermred::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const thermred::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kIoError;
    } catch (const thermred::ConvergenceError& e) {
        std::fprintf(stderr, "convergence failure: %s (residual %.3g)\n", e.what(),
                     e.residual);
        return kNumericalError;
    } catch (const thermred::RangeError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const thermred::TopologyError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const thermred::StabilityError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumericalError;
    } catch (const thermred::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumericalError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumericalError;
    }
}
