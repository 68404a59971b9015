#include "thermred/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "thermred/balred.hpp"
#include "thermred/tvreduction.hpp"

namespace thermred::cli {

namespace {

using nlohmann::json;

double round6(double x) { return std::round(x * 1e6) / 1e6; }

std::string fmt6(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0) {
        return 0.0;
    }
    return n % 2 == 1 ? values[n / 2]
                      : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    return out;
}

std::string stem_of(const std::string& path) {
    const std::size_t dot = path.find_last_of('.');
    const std::size_t slash = path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) {
        return path;
    }
    return path.substr(0, dot);
}

}  // namespace

LoadedCase load_case(const RunConfig& config) {
    if (config.building_path.empty() || config.weather_path.empty()) {
        throw ConfigError("a building file and a weather file are required");
    }
    if (config.strategies.empty()) {
        throw ConfigError("at least one strategy is required");
    }
    LoadedCase c{building::assemble_building(
                     building::load_building(config.building_path)),
                 building::WeatherSeries::load_csv(config.weather_path),
                 std::nullopt,
                 {}};
    if (!config.schedule_path.empty()) {
        c.schedule = airflow::FlowSchedule::load_csv(config.schedule_path);
    }

    sim::SimOptions& opt = c.options;
    opt.strategy = config.strategies.front();
    opt.eps = config.eps;
    opt.flow_tolerance = config.flow_tolerance;
    opt.iteration_eps = config.iteration_eps;
    opt.dt = config.dt;
    opt.periodic_weather = config.periodic_weather;
    opt.t_start = config.from_iso.empty() ? c.weather.start()
                                          : building::parse_iso8601(config.from_iso);
    opt.t_end = config.to_iso.empty() ? c.weather.end()
                                      : building::parse_iso8601(config.to_iso);
    if (!(opt.t_end > opt.t_start)) {
        throw ConfigError("simulation end must be after the start");
    }
    if (!(config.eps >= 0.0)) {
        throw ConfigError("eps must be >= 0");
    }
    const bool has_conditional =
        std::count(config.strategies.begin(), config.strategies.end(),
                   sim::Strategy::Conditional) > 0;
    if (config.flow_tolerance >= 0.0 && !has_conditional) {
        throw ConfigError("--flow-tol applies to the conditional strategy only");
    }
    return c;
}

void write_trajectory_csv(const sim::SimulationResult& result,
                          const std::string& path) {
    std::ofstream out = open_out(path);
    out << "timestamp";
    for (const std::string& zone : result.zone_names) {
        out << ",T_" << zone;
    }
    for (const std::string& id : result.opening_ids) {
        out << ",mdot_" << id;
    }
    out << ",airflow_iters,inner_iters\n";
    for (Index k = 0; k < result.steps(); ++k) {
        out << building::format_iso8601(result.times[k]);
        for (Index z = 0; z < result.zone_air.cols(); ++z) {
            out << ',' << fmt6(result.zone_air(k, z));
        }
        for (Index o = 0; o < result.flows.cols(); ++o) {
            out << ',' << fmt6(result.flows(k, o));
        }
        out << ',' << result.airflow_iterations(k) << ','
            << result.inner_iterations(k) << '\n';
    }
}

ReduceReport make_reduce_report(const RunConfig& config) {
    LoadedCase c = load_case(config);
    const sim::Strategy strategy = config.strategies.front();

    ReduceReport report;
    report.building = c.model.name;
    report.strategy = sim::strategy_name(strategy);
    report.eps = config.eps;

    // reduction happens at the flows seen at simulation start
    Vector flows0 = Vector::Zero(std::ssize(c.model.openings));
    if (c.schedule) {
        // schedule links map onto openings inside the runner; for the report
        // the start-of-schedule values are enough
        const Vector link_flows = c.schedule->at(c.options.t_start);
        for (Index i = 0; i < std::min(link_flows.size(), flows0.size()); ++i) {
            flows0(i) = link_flows(i);
        }
    } else if (!c.model.openings.empty()) {
        const building::WeatherRecord rec = c.weather.at(c.options.t_start);
        const Vector temps = Vector::Constant(std::ssize(c.model.zones), rec.t_air);
        flows0 = airflow::solve_network(c.model.openings, temps, rec.t_air,
                                        rec.wind_speed, rec.wind_dir,
                                        std::ssize(c.model.zones))
                     .mass_flow;
    }

    for (const building::ZoneModel& zone : c.model.zones) {
        ZoneReductionReport zr;
        zr.zone = zone.name;
        zr.full_order = static_cast<int>(zone.order());
        zr.envelope_order = static_cast<int>(zone.envelope_order());

        balred::Reduction reduction;
        if (strategy == sim::Strategy::Separate) {
            const auto pm = zone.partitioned([&](double) { return flows0; });
            reduction = balred::reduce_analysis(tvred::envelope_system(pm), config.eps);
            zr.reduced_order = static_cast<int>(reduction.selected_order);
        } else {
            reduction = balred::reduce_analysis(zone.full_model(flows0), config.eps);
            zr.reduced_order = static_cast<int>(reduction.selected_order);
        }
        zr.bound = reduction.reduced.bound;
        zr.hsv.assign(reduction.hsv.data(), reduction.hsv.data() + reduction.hsv.size());
        zr.minimality_warning = reduction.minimality_warning;
        report.zones.push_back(std::move(zr));
    }
    return report;
}

void write_reduce_report(const ReduceReport& report, const std::string& path) {
    json j;
    j["building"] = report.building;
    j["strategy"] = report.strategy;
    j["eps"] = report.eps;
    j["zones"] = json::array();
    for (const ZoneReductionReport& zr : report.zones) {
        json jz;
        jz["zone"] = zr.zone;
        jz["full_order"] = zr.full_order;
        jz["envelope_order"] = zr.envelope_order;
        jz["reduced_order"] = zr.reduced_order;
        jz["error_bound"] = zr.bound;
        jz["hsv"] = zr.hsv;
        jz["minimality_warning"] = zr.minimality_warning;
        j["zones"].push_back(jz);
    }
    open_out(path) << j.dump(2) << '\n';
}

DeviationStats deviations(const Matrix& baseline_air, const Matrix& other_air) {
    if (baseline_air.rows() != other_air.rows() ||
        baseline_air.cols() != other_air.cols()) {
        throw ConfigError("deviation statistics need runs over identical horizons");
    }
    DeviationStats stats;
    const Index zones = baseline_air.cols();
    const Index steps = baseline_air.rows();

    double pooled_sum = 0.0;
    double pooled_sq = 0.0;
    for (Index z = 0; z < zones; ++z) {
        double zmax = 0.0;
        double sum = 0.0;
        double sq = 0.0;
        for (Index k = 0; k < steps; ++k) {
            const double d = round6(other_air(k, z)) - round6(baseline_air(k, z));
            zmax = std::max(zmax, std::abs(d));
            sum += d;
            sq += d * d;
        }
        const double mean = sum / static_cast<double>(steps);
        stats.zone_max.push_back(zmax);
        stats.zone_std.push_back(
            std::sqrt(std::max(0.0, sq / static_cast<double>(steps) - mean * mean)));
        stats.max = std::max(stats.max, zmax);
        pooled_sum += sum;
        pooled_sq += sq;
    }
    const double count = static_cast<double>(zones * steps);
    const double pooled_mean = pooled_sum / count;
    stats.std_dev = std::sqrt(std::max(0.0, pooled_sq / count - pooled_mean * pooled_mean));
    return stats;
}

ComparisonReport run_compare(const RunConfig& config) {
    if (config.strategies.size() < 2) {
        throw ConfigError("compare needs at least two strategies");
    }
    const auto baseline_it = std::find(config.strategies.begin(),
                                       config.strategies.end(), sim::Strategy::Full);
    if (baseline_it == config.strategies.end()) {
        throw ConfigError("compare needs the full strategy as baseline");
    }
    if (config.runs < 1) {
        throw ConfigError("compare needs runs >= 1");
    }
    LoadedCase c = load_case(config);

    ComparisonReport report;
    report.baseline =
        static_cast<std::size_t>(baseline_it - config.strategies.begin());

    for (const sim::Strategy strategy : config.strategies) {
        sim::SimOptions opt = c.options;
        opt.strategy = strategy;

        StrategyResult sr;
        sr.strategy = strategy;
        std::vector<double> walls;
        for (int r = 0; r < config.runs; ++r) {
            sim::SimulationResult run = sim::run_simulation(
                c.model, c.weather, c.schedule ? &*c.schedule : nullptr, opt);
            walls.push_back(run.setup_seconds + run.stepping_seconds);
            if (r == 0) {
                sr.sim = std::move(run);
            }
        }
        sr.wall_seconds = median(walls);
        sr.setup_seconds = sr.sim.setup_seconds;
        sr.stepping_seconds = sr.sim.stepping_seconds;
        sr.reduced_orders = sr.sim.reduced_orders;
        sr.error_bounds = sr.sim.error_bounds;
        report.strategies.push_back(std::move(sr));
    }

    const Matrix& base_air = report.strategies[report.baseline].sim.zone_air;
    const double base_wall = report.strategies[report.baseline].wall_seconds;
    for (StrategyResult& sr : report.strategies) {
        const DeviationStats stats = deviations(base_air, sr.sim.zone_air);
        sr.zone_max_dev = stats.zone_max;
        sr.zone_std_dev = stats.zone_std;
        sr.max_dev = stats.max;
        sr.std_dev = stats.std_dev;
        sr.speedup = sr.wall_seconds > 0.0 ? base_wall / sr.wall_seconds : 1.0;
    }
    return report;
}

void write_comparison_report(const ComparisonReport& report,
                             const std::string& path) {
    const std::string stem = stem_of(path);
    json j;
    j["baseline"] = sim::strategy_name(report.strategies[report.baseline].strategy);
    j["strategies"] = json::array();
    for (const StrategyResult& sr : report.strategies) {
        const std::string name = sim::strategy_name(sr.strategy);
        json js;
        js["strategy"] = name;
        js["wall_seconds"] = sr.wall_seconds;
        js["setup_seconds"] = sr.setup_seconds;
        js["stepping_seconds"] = sr.stepping_seconds;
        js["speedup_vs_full"] = sr.speedup;
        js["reduced_orders"] = sr.reduced_orders;
        js["error_bounds"] = sr.error_bounds;
        js["zone_max_deviation"] = sr.zone_max_dev;
        js["zone_std_deviation"] = sr.zone_std_dev;
        js["max_deviation"] = sr.max_dev;
        js["std_deviation"] = sr.std_dev;
        js["rereductions"] = sr.sim.rereductions;
        js["trajectory_csv"] = stem + "_" + name + ".csv";
        j["strategies"].push_back(js);
        write_trajectory_csv(sr.sim, stem + "_" + name + ".csv");
    }
    open_out(path) << j.dump(2) << '\n';
}

TimingFit fit_cubic(const std::vector<double>& order_cubed,
                    const std::vector<double>& seconds) {
    if (order_cubed.size() != seconds.size() || order_cubed.size() < 2) {
        throw ConfigError("cubic fit needs at least two matching points");
    }
    const double n = static_cast<double>(order_cubed.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < order_cubed.size(); ++i) {
        mx += order_cubed[i];
        my += seconds[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < order_cubed.size(); ++i) {
        const double dx = order_cubed[i] - mx;
        const double dy = seconds[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    TimingFit fit;
    fit.cubic_coefficient = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.t_fixed = my - fit.cubic_coefficient * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < order_cubed.size(); ++i) {
        const double pred = fit.t_fixed + fit.cubic_coefficient * order_cubed[i];
        ss_res += (seconds[i] - pred) * (seconds[i] - pred);
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

BenchReport run_bench(const RunConfig& config) {
    if (config.eps_sweep.size() < 4) {
        throw ConfigError("bench needs an eps sweep of at least 4 values");
    }
    if (config.runs < 3) {
        throw ConfigError("bench timings need runs >= 3 (median filter)");
    }
    LoadedCase c = load_case(config);

    sim::Strategy reduced_strategy = sim::Strategy::ReduceLti;
    for (const sim::Strategy s : config.strategies) {
        if (s != sim::Strategy::Full) {
            reduced_strategy = s;
            break;
        }
    }

    const auto timed = [&](const sim::SimOptions& opt) {
        std::vector<double> walls, setups, steppings;
        sim::SimulationResult first;
        for (int r = 0; r < config.runs; ++r) {
            sim::SimulationResult run = sim::run_simulation(
                c.model, c.weather, c.schedule ? &*c.schedule : nullptr, opt);
            walls.push_back(run.setup_seconds + run.stepping_seconds);
            setups.push_back(run.setup_seconds);
            steppings.push_back(run.stepping_seconds);
            if (r == 0) {
                first = std::move(run);
            }
        }
        struct Timed {
            sim::SimulationResult sim;
            double wall, setup, stepping;
        };
        return Timed{std::move(first), median(walls), median(setups),
                     median(steppings)};
    };

    BenchReport report;
    report.strategy = sim::strategy_name(reduced_strategy);

    sim::SimOptions base_opt = c.options;
    base_opt.strategy = sim::Strategy::Full;
    const auto baseline = timed(base_opt);
    report.baseline_seconds = baseline.wall;

    std::vector<double> xs, ys;
    for (const double eps : config.eps_sweep) {
        sim::SimOptions opt = c.options;
        opt.strategy = reduced_strategy;
        opt.eps = eps;
        const auto timed_run = timed(opt);

        BenchRow row;
        row.eps = eps;
        row.reduced_orders = timed_run.sim.reduced_orders;
        for (const int nr : row.reduced_orders) {
            row.sum_order_cubed += static_cast<double>(nr) * nr * nr;
        }
        row.setup_seconds = timed_run.setup;
        row.stepping_seconds = timed_run.stepping;
        row.total_seconds = timed_run.wall;
        const DeviationStats stats =
            deviations(baseline.sim.zone_air, timed_run.sim.zone_air);
        row.max_dev = stats.max;
        row.std_dev = stats.std_dev;
        xs.push_back(row.sum_order_cubed);
        ys.push_back(row.total_seconds);
        report.rows.push_back(std::move(row));
    }
    report.fit = fit_cubic(xs, ys);
    return report;
}

void write_bench_csv(const BenchReport& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "eps,orders,sum_nr3,setup_seconds,stepping_seconds,total_seconds,"
           "max_deviation,std_deviation\n";
    for (const BenchRow& row : report.rows) {
        out << row.eps << ',';
        for (std::size_t i = 0; i < row.reduced_orders.size(); ++i) {
            out << (i ? "/" : "") << row.reduced_orders[i];
        }
        out << ',' << row.sum_order_cubed << ',' << fmt6(row.setup_seconds) << ','
            << fmt6(row.stepping_seconds) << ',' << fmt6(row.total_seconds) << ','
            << fmt6(row.max_dev) << ',' << fmt6(row.std_dev) << '\n';
    }
}

OrderSweepReport run_order_sweep(const std::vector<int>& orders, int runs,
                                 double dt, Index steps) {
    if (orders.size() < 2) {
        throw ConfigError("order sweep needs at least two orders");
    }
    if (runs < 3) {
        throw ConfigError("order sweep timings need runs >= 3 (median filter)");
    }
    for (const int n : orders) {
        if (n < 3) {
            throw ConfigError("order sweep orders must be >= 3");
        }
    }

    // Synthetic weather: hourly diurnal cycle long enough for the horizon.
    std::vector<building::WeatherRecord> records;
    const Index hours = steps + 2;
    for (Index h = 0; h <= hours; ++h) {
        building::WeatherRecord r;
        r.time = static_cast<double>(h) * 3600.0;
        const double day_phase = 2.0 * M_PI * static_cast<double>(h % 24) / 24.0;
        r.t_air = 26.0 + 4.0 * std::sin(day_phase - M_PI / 2.0);
        r.t_sky = r.t_air - 12.0;
        r.rh = 70.0;
        r.global_h = std::max(0.0, 800.0 * std::sin(day_phase - M_PI / 2.0));
        r.diffuse_h = 0.3 * r.global_h;
        r.wind_speed = 3.0;
        r.wind_dir = 90.0;
        records.push_back(r);
    }
    const building::WeatherSeries weather(std::move(records));

    OrderSweepReport report;
    std::vector<double> xs, ys;
    for (const int order : orders) {
        // one thick wall meshed to (order - 2) nodes + glazing node + air node
        building::BuildingDescription desc;
        desc.name = "order-sweep";
        building::ZoneDescription zone;
        zone.name = "cell";
        zone.air_volume = 40.0;
        building::WallDescription wall;
        wall.name = "shell";
        wall.area = 60.0;
        wall.boundary.kind = building::BoundaryKind::Exterior;
        wall.layers.push_back({1.75, 2300.0, 920.0, 0.25, order - 2});
        zone.walls.push_back(wall);
        building::GlazingDescription glazing;
        glazing.name = "win";
        glazing.area = 2.0;
        glazing.u_value = 5.7;
        glazing.solar_transmittance = 0.8;
        zone.glazings.push_back(glazing);
        desc.zones.push_back(zone);
        desc.openings.push_back(
            {"exterior", "cell", 0.6, 0.4, 1.0, 0.6, 0.5});
        const building::BuildingModel model = building::assemble_building(desc);

        // flows varying every step force a refactorization per step
        std::vector<airflow::FlowSchedule::Record> flow_records;
        for (Index k = 0; k <= steps + 1; ++k) {
            Vector f(1);
            f(0) = 0.05 + 0.03 * std::sin(0.37 * static_cast<double>(k));
            flow_records.push_back({static_cast<double>(k) * dt, f});
        }
        const airflow::FlowSchedule schedule({model.opening_ids[0]},
                                             std::move(flow_records));

        sim::SimOptions opt;
        opt.strategy = sim::Strategy::Full;
        opt.dt = dt;
        opt.t_start = 0.0;
        opt.t_end = static_cast<double>(steps) * dt;
        opt.periodic_weather = true;

        std::vector<double> times;
        for (int r = 0; r < runs; ++r) {
            const sim::SimulationResult run =
                sim::run_simulation(model, weather, &schedule, opt);
            times.push_back(run.stepping_seconds);
        }

        OrderSweepRow row;
        row.order = order;
        row.order_cubed = static_cast<double>(order) * order * order;
        row.stepping_seconds = median(times);
        xs.push_back(row.order_cubed);
        ys.push_back(row.stepping_seconds);
        report.rows.push_back(row);
    }
    report.fit = fit_cubic(xs, ys);
    return report;
}

void write_order_sweep_csv(const OrderSweepReport& report,
                           const std::string& path) {
    std::ofstream out = open_out(path);
    out << "order,order_cubed,stepping_seconds\n";
    for (const OrderSweepRow& row : report.rows) {
        out << row.order << ',' << row.order_cubed << ','
            << fmt6(row.stepping_seconds) << '\n';
    }
    out << "# fit: t = " << report.fit.t_fixed << " + "
        << report.fit.cubic_coefficient << " * n^3, r2 = " << report.fit.r_squared
        << '\n';
}

std::vector<FlowToleranceRow> run_flow_tolerance_sweep(const RunConfig& config) {
    if (config.flow_tolerance_sweep.empty()) {
        throw ConfigError("flow tolerance sweep needs at least one value");
    }
    RunConfig base = config;
    base.strategies = {sim::Strategy::Full};
    LoadedCase c = load_case(base);

    sim::SimOptions full_opt = c.options;
    full_opt.strategy = sim::Strategy::Full;
    const sim::SimulationResult baseline = sim::run_simulation(
        c.model, c.weather, c.schedule ? &*c.schedule : nullptr, full_opt);

    std::vector<FlowToleranceRow> rows;
    for (const double tol : config.flow_tolerance_sweep) {
        sim::SimOptions opt = c.options;
        opt.strategy = sim::Strategy::Conditional;
        opt.flow_tolerance = tol;
        const sim::SimulationResult run = sim::run_simulation(
            c.model, c.weather, c.schedule ? &*c.schedule : nullptr, opt);

        FlowToleranceRow row;
        row.flow_tolerance = tol;
        row.rereductions = run.rereductions;
        row.wall_seconds = run.setup_seconds + run.stepping_seconds;
        const DeviationStats stats = deviations(baseline.zone_air, run.zone_air);
        row.max_dev = stats.max;
        row.std_dev = stats.std_dev;
        rows.push_back(row);
    }
    return rows;
}

void write_flow_tolerance_csv(const std::vector<FlowToleranceRow>& rows,
                              const std::string& path) {
    std::ofstream out = open_out(path);
    out << "flow_tolerance,rereductions,wall_seconds,max_deviation,std_deviation\n";
    for (const FlowToleranceRow& row : rows) {
        out << row.flow_tolerance << ',' << row.rereductions << ','
            << fmt6(row.wall_seconds) << ',' << fmt6(row.max_dev) << ','
            << fmt6(row.std_dev) << '\n';
    }
}

}  // namespace thermred::cli
