#include "thermred/runner.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>

#include "thermred/balred.hpp"
#include "thermred/tvreduction.hpp"

namespace thermred::sim {

Strategy parse_strategy(const std::string& name) {
    if (name == "full") return Strategy::Full;
    if (name == "reduce-lti") return Strategy::ReduceLti;
    if (name == "conditional") return Strategy::Conditional;
    if (name == "separate") return Strategy::Separate;
    throw ConfigError("unknown strategy '" + name +
                      "' (expected full, reduce-lti, conditional or separate)");
}

std::string strategy_name(Strategy strategy) {
    switch (strategy) {
        case Strategy::Full: return "full";
        case Strategy::ReduceLti: return "reduce-lti";
        case Strategy::Conditional: return "conditional";
        case Strategy::Separate: return "separate";
    }
    return "?";
}

namespace {

using building::BuildingModel;
using building::ZoneModel;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

// Maps schedule links onto building openings by id.
std::vector<Index> schedule_columns(const airflow::FlowSchedule& schedule,
                                    const BuildingModel& model) {
    std::vector<Index> opening_of_link;
    for (const std::string& link : schedule.link_ids()) {
        Index found = -1;
        for (std::size_t i = 0; i < model.opening_ids.size(); ++i) {
            if (model.opening_ids[i] == link) {
                found = static_cast<Index>(i);
                break;
            }
        }
        if (found < 0) {
            throw ConfigError("schedule link '" + link +
                              "' does not name a building opening");
        }
        opening_of_link.push_back(found);
    }
    return opening_of_link;
}

struct ZoneRun {
    // full
    Vector x_full;
    std::optional<StepSolver> full_solver;
    double cached_a22 = 0.0;
    Eigen::RowVectorXd cached_b2;

    // reduce-lti / conditional
    std::optional<balred::ReducedModel> lti;
    std::optional<StepSolver> lti_solver;
    Vector x_r;
    std::optional<tvred::ConditionalReducer> reducer;

    // separate
    tvred::PartitionedModel pm;
    std::optional<tvred::CoupledStepper> stepper;
    tvred::CoupledState coupled;

    // bookkeeping shared by all strategies
    Vector u_prev;
    Vector outputs_prev;  // all nodal temperatures at the previous step

    // pending (proposed, not yet committed) values for the current step
    Vector pending_state;
    Vector pending_outputs;
    tvred::CoupledState pending_coupled;
    int pending_iterations = 0;
};

Vector tap_flows(const ZoneModel& zone, const Vector& flows) {
    Vector out(std::ssize(zone.taps));
    for (std::size_t i = 0; i < zone.taps.size(); ++i) {
        out(i) = flows(zone.taps[i].opening);
    }
    return out;
}

}  // namespace

SimulationResult run_simulation(const BuildingModel& model,
                                const building::WeatherSeries& weather_in,
                                const airflow::FlowSchedule* schedule,
                                const SimOptions& options) {
    if (!(options.dt > 0.0)) {
        throw ConfigError("time step must be positive");
    }
    const auto steps =
        static_cast<Index>(std::llround((options.t_end - options.t_start) / options.dt));
    if (steps < 1) {
        throw ConfigError("simulation span must cover at least one step");
    }

    building::WeatherSeries weather = weather_in;
    weather.set_periodic_extension(options.periodic_weather);

    const Index zone_count = std::ssize(model.zones);
    const Index opening_count = std::ssize(model.openings);

    std::vector<Index> opening_of_link;
    if (schedule != nullptr) {
        opening_of_link = schedule_columns(*schedule, model);
    }
    const auto scheduled_flows = [&](double t) {
        Vector flows = Vector::Zero(opening_count);
        const Vector link_flows = schedule->at(t);
        for (Index i = 0; i < link_flows.size(); ++i) {
            flows(opening_of_link[i]) = link_flows(i);
        }
        return flows;
    };

    const auto setup_t0 = std::chrono::steady_clock::now();

    const double t0_temp = std::isnan(options.initial_temperature)
                               ? weather.at(options.t_start).t_air
                               : options.initial_temperature;
    Vector air_committed = Vector::Constant(zone_count, t0_temp);

    Vector flows0;
    if (schedule != nullptr) {
        flows0 = scheduled_flows(options.t_start);
    } else {
        const building::WeatherRecord rec0 = weather.at(options.t_start);
        flows0 = airflow::solve_network(model.openings, air_committed, rec0.t_air,
                                        rec0.wind_speed, rec0.wind_dir, zone_count)
                     .mass_flow;
    }

    double flow_tolerance = options.flow_tolerance;
    if (flow_tolerance < 0.0) {
        const double mean_flow =
            flows0.size() > 0 ? flows0.cwiseAbs().mean() : 0.0;
        flow_tolerance = mean_flow > 0.0 ? 0.1 * mean_flow : 0.01;
    }

    // initial inputs: weather segments plus uniform coupling temperatures
    std::vector<Vector> u0 =
        building::weather_inputs(weather, model, options.t_start);
    for (Index z = 0; z < zone_count; ++z) {
        const ZoneModel& zone = model.zones[z];
        for (Index c = 0; c < zone.frame.coupling_count; ++c) {
            u0[z](zone.frame.coupling_offset() + c) = t0_temp;
        }
    }

    std::vector<ZoneRun> runs(zone_count);
    auto flow_context = std::make_shared<Vector>(flows0);

    SimulationResult result;
    for (Index z = 0; z < zone_count; ++z) {
        result.zone_names.push_back(model.zones[z].name);
        result.full_orders.push_back(static_cast<int>(model.zones[z].order()));
    }
    result.opening_ids = model.opening_ids;

    switch (options.strategy) {
        case Strategy::Full: {
            for (Index z = 0; z < zone_count; ++z) {
                const ZoneModel& zone = model.zones[z];
                runs[z].x_full = Vector::Constant(zone.order(), t0_temp);
                zone.air_row(flows0, runs[z].cached_a22, runs[z].cached_b2);
                runs[z].full_solver.emplace(zone.full_model(flows0), options.dt);
                runs[z].outputs_prev = runs[z].x_full;
                result.reduced_orders.push_back(static_cast<int>(zone.order()));
                result.error_bounds.push_back(0.0);
            }
            break;
        }
        case Strategy::ReduceLti: {
            std::vector<StateSpaceModel> fulls;
            for (Index z = 0; z < zone_count; ++z) {
                fulls.push_back(model.zones[z].full_model(flows0));
            }
            std::vector<balred::Reduction> reductions =
                balred::reduce_batch(fulls, options.eps);
            for (Index z = 0; z < zone_count; ++z) {
                ZoneRun& run = runs[z];
                run.lti = std::move(reductions[z].reduced);
                run.lti_solver.emplace(run.lti->sys, options.dt);
                const Vector t_nodes =
                    Vector::Constant(model.zones[z].order(), t0_temp);
                run.x_r = tvred::recover_reduced_state(run.lti->sys.C,
                                                       run.lti->sys.D, t_nodes,
                                                       u0[z])
                              .state;
                run.outputs_prev = t_nodes;
                result.reduced_orders.push_back(static_cast<int>(run.lti->order));
                result.error_bounds.push_back(run.lti->bound);
            }
            break;
        }
        case Strategy::Conditional: {
            for (Index z = 0; z < zone_count; ++z) {
                const ZoneModel& zone = model.zones[z];
                const Vector t_nodes = Vector::Constant(zone.order(), t0_temp);
                runs[z].reducer.emplace(zone.full_model(flows0),
                                        tap_flows(zone, flows0), t_nodes, u0[z],
                                        options.eps, flow_tolerance, options.dt);
                runs[z].outputs_prev = t_nodes;
            }
            break;
        }
        case Strategy::Separate: {
            std::vector<StateSpaceModel> envelopes;
            for (Index z = 0; z < zone_count; ++z) {
                runs[z].pm = model.zones[z].partitioned(
                    [flow_context](double) { return *flow_context; });
                envelopes.push_back(tvred::envelope_system(runs[z].pm));
            }
            std::vector<balred::Reduction> reductions =
                balred::reduce_batch(envelopes, options.eps);
            for (Index z = 0; z < zone_count; ++z) {
                ZoneRun& run = runs[z];
                tvred::CoupledReducedModel crm;
                crm.envelope = std::move(reductions[z].reduced);
                crm.iteration_eps = options.iteration_eps;
                crm.max_iterations = options.max_iterations;
                result.reduced_orders.push_back(static_cast<int>(crm.envelope.order) + 1);
                result.error_bounds.push_back(crm.envelope.bound);
                run.stepper.emplace(std::move(crm), options.dt);

                const Index n1 = model.zones[z].envelope_order();
                Vector u_ext(u0[z].size() + 1);
                u_ext.head(u0[z].size()) = u0[z];
                u_ext(u0[z].size()) = t0_temp;
                run.coupled.envelope_state =
                    tvred::recover_reduced_state(
                        run.stepper->model().envelope.sys.C,
                        run.stepper->model().envelope.sys.D,
                        Vector::Constant(n1, t0_temp), u_ext)
                        .state;
                run.coupled.air_state = Vector::Constant(1, t0_temp);
                run.outputs_prev = Vector::Constant(n1 + 1, t0_temp);
            }
            break;
        }
    }
    std::vector<std::vector<Index>> neighbor_index(zone_count);
    for (Index z = 0; z < zone_count; ++z) {
        runs[z].u_prev = u0[z];
        for (const std::string& neighbor : model.zones[z].coupled_zones) {
            neighbor_index[z].push_back(model.zone_index(neighbor));
        }
    }

    result.setup_seconds = seconds_since(setup_t0);

    result.times.resize(steps);
    result.zone_air.resize(steps, zone_count);
    result.flows.resize(steps, opening_count);
    result.airflow_iterations.resize(steps);
    result.inner_iterations.resize(steps);

    const auto stepping_t0 = std::chrono::steady_clock::now();

    Vector air_guess = air_committed;
    Vector air_new = air_committed;
    std::vector<Vector> u_now(zone_count);

    for (Index k = 0; k < steps; ++k) {
        const double t_now = options.t_start + static_cast<double>(k + 1) * options.dt;
        const building::WeatherRecord rec = weather.at(t_now);
        const std::vector<Vector> base = building::weather_inputs(weather, model, t_now);

        air_guess = air_committed;
        Vector flows;
        Vector flows_prev;
        int sweeps = 0;
        int inner = 0;

        const int max_sweeps = schedule != nullptr ? 1 : options.airflow_coupling_max;
        for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
            sweeps = sweep;
            flows = schedule != nullptr
                        ? scheduled_flows(t_now)
                        : airflow::solve_network(model.openings, air_guess, rec.t_air,
                                                 rec.wind_speed, rec.wind_dir,
                                                 zone_count)
                              .mass_flow;

            if (sweep == 1) {
                if (options.strategy == Strategy::Conditional) {
                    for (Index z = 0; z < zone_count; ++z) {
                        const ZoneModel& zone = model.zones[z];
                        if (runs[z].reducer->maybe_update(
                                zone.full_model(flows), tap_flows(zone, flows),
                                runs[z].outputs_prev, runs[z].u_prev)) {
                            ++inner;
                            ++result.rereductions;
                        }
                    }
                }
            }
            if (options.strategy == Strategy::Full) {
                for (Index z = 0; z < zone_count; ++z) {
                    const ZoneModel& zone = model.zones[z];
                    double a22;
                    Eigen::RowVectorXd b2;
                    zone.air_row(flows, a22, b2);
                    if (a22 != runs[z].cached_a22 ||
                        (b2.array() != runs[z].cached_b2.array()).any()) {
                        runs[z].full_solver.emplace(zone.full_model(flows), options.dt);
                        runs[z].cached_a22 = a22;
                        runs[z].cached_b2 = b2;
                    }
                }
            }
            if (options.strategy == Strategy::Separate) {
                *flow_context = flows;
            }

            int sweep_inner = 0;
            for (Index z = 0; z < zone_count; ++z) {
                const ZoneModel& zone = model.zones[z];
                Vector u = base[z];
                for (Index c = 0; c < zone.frame.coupling_count; ++c) {
                    u(zone.frame.coupling_offset() + c) =
                        air_guess(neighbor_index[z][c]);
                }
                u_now[z] = u;

                ZoneRun& run = runs[z];
                switch (options.strategy) {
                    case Strategy::Full: {
                        StepResult r = run.full_solver->step(run.x_full, u);
                        run.pending_state = std::move(r.state);
                        run.pending_outputs = run.pending_state;
                        air_new(z) = run.pending_state(zone.air_index());
                        break;
                    }
                    case Strategy::ReduceLti: {
                        StepResult r = run.lti_solver->step(run.x_r, u);
                        run.pending_state = std::move(r.state);
                        run.pending_outputs = std::move(r.output);
                        air_new(z) = run.pending_outputs(zone.air_index());
                        break;
                    }
                    case Strategy::Conditional: {
                        StepResult r = run.reducer->propose(u);
                        run.pending_state = std::move(r.state);
                        run.pending_outputs = std::move(r.output);
                        air_new(z) = run.pending_outputs(zone.air_index());
                        break;
                    }
                    case Strategy::Separate: {
                        tvred::CoupledStep cs =
                            run.stepper->step(run.pm, t_now, u, run.coupled);
                        run.pending_coupled.envelope_state = cs.envelope_state;
                        run.pending_coupled.air_state = cs.air_state;
                        run.pending_outputs.resize(zone.order());
                        run.pending_outputs.head(zone.envelope_order()) =
                            cs.envelope_outputs;
                        run.pending_outputs(zone.air_index()) = cs.air_state(0);
                        sweep_inner = std::max(sweep_inner, cs.iterations);
                        air_new(z) = cs.air_state(0);
                        break;
                    }
                }
            }
            if (options.strategy == Strategy::Separate) {
                inner = sweep_inner;
            }

            air_guess = air_new;
            if (schedule != nullptr) {
                break;
            }
            if (sweep > 1) {
                bool settled = true;
                for (Index i = 0; i < flows.size(); ++i) {
                    const double scale = std::max(std::abs(flows_prev(i)), 1e-3);
                    settled = settled && std::abs(flows(i) - flows_prev(i)) <=
                                             options.airflow_relative_tol * scale;
                }
                if (settled) {
                    break;
                }
            }
            flows_prev = flows;
        }

        // commit
        for (Index z = 0; z < zone_count; ++z) {
            ZoneRun& run = runs[z];
            switch (options.strategy) {
                case Strategy::Full:
                    run.x_full = run.pending_state;
                    break;
                case Strategy::ReduceLti:
                    run.x_r = run.pending_state;
                    break;
                case Strategy::Conditional:
                    run.reducer->commit(run.pending_state);
                    break;
                case Strategy::Separate:
                    run.coupled = run.pending_coupled;
                    break;
            }
            run.outputs_prev = run.pending_outputs;
            run.u_prev = u_now[z];
        }
        air_committed = air_new;

        result.times[k] = t_now;
        result.zone_air.row(k) = air_committed.transpose();
        if (opening_count > 0) {
            result.flows.row(k) = flows.transpose();
        }
        result.airflow_iterations(k) = sweeps;
        result.inner_iterations(k) = inner;
    }

    if (options.strategy == Strategy::Conditional) {
        result.reduced_orders.clear();
        result.error_bounds.clear();
        for (Index z = 0; z < zone_count; ++z) {
            result.reduced_orders.push_back(
                static_cast<int>(runs[z].reducer->current().order));
            result.error_bounds.push_back(runs[z].reducer->current().bound);
        }
    }

    result.stepping_seconds = seconds_since(stepping_t0);
    return result;
}

}  // namespace thermred::sim
