#include "thermred/airflow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "thermred/weather.hpp"  // parse_iso8601

namespace thermred::airflow {

double air_density(double temp_c) {
    const double t_k = temp_c + 273.15;
    if (!(t_k > 0.0)) {
        throw ValueError("temperature below absolute zero");
    }
    return kRefDensity * kRefTempK / t_k;
}

void validate(const Opening& opening) {
    if (!(opening.discharge_coefficient > 0.0) ||
        opening.discharge_coefficient > 1.0) {
        throw ValueError("discharge coefficient must be in (0, 1]");
    }
    if (!(opening.area > 0.0)) {
        throw ValueError("opening area must be > 0");
    }
    if (!(opening.flow_exponent > 0.0) || opening.flow_exponent > 1.0) {
        throw ValueError("flow exponent must be in (0, 1]");
    }
    if (opening.from == kExterior && opening.to == kExterior) {
        throw ValueError("opening cannot connect exterior to exterior");
    }
    if (opening.from == opening.to) {
        throw ValueError("opening endpoints must differ");
    }
}

namespace {

double power_law(const Opening& o, double abs_dp, double rho) {
    return o.discharge_coefficient * o.area * rho *
           std::pow(2.0 * abs_dp / rho, o.flow_exponent);
}

}  // namespace

double opening_flow(const Opening& o, double delta_p, double rho_upwind) {
    if (!std::isfinite(delta_p)) {
        throw ValueError("pressure difference must be finite");
    }
    const double abs_dp = std::abs(delta_p);
    const double sign = delta_p >= 0.0 ? 1.0 : -1.0;
    if (abs_dp < kLinearBand) {
        const double edge = power_law(o, kLinearBand, rho_upwind);
        return sign * edge * (abs_dp / kLinearBand);
    }
    return sign * power_law(o, abs_dp, rho_upwind);
}

double opening_flow_derivative(const Opening& o, double delta_p,
                               double rho_upwind) {
    const double abs_dp = std::abs(delta_p);
    if (abs_dp < kLinearBand) {
        return power_law(o, kLinearBand, rho_upwind) / kLinearBand;
    }
    return o.flow_exponent * power_law(o, abs_dp, rho_upwind) / abs_dp;
}

double stack_wind_pressure(const Opening& o, double t_from_c, double t_to_c,
                           double wind_speed, double /*wind_direction_deg*/) {
    const double stack =
        -kGravity * o.height * (air_density(t_from_c) - air_density(t_to_c));
    double wind = 0.0;
    if (o.from == kExterior || o.to == kExterior) {
        const double exterior_t = o.from == kExterior ? t_from_c : t_to_c;
        const double q = 0.5 * o.wind_pressure_coefficient *
                         air_density(exterior_t) * wind_speed * wind_speed;
        wind = o.from == kExterior ? q : -q;
    }
    return stack + wind;
}

FlowState solve_network(const std::vector<Opening>& openings,
                        const Vector& zone_temps_c, double exterior_temp_c,
                        double wind_speed, double wind_direction_deg,
                        Index zone_count) {
    if (zone_temps_c.size() != zone_count) {
        throw DimensionError("zone temperature vector size mismatch");
    }
    for (const Opening& o : openings) {
        validate(o);
        if (o.from >= zone_count || o.to >= zone_count || o.from < kExterior ||
            o.to < kExterior) {
            throw DimensionError("opening references an unknown zone");
        }
    }

    FlowState state;
    state.zone_pressure = Vector::Zero(zone_count);
    state.mass_flow = Vector::Zero(std::ssize(openings));
    if (openings.empty()) {
        return state;
    }

    // Only zones touched by an opening are unknowns.
    std::vector<Index> unknown_of_zone(zone_count, -1);
    std::vector<Index> zone_of_unknown;
    for (const Opening& o : openings) {
        for (const int z : {o.from, o.to}) {
            if (z != kExterior && unknown_of_zone[z] < 0) {
                unknown_of_zone[z] = std::ssize(zone_of_unknown);
                zone_of_unknown.push_back(z);
            }
        }
    }
    const Index nu = std::ssize(zone_of_unknown);

    const auto temp_of = [&](int node) {
        return node == kExterior ? exterior_temp_c : zone_temps_c(node);
    };
    const auto boundary = [&](const Opening& o) {
        return stack_wind_pressure(o, temp_of(o.from), temp_of(o.to), wind_speed,
                                   wind_direction_deg);
    };

    Vector pressure = Vector::Zero(nu);
    const auto pressure_of = [&](const Vector& p, int node) {
        return node == kExterior ? 0.0 : p(unknown_of_zone[node]);
    };

    const auto evaluate = [&](const Vector& p, Vector& residual, Vector& flows) {
        residual.setZero(nu);
        for (std::size_t i = 0; i < openings.size(); ++i) {
            const Opening& o = openings[i];
            const double dp =
                pressure_of(p, o.from) - pressure_of(p, o.to) + boundary(o);
            const double rho =
                air_density(temp_of(dp >= 0.0 ? o.from : o.to));
            const double mdot = opening_flow(o, dp, rho);
            flows(i) = mdot;
            if (o.to != kExterior) {
                residual(unknown_of_zone[o.to]) += mdot;
            }
            if (o.from != kExterior) {
                residual(unknown_of_zone[o.from]) -= mdot;
            }
        }
    };

    Vector residual(nu), flows(std::ssize(openings));
    evaluate(pressure, residual, flows);

    constexpr int kMaxIterations = 100;
    constexpr double kTolerance = 1e-10;  // kg/s, margin under the 1e-9 contract
    int it = 0;
    while (residual.lpNorm<Eigen::Infinity>() > kTolerance) {
        if (++it > kMaxIterations) {
            throw ConvergenceError("airflow network solve did not converge",
                                   residual.lpNorm<Eigen::Infinity>());
        }
        Matrix jac = Matrix::Zero(nu, nu);
        for (const Opening& o : openings) {
            const double dp =
                pressure_of(pressure, o.from) - pressure_of(pressure, o.to) + boundary(o);
            const double rho = air_density(temp_of(dp >= 0.0 ? o.from : o.to));
            const double slope = opening_flow_derivative(o, dp, rho);
            const Index uf = o.from == kExterior ? -1 : unknown_of_zone[o.from];
            const Index ut = o.to == kExterior ? -1 : unknown_of_zone[o.to];
            if (ut >= 0) {
                if (uf >= 0) {
                    jac(ut, uf) += slope;
                }
                jac(ut, ut) -= slope;
            }
            if (uf >= 0) {
                jac(uf, uf) -= slope;
                if (ut >= 0) {
                    jac(uf, ut) += slope;
                }
            }
        }

        const Vector delta = jac.partialPivLu().solve(-residual);
        const double base_norm = residual.lpNorm<Eigen::Infinity>();
        double lambda = 1.0;
        Vector trial_res(nu), trial_flows(flows.size());
        while (true) {
            const Vector trial = pressure + lambda * delta;
            evaluate(trial, trial_res, trial_flows);
            if (trial_res.lpNorm<Eigen::Infinity>() < base_norm || lambda < 1e-6) {
                pressure = trial;
                residual = trial_res;
                flows = trial_flows;
                break;
            }
            lambda *= 0.5;
        }
    }

    for (Index i = 0; i < nu; ++i) {
        state.zone_pressure(zone_of_unknown[i]) = pressure(i);
    }
    state.mass_flow = flows;
    state.iterations = it;
    state.max_imbalance = residual.size() ? residual.lpNorm<Eigen::Infinity>() : 0.0;
    return state;
}

FlowSchedule::FlowSchedule(std::vector<std::string> link_ids,
                           std::vector<Record> records)
    : link_ids_(std::move(link_ids)), records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (records_[i].flows.size() != link_count()) {
            throw DimensionError("schedule record size must match the link count");
        }
        if (i > 0 && !(records_[i].time > records_[i - 1].time)) {
            throw ValueError("schedule timestamps must be strictly increasing");
        }
    }
}

FlowSchedule FlowSchedule::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open schedule file: " + path);
    }
    // Long format (timestamp, link, flow); links are columned in first-seen order.
    std::vector<std::string> ids;
    std::map<std::string, Index> column;
    std::vector<std::pair<double, std::map<Index, double>>> raw;

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("timestamp", 0) == 0) {
            continue;
        }
        std::stringstream ss(line);
        std::string ts, link, value;
        if (!std::getline(ss, ts, ',') || !std::getline(ss, link, ',') ||
            !std::getline(ss, value, ',')) {
            throw IoError("malformed schedule line: " + line);
        }
        double t, flow;
        try {
            t = building::parse_iso8601(ts);
            flow = std::stod(value);
        } catch (const IoError&) {
            throw;
        } catch (const std::exception&) {
            throw IoError("malformed schedule line: " + line);
        }
        if (!column.contains(link)) {
            column[link] = std::ssize(ids);
            ids.push_back(link);
        }
        if (raw.empty() || raw.back().first != t) {
            if (!raw.empty() && t < raw.back().first) {
                throw IoError("schedule timestamps must be non-decreasing in the file");
            }
            raw.emplace_back(t, std::map<Index, double>{});
        }
        raw.back().second[column[link]] = flow;
    }

    std::vector<Record> records;
    Vector hold = Vector::Zero(std::ssize(ids));
    for (const auto& [t, updates] : raw) {
        for (const auto& [col, flow] : updates) {
            hold(col) = flow;
        }
        records.push_back({t, hold});
    }
    return FlowSchedule(std::move(ids), std::move(records));
}

Vector FlowSchedule::at(double t) const {
    if (records_.empty()) {
        return Vector::Zero(link_count());
    }
    if (t < records_.front().time) {
        throw RangeError("time before the first schedule record");
    }
    const auto it = std::upper_bound(
        records_.begin(), records_.end(), t,
        [](double value, const Record& r) { return value < r.time; });
    return (it - 1)->flows;
}

}  // namespace thermred::airflow
