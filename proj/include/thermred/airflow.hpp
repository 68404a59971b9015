#pragma once

#include <string>
#include <vector>

#include "thermred/statespace.hpp"

namespace thermred::airflow {

inline constexpr int kExterior = -1;
inline constexpr double kAirCp = 1006.0;    // J/(kg K)
inline constexpr double kRefDensity = 1.2;  // kg/m³ at the reference temperature
inline constexpr double kRefTempK = 293.15;
inline constexpr double kGravity = 9.81;
inline constexpr double kLinearBand = 0.01;  // Pa; power law linearized below

/// Ideal-gas density at fixed pressure: rho0 * T0 / T.
double air_density(double temp_c);

/// Power-law pressure-driven flow path between two pressure nodes
/// (zone index or kExterior).
struct Opening {
    int from = kExterior;
    int to = kExterior;
    double discharge_coefficient = 0.6;
    double area = 0.0;                     // m²
    double height = 0.0;                   // m above the pressure reference
    double wind_pressure_coefficient = 0.0;  // used when exterior-facing
    double flow_exponent = 0.5;
};

void validate(const Opening& opening);

/// Signed mass flow (kg/s, positive from -> to) for a pressure difference
/// ΔP:  ṁ = Cd A ρ (2 |ΔP| / ρ)^n sign(ΔP). Below |ΔP| = kLinearBand the
/// law is replaced by the linear function through the origin that matches
/// the power-law value at the band edge, keeping the function odd and its
/// derivative bounded.
double opening_flow(const Opening& opening, double delta_p, double rho_upwind);
double opening_flow_derivative(const Opening& opening, double delta_p,
                               double rho_upwind);

/// Boundary pressure contribution across the opening (from -> to): thermal
/// buoyancy -g h (ρ(T_from) - ρ(T_to)) plus 0.5 Cp ρ_ext v² on the exterior
/// side. Direction-resolved pressure coefficients are not modeled; Cp is a
/// per-opening constant, so wind_direction_deg is accepted but unused.
double stack_wind_pressure(const Opening& opening, double t_from_c, double t_to_c,
                           double wind_speed, double wind_direction_deg);

struct FlowState {
    Vector zone_pressure;  // Pa, relative to exterior at the reference height
    Vector mass_flow;      // kg/s per opening, positive from -> to
    int iterations = 0;
    double max_imbalance = 0.0;  // kg/s, worst zone after convergence
};

/// Zone pressures balancing the mass flows of every zone (damped Newton on
/// the per-zone net-flow residual). Zones without openings keep pressure 0.
FlowState solve_network(const std::vector<Opening>& openings,
                        const Vector& zone_temps_c, double exterior_temp_c,
                        double wind_speed, double wind_direction_deg,
                        Index zone_count);

/// Prescribed per-link mass flows, zero-order hold. A record holds from its
/// timestamp onward; the last record holds indefinitely. Queries before the
/// first record are a range error. An empty schedule yields zero flows.
class FlowSchedule {
  public:
    struct Record {
        double time = 0.0;
        Vector flows;
    };

    FlowSchedule() = default;
    FlowSchedule(std::vector<std::string> link_ids, std::vector<Record> records);

    /// CSV columns: timestamp (ISO-8601), link id, mass flow (kg/s).
    static FlowSchedule load_csv(const std::string& path);

    Vector at(double t) const;

    bool empty() const { return records_.empty(); }
    Index link_count() const { return std::ssize(link_ids_); }
    const std::vector<std::string>& link_ids() const { return link_ids_; }

  private:
    std::vector<std::string> link_ids_;
    std::vector<Record> records_;
};

}  // namespace thermred::airflow
