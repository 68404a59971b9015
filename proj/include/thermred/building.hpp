#pragma once

#include <functional>
#include <string>
#include <vector>

#include "thermred/airflow.hpp"
#include "thermred/statespace.hpp"
#include "thermred/tvreduction.hpp"
#include "thermred/weather.hpp"

namespace thermred::building {

struct Layer {
    double conductivity = 0.0;    // W/(m K)
    double density = 0.0;         // kg/m³
    double specific_heat = 0.0;   // J/(kg K)
    double thickness = 0.0;       // m
    int node_count = 3;
};

enum class BoundaryKind { Exterior, Zone, Adiabatic };

struct Boundary {
    BoundaryKind kind = BoundaryKind::Exterior;
    std::string zone;  // set when kind == Zone
};

struct WallDescription {
    std::string name;
    std::vector<Layer> layers;  // ordered outside -> inside
    double area = 0.0;          // m²
    double azimuth_deg = 180.0;
    double tilt_deg = 90.0;
    Boundary boundary;          // far (outside-face) condition
    double solar_absorptance = 0.6;
};

struct GlazingDescription {
    std::string name;
    double area = 0.0;               // m²
    double u_value = 0.0;            // W/(m² K), air to air
    double solar_transmittance = 0.0;
    double azimuth_deg = 180.0;
    double tilt_deg = 90.0;
};

struct ZoneDescription {
    std::string name;
    std::vector<WallDescription> walls;
    std::vector<GlazingDescription> glazings;
    double air_volume = 0.0;   // m³
    double h_interior = 8.0;   // W/(m² K), all interior films
    double h_exterior = 20.0;  // W/(m² K), exterior convective film
    double h_sky = 5.0;        // W/(m² K), linearized long-wave to sky
};

/// One wall as a capacitance/conductance chain, nodes ordered outside ->
/// inside. Half-cell conductances at the two faces exclude surface films;
/// those are composed with the zone film coefficients during zone build.
struct WallChain {
    Vector capacitance;  // J/K per node
    Vector between;      // W/K between consecutive nodes
    double outer_half = 0.0;  // W/K, node 0 to the outer face
    double inner_half = 0.0;  // W/K, last node to the inner face
};

WallChain discretize_wall(const WallDescription& wall);

/// Input layout of one zone:
///   [T_ext, T_sky | incident short-wave per irradiated surface |
///    T_vent_ext, Q_internal | neighbor zone air temperatures].
/// Segment boundaries are fixed when the zone is built; airflow enters the
/// model through time-varying coefficients, never as input values.
struct InputFrame {
    static constexpr Index kMet = 2;
    static constexpr Index kAir = 2;
    Index shortwave_count = 0;
    Index coupling_count = 0;
    std::vector<std::string> labels;

    Index met_offset() const { return 0; }
    Index shortwave_offset() const { return kMet; }
    Index air_offset() const { return kMet + shortwave_count; }
    Index coupling_offset() const { return air_offset() + kAir; }
    Index total() const { return coupling_offset() + coupling_count; }

    Index t_ext() const { return 0; }
    Index t_sky() const { return 1; }
    Index t_vent() const { return air_offset(); }
    Index q_internal() const { return air_offset() + 1; }
};

struct SurfaceGeometry {
    double azimuth_deg = 180.0;
    double tilt_deg = 90.0;
};

/// Where inflow through one building opening injects into a zone's air heat
/// balance. Active only when the signed opening flow enters the zone.
struct AdvectionTap {
    Index opening = 0;
    double entering_sign = 1.0;  // +1: positive opening flow enters this zone
    Index input_column = 0;      // source temperature column
};

/// Nodal model of one zone, already split for time-varying reduction:
/// constant envelope blocks (A11, A12, B1) and an air-node row whose
/// advection terms depend on the current opening flows.
struct ZoneModel {
    std::string name;
    Matrix A11;                    // n1 x n1
    Matrix A12;                    // n1 x 1
    Matrix B1;                     // n1 x m
    Eigen::RowVectorXd a21_const;  // 1 x n1
    double a22_const = 0.0;
    Eigen::RowVectorXd b2_const;   // 1 x m
    double air_capacitance = 0.0;  // J/K
    InputFrame frame;
    std::vector<std::string> state_labels;           // envelope nodes + air
    std::vector<std::string> coupled_zones;          // coupling column order
    std::vector<SurfaceGeometry> shortwave_geometry; // per shortwave column
    std::vector<AdvectionTap> taps;                  // filled during assembly

    Index envelope_order() const { return A11.rows(); }
    Index order() const { return envelope_order() + 1; }
    Index air_index() const { return envelope_order(); }

    /// Air row with advection folded in for the given signed opening flows.
    void air_row(const Vector& opening_flows, double& a22,
                 Eigen::RowVectorXd& b2) const;

    /// Full model at fixed flows: C = I, D = 0.
    StateSpaceModel full_model(const Vector& opening_flows) const;

    /// Partitioned view whose providers evaluate `flows_at` on demand. The
    /// zone must outlive the returned object.
    tvred::PartitionedModel partitioned(
        std::function<Vector(double)> flows_at) const;

    /// Registers a coupling input for `zone` if not present; returns its
    /// absolute input column.
    Index ensure_coupling(const std::string& zone);
};

ZoneModel build_zone(const ZoneDescription& zone);

struct OpeningDescription {
    std::string from;  // zone name or "exterior"
    std::string to;
    double discharge_coefficient = 0.6;
    double area = 0.0;
    double height = 0.0;
    double wind_pressure_coefficient = 0.0;
    double flow_exponent = 0.5;
};

struct BuildingDescription {
    std::string name;
    double latitude_deg = -21.0;
    std::vector<ZoneDescription> zones;
    std::vector<OpeningDescription> openings;
};

/// Multi-zone assembly: per-zone models with coupling inputs wired for both
/// party walls and airflow links. Zones are advanced sequentially with
/// neighbor temperatures taken from the previous sweep.
struct BuildingModel {
    std::string name;
    double latitude_deg = -21.0;
    std::vector<ZoneModel> zones;
    std::vector<airflow::Opening> openings;
    std::vector<std::string> opening_ids;  // "<from>-><to>", "#k" when repeated

    Index zone_index(const std::string& name) const;
};

BuildingModel assemble_building(const BuildingDescription& description);

/// JSON building description (schema documented in the README).
BuildingDescription parse_building(const std::string& json_text);
BuildingDescription load_building(const std::string& path);

/// Per-zone input vectors at time t with the weather-driven segments filled
/// (meteorological, short-wave, ventilation source temperature). Internal
/// gains and coupling temperatures are left zero for the caller.
std::vector<Vector> weather_inputs(const WeatherSeries& weather,
                                   const BuildingModel& model, double t);

}  // namespace thermred::building
