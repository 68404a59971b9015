#include "thermred/building.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace thermred::building {

namespace {

constexpr double kGlazingCapacitancePerArea = 12600.0;  // J/(m² K)

double series(double g1, double g2) {
    if (g1 <= 0.0 || g2 <= 0.0) {
        return 0.0;
    }
    return 1.0 / (1.0 / g1 + 1.0 / g2);
}

void validate_layer(const Layer& layer, const std::string& where) {
    if (!(layer.conductivity > 0.0) || !(layer.density > 0.0) ||
        !(layer.specific_heat > 0.0) || !(layer.thickness > 0.0)) {
        throw ValueError(where + ": layer properties must be positive");
    }
    if (layer.node_count < 1) {
        throw ValueError(where + ": node count must be >= 1");
    }
}

void validate_zone(const ZoneDescription& zone) {
    if (zone.name.empty()) {
        throw ValueError("zone needs a name");
    }
    if (!(zone.air_volume > 0.0)) {
        throw ValueError(zone.name + ": air volume must be positive");
    }
    if (!(zone.h_interior > 0.0) || !(zone.h_exterior > 0.0) || zone.h_sky < 0.0) {
        throw ValueError(zone.name + ": film coefficients must be positive");
    }
    for (const WallDescription& wall : zone.walls) {
        if (wall.layers.empty()) {
            throw ValueError(zone.name + "." + wall.name + ": wall needs layers");
        }
        if (!(wall.area > 0.0)) {
            throw ValueError(zone.name + "." + wall.name + ": area must be positive");
        }
        if (wall.boundary.kind == BoundaryKind::Zone && wall.boundary.zone.empty()) {
            throw ValueError(zone.name + "." + wall.name + ": zone boundary needs a name");
        }
        for (const Layer& layer : wall.layers) {
            validate_layer(layer, zone.name + "." + wall.name);
        }
    }
    for (const GlazingDescription& g : zone.glazings) {
        if (!(g.area > 0.0) || !(g.u_value > 0.0)) {
            throw ValueError(zone.name + "." + g.name + ": glazing area and U must be positive");
        }
        if (g.solar_transmittance < 0.0 || g.solar_transmittance > 1.0) {
            throw ValueError(zone.name + "." + g.name + ": transmittance must be in [0, 1]");
        }
    }
}

}  // namespace

WallChain discretize_wall(const WallDescription& wall) {
    if (wall.layers.empty() || !(wall.area > 0.0)) {
        throw ValueError("wall discretization needs layers and a positive area");
    }
    for (const Layer& layer : wall.layers) {
        validate_layer(layer, wall.name);
    }

    WallChain chain;
    std::vector<double> caps;
    std::vector<double> between;
    double pending_half = 0.0;  // resistance dangling from the previous node

    for (std::size_t li = 0; li < wall.layers.size(); ++li) {
        const Layer& layer = wall.layers[li];
        const int c = layer.node_count;
        const double cell_r =
            layer.thickness / (static_cast<double>(c) * layer.conductivity * wall.area);
        const double cell_cap = layer.density * layer.specific_heat * layer.thickness *
                                wall.area / static_cast<double>(c);
        for (int i = 0; i < c; ++i) {
            if (caps.empty()) {
                chain.outer_half = 1.0 / (0.5 * cell_r);
            } else {
                between.push_back(1.0 / (pending_half + 0.5 * cell_r));
            }
            caps.push_back(cell_cap);
            pending_half = 0.5 * cell_r;
        }
    }
    chain.inner_half = 1.0 / pending_half;

    chain.capacitance = Eigen::Map<Vector>(caps.data(), std::ssize(caps));
    chain.between = Eigen::Map<Vector>(between.data(), std::ssize(between));
    return chain;
}

void ZoneModel::air_row(const Vector& opening_flows, double& a22,
                        Eigen::RowVectorXd& b2) const {
    a22 = a22_const;
    b2 = b2_const;
    for (const AdvectionTap& tap : taps) {
        const double entering = tap.entering_sign * opening_flows(tap.opening);
        if (entering > 0.0) {
            const double kappa = entering * airflow::kAirCp / air_capacitance;
            a22 -= kappa;
            b2(tap.input_column) += kappa;
        }
    }
}

StateSpaceModel ZoneModel::full_model(const Vector& opening_flows) const {
    const Index n1 = envelope_order();
    const Index m = frame.total();

    double a22;
    Eigen::RowVectorXd b2;
    air_row(opening_flows, a22, b2);

    Matrix a(n1 + 1, n1 + 1);
    a.topLeftCorner(n1, n1) = A11;
    a.topRightCorner(n1, 1) = A12;
    a.bottomLeftCorner(1, n1) = a21_const;
    a(n1, n1) = a22;

    Matrix b(n1 + 1, m);
    b.topRows(n1) = B1;
    b.bottomRows(1) = b2;
    return StateSpaceModel::full_observation(std::move(a), std::move(b),
                                             state_labels, frame.labels);
}

tvred::PartitionedModel ZoneModel::partitioned(
    std::function<Vector(double)> flows_at) const {
    tvred::PartitionedModel pm;
    pm.A11 = A11;
    pm.A12 = A12;
    pm.B1 = B1;
    pm.a21 = [row = Matrix(a21_const)](double) { return row; };
    pm.a22 = [self = this, flows_at](double t) {
        double a22;
        Eigen::RowVectorXd b2;
        self->air_row(flows_at(t), a22, b2);
        Matrix out(1, 1);
        out(0, 0) = a22;
        return out;
    };
    pm.b2 = [self = this, flows_at](double t) {
        double a22;
        Eigen::RowVectorXd b2;
        self->air_row(flows_at(t), a22, b2);
        return Matrix(b2);
    };
    return pm;
}

Index ZoneModel::ensure_coupling(const std::string& zone) {
    for (std::size_t i = 0; i < coupled_zones.size(); ++i) {
        if (coupled_zones[i] == zone) {
            return frame.coupling_offset() + static_cast<Index>(i);
        }
    }
    coupled_zones.push_back(zone);
    frame.coupling_count += 1;
    frame.labels.push_back("T_zone:" + zone);

    const Index m = frame.total();
    B1.conservativeResize(Eigen::NoChange, m);
    B1.col(m - 1).setZero();
    b2_const.conservativeResize(m);
    b2_const(m - 1) = 0.0;
    return m - 1;
}

ZoneModel build_zone(const ZoneDescription& zone) {
    validate_zone(zone);

    ZoneModel zm;
    zm.name = zone.name;
    zm.air_capacitance =
        airflow::kRefDensity * airflow::kAirCp * zone.air_volume;

    // Node layout: wall chains in declaration order, then glazing nodes.
    std::vector<WallChain> chains;
    Index n1 = 0;
    for (const WallDescription& wall : zone.walls) {
        chains.push_back(discretize_wall(wall));
        n1 += chains.back().capacitance.size();
    }
    const Index glazing_offset = n1;
    n1 += std::ssize(zone.glazings);

    // Input frame: short-wave columns for exterior walls and glazings,
    // coupling columns for party walls (airflow links are added at assembly).
    InputFrame& frame = zm.frame;
    frame.labels = {"T_ext", "T_sky"};
    std::vector<Index> wall_sw_column(zone.walls.size(), -1);
    std::vector<Index> glazing_sw_column(zone.glazings.size(), -1);
    for (std::size_t w = 0; w < zone.walls.size(); ++w) {
        if (zone.walls[w].boundary.kind == BoundaryKind::Exterior) {
            wall_sw_column[w] = frame.shortwave_offset() + frame.shortwave_count;
            frame.shortwave_count += 1;
            zm.shortwave_geometry.push_back(
                {zone.walls[w].azimuth_deg, zone.walls[w].tilt_deg});
        }
    }
    for (std::size_t g = 0; g < zone.glazings.size(); ++g) {
        glazing_sw_column[g] = frame.shortwave_offset() + frame.shortwave_count;
        frame.shortwave_count += 1;
        zm.shortwave_geometry.push_back(
            {zone.glazings[g].azimuth_deg, zone.glazings[g].tilt_deg});
    }
    for (Index c = 0; c < frame.shortwave_count; ++c) {
        frame.labels.push_back("sw_" + std::to_string(c));
    }
    frame.labels.push_back("T_vent_ext");
    frame.labels.push_back("Q_internal");
    for (const WallDescription& wall : zone.walls) {
        if (wall.boundary.kind == BoundaryKind::Zone) {
            bool seen = false;
            for (const std::string& known : zm.coupled_zones) {
                seen = seen || known == wall.boundary.zone;
            }
            if (!seen) {
                zm.coupled_zones.push_back(wall.boundary.zone);
                frame.coupling_count += 1;
                frame.labels.push_back("T_zone:" + wall.boundary.zone);
            }
        }
    }
    const auto coupling_column = [&](const std::string& name) {
        for (std::size_t i = 0; i < zm.coupled_zones.size(); ++i) {
            if (zm.coupled_zones[i] == name) {
                return frame.coupling_offset() + static_cast<Index>(i);
            }
        }
        throw TopologyError("unknown coupling zone " + name);
    };

    const Index m = frame.total();
    zm.A11 = Matrix::Zero(n1, n1);
    zm.A12 = Matrix::Zero(n1, 1);
    zm.B1 = Matrix::Zero(n1, m);
    zm.a21_const = Eigen::RowVectorXd::Zero(n1);
    zm.b2_const = Eigen::RowVectorXd::Zero(m);
    zm.b2_const(frame.q_internal()) = 1.0 / zm.air_capacitance;

    // Conductance row sums, kept per node so diagonals close the balance.
    Vector row_sum = Vector::Zero(n1);
    double air_row_sum = 0.0;

    const double total_wall_area = [&] {
        double s = 0.0;
        for (const WallDescription& wall : zone.walls) {
            s += wall.area;
        }
        return s;
    }();

    Index node = 0;
    for (std::size_t w = 0; w < zone.walls.size(); ++w) {
        const WallDescription& wall = zone.walls[w];
        const WallChain& chain = chains[w];
        const Index first = node;
        const Index count = chain.capacitance.size();
        const Index last = first + count - 1;

        for (Index i = 0; i < count; ++i) {
            zm.state_labels.push_back(zone.name + "." + wall.name + "[" +
                                      std::to_string(i) + "]");
        }

        // conduction inside the chain
        for (Index i = 0; i + 1 < count; ++i) {
            const double g = chain.between(i);
            zm.A11(first + i, first + i + 1) += g / chain.capacitance(i);
            row_sum(first + i) += g / chain.capacitance(i);
            zm.A11(first + i + 1, first + i) += g / chain.capacitance(i + 1);
            row_sum(first + i + 1) += g / chain.capacitance(i + 1);
        }

        // far-side boundary at node `first`
        const double c0 = chain.capacitance(0);
        switch (wall.boundary.kind) {
            case BoundaryKind::Exterior: {
                // massless outer surface eliminated: half cell against the
                // convective film and the linearized sky exchange in parallel
                const double gh = chain.outer_half;
                const double gce = zone.h_exterior * wall.area;
                const double gr = zone.h_sky * wall.area;
                const double denom = gh + gce + gr;
                const double g_ext = gh * gce / denom;
                const double g_sky = gh * gr / denom;
                zm.B1(first, frame.t_ext()) += g_ext / c0;
                row_sum(first) += g_ext / c0;
                zm.B1(first, frame.t_sky()) += g_sky / c0;
                row_sum(first) += g_sky / c0;
                // absorbed short wave splits at the same surface node
                zm.B1(first, wall_sw_column[w]) +=
                    wall.solar_absorptance * wall.area * (gh / denom) / c0;
                break;
            }
            case BoundaryKind::Zone: {
                const double g =
                    series(chain.outer_half, zone.h_interior * wall.area);
                zm.B1(first, coupling_column(wall.boundary.zone)) += g / c0;
                row_sum(first) += g / c0;
                break;
            }
            case BoundaryKind::Adiabatic:
                break;
        }

        // near-side film to the zone air at node `last`
        const double g_in = series(chain.inner_half, zone.h_interior * wall.area);
        zm.A12(last, 0) += g_in / chain.capacitance(count - 1);
        row_sum(last) += g_in / chain.capacitance(count - 1);
        zm.a21_const(last) += g_in / zm.air_capacitance;
        air_row_sum += g_in / zm.air_capacitance;

        node += count;
    }

    for (std::size_t g = 0; g < zone.glazings.size(); ++g) {
        const GlazingDescription& glazing = zone.glazings[g];
        const Index gn = glazing_offset + static_cast<Index>(g);
        zm.state_labels.push_back(zone.name + "." + glazing.name);

        const double cg = kGlazingCapacitancePerArea * glazing.area;
        const double g_side = 2.0 * glazing.u_value * glazing.area;
        zm.B1(gn, frame.t_ext()) += g_side / cg;
        row_sum(gn) += g_side / cg;
        zm.A12(gn, 0) += g_side / cg;
        row_sum(gn) += g_side / cg;
        zm.a21_const(gn) += g_side / zm.air_capacitance;
        air_row_sum += g_side / zm.air_capacitance;

        // transmitted short wave lands on the interior wall faces,
        // distributed by area
        const double transmitted = glazing.solar_transmittance * glazing.area;
        if (total_wall_area > 0.0) {
            Index wn = 0;
            for (std::size_t w = 0; w < zone.walls.size(); ++w) {
                const Index count = chains[w].capacitance.size();
                const Index inner = wn + count - 1;
                zm.B1(inner, glazing_sw_column[g]) +=
                    transmitted * (zone.walls[w].area / total_wall_area) /
                    chains[w].capacitance(count - 1);
                wn += count;
            }
        } else {
            zm.b2_const(glazing_sw_column[g]) += transmitted / zm.air_capacitance;
        }
    }

    for (Index i = 0; i < n1; ++i) {
        zm.A11(i, i) = -row_sum(i);
    }
    zm.a22_const = -air_row_sum;
    zm.state_labels.push_back(zone.name + ".air");
    return zm;
}

Index BuildingModel::zone_index(const std::string& zone_name) const {
    for (std::size_t i = 0; i < zones.size(); ++i) {
        if (zones[i].name == zone_name) {
            return static_cast<Index>(i);
        }
    }
    throw TopologyError("unknown zone: " + zone_name);
}

BuildingModel assemble_building(const BuildingDescription& description) {
    if (description.zones.empty()) {
        throw TopologyError("building needs at least one zone");
    }
    BuildingModel model;
    model.name = description.name;
    model.latitude_deg = description.latitude_deg;

    std::set<std::string> names;
    for (const ZoneDescription& zone : description.zones) {
        if (!names.insert(zone.name).second) {
            throw TopologyError("duplicate zone name: " + zone.name);
        }
        model.zones.push_back(build_zone(zone));
    }

    // party-wall couplings must point at real zones
    for (const ZoneModel& zone : model.zones) {
        for (const std::string& neighbor : zone.coupled_zones) {
            if (!names.contains(neighbor)) {
                throw TopologyError(zone.name + " couples to unknown zone " + neighbor);
            }
        }
    }

    std::map<std::string, int> id_counts;
    for (std::size_t i = 0; i < description.openings.size(); ++i) {
        const OpeningDescription& od = description.openings[i];
        const auto resolve = [&](const std::string& endpoint) -> int {
            if (endpoint == "exterior") {
                return airflow::kExterior;
            }
            return static_cast<int>(model.zone_index(endpoint));
        };
        airflow::Opening opening;
        opening.from = resolve(od.from);
        opening.to = resolve(od.to);
        opening.discharge_coefficient = od.discharge_coefficient;
        opening.area = od.area;
        opening.height = od.height;
        opening.wind_pressure_coefficient = od.wind_pressure_coefficient;
        opening.flow_exponent = od.flow_exponent;
        airflow::validate(opening);
        model.openings.push_back(opening);

        std::string id = od.from + "->" + od.to;
        const int seen = id_counts[id]++;
        if (seen > 0) {
            id += "#" + std::to_string(seen);
        }
        model.opening_ids.push_back(id);

        const Index opening_index = std::ssize(model.openings) - 1;
        if (opening.to != airflow::kExterior) {
            ZoneModel& zone = model.zones[opening.to];
            const Index col = opening.from == airflow::kExterior
                                  ? zone.frame.t_vent()
                                  : zone.ensure_coupling(od.from);
            zone.taps.push_back({opening_index, +1.0, col});
        }
        if (opening.from != airflow::kExterior) {
            ZoneModel& zone = model.zones[opening.from];
            const Index col = opening.to == airflow::kExterior
                                  ? zone.frame.t_vent()
                                  : zone.ensure_coupling(od.to);
            zone.taps.push_back({opening_index, -1.0, col});
        }
    }
    return model;
}

namespace {

using nlohmann::json;

Layer parse_layer(const json& j) {
    Layer layer;
    layer.conductivity = j.at("conductivity").get<double>();
    layer.density = j.at("density").get<double>();
    layer.specific_heat = j.at("specific_heat").get<double>();
    layer.thickness = j.at("thickness").get<double>();
    layer.node_count = j.value("node_count", 3);
    return layer;
}

Boundary parse_boundary(const std::string& text) {
    Boundary b;
    if (text == "exterior") {
        b.kind = BoundaryKind::Exterior;
    } else if (text == "adiabatic") {
        b.kind = BoundaryKind::Adiabatic;
    } else if (text.rfind("zone:", 0) == 0) {
        b.kind = BoundaryKind::Zone;
        b.zone = text.substr(5);
    } else {
        throw IoError("unknown boundary '" + text +
                      "' (expected exterior, adiabatic or zone:<name>)");
    }
    return b;
}

ZoneDescription parse_zone(const json& j) {
    ZoneDescription zone;
    zone.name = j.at("name").get<std::string>();
    zone.air_volume = j.at("air_volume").get<double>();
    zone.h_interior = j.value("h_interior", 8.0);
    zone.h_exterior = j.value("h_exterior", 20.0);
    zone.h_sky = j.value("h_sky", 5.0);
    for (const json& jw : j.value("walls", json::array())) {
        WallDescription wall;
        wall.name = jw.at("name").get<std::string>();
        wall.area = jw.at("area").get<double>();
        wall.azimuth_deg = jw.value("azimuth_deg", 180.0);
        wall.tilt_deg = jw.value("tilt_deg", 90.0);
        wall.boundary = parse_boundary(jw.value("boundary", "exterior"));
        wall.solar_absorptance = jw.value("solar_absorptance", 0.6);
        for (const json& jl : jw.at("layers")) {
            wall.layers.push_back(parse_layer(jl));
        }
        zone.walls.push_back(std::move(wall));
    }
    for (const json& jg : j.value("glazings", json::array())) {
        GlazingDescription g;
        g.name = jg.at("name").get<std::string>();
        g.area = jg.at("area").get<double>();
        g.u_value = jg.at("u_value").get<double>();
        g.solar_transmittance = jg.value("solar_transmittance", 0.8);
        g.azimuth_deg = jg.value("azimuth_deg", 180.0);
        g.tilt_deg = jg.value("tilt_deg", 90.0);
        zone.glazings.push_back(std::move(g));
    }
    return zone;
}

}  // namespace

BuildingDescription parse_building(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw IoError(std::string("building JSON parse failure: ") + e.what());
    }
    try {
        BuildingDescription desc;
        desc.name = j.value("name", "building");
        desc.latitude_deg = j.value("latitude_deg", -21.0);
        for (const json& jz : j.at("zones")) {
            desc.zones.push_back(parse_zone(jz));
        }
        for (const json& jo : j.value("openings", json::array())) {
            OpeningDescription od;
            od.from = jo.at("from").get<std::string>();
            od.to = jo.at("to").get<std::string>();
            od.discharge_coefficient = jo.value("discharge_coefficient", 0.6);
            od.area = jo.at("area").get<double>();
            od.height = jo.value("height", 0.0);
            od.wind_pressure_coefficient = jo.value("wind_pressure_coefficient", 0.0);
            od.flow_exponent = jo.value("flow_exponent", 0.5);
            desc.openings.push_back(std::move(od));
        }
        return desc;
    } catch (const json::exception& e) {
        throw IoError(std::string("building JSON field error: ") + e.what());
    }
}

BuildingDescription load_building(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open building file: " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_building(buffer.str());
}

std::vector<Vector> weather_inputs(const WeatherSeries& weather,
                                   const BuildingModel& model, double t) {
    const WeatherRecord rec = weather.at(t);
    const SunPosition sun = sun_position(rec.time, model.latitude_deg);

    std::vector<Vector> inputs;
    inputs.reserve(model.zones.size());
    for (const ZoneModel& zone : model.zones) {
        Vector u = Vector::Zero(zone.frame.total());
        u(zone.frame.t_ext()) = rec.t_air;
        u(zone.frame.t_sky()) = rec.t_sky;
        u(zone.frame.t_vent()) = rec.t_air;
        for (Index c = 0; c < zone.frame.shortwave_count; ++c) {
            const SurfaceGeometry& geom = zone.shortwave_geometry[c];
            u(zone.frame.shortwave_offset() + c) = tilted_irradiance(
                rec.global_h, rec.diffuse_h, sun, geom.azimuth_deg, geom.tilt_deg);
        }
        inputs.push_back(std::move(u));
    }
    return inputs;
}

}  // namespace thermred::building
