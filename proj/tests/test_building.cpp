#include "thermred/building.hpp"

#include <cmath>

#include "doctest.h"

using namespace thermred;
using namespace thermred::building;

TEST_SUITE_BEGIN("building");

namespace {

ZoneDescription lumped_zone() {
    ZoneDescription zone;
    zone.name = "cell";
    zone.air_volume = 30.0;
    zone.h_interior = 8.0;
    zone.h_exterior = 20.0;
    zone.h_sky = 0.0;  // keeps the hand computation two-branch
    WallDescription wall;
    wall.name = "shell";
    wall.area = 10.0;
    wall.solar_absorptance = 0.6;
    wall.layers.push_back({1.75, 2300.0, 920.0, 0.2, 1});
    zone.walls.push_back(wall);
    return zone;
}

double conductance_row_imbalance(const ZoneModel& zm, Index row) {
    double sum = zm.A11.row(row).sum() + zm.A12(row, 0);
    sum += zm.B1(row, zm.frame.t_ext());
    sum += zm.B1(row, zm.frame.t_sky());
    sum += zm.B1(row, zm.frame.t_vent());
    for (Index c = 0; c < zm.frame.coupling_count; ++c) {
        sum += zm.B1(row, zm.frame.coupling_offset() + c);
    }
    return sum;
}

}  // namespace

TEST_CASE("wall discretization") {
    WallDescription wall;
    wall.name = "w";
    wall.area = 1.0;
    wall.layers.push_back({1.75, 2300.0, 920.0, 0.2, 4});

    SUBCASE("concrete reference: totals conserved") {
        const WallChain chain = discretize_wall(wall);
        CHECK(chain.capacitance.size() == 4);
        CHECK(chain.capacitance.sum() == doctest::Approx(423200.0));
        double resistance = 1.0 / chain.outer_half + 1.0 / chain.inner_half;
        for (Index i = 0; i < chain.between.size(); ++i) {
            resistance += 1.0 / chain.between(i);
        }
        CHECK(resistance == doctest::Approx(0.2 / 1.75).epsilon(1e-12));
    }
    SUBCASE("lumped wall: one node, two half-resistances") {
        wall.layers[0].node_count = 1;
        const WallChain chain = discretize_wall(wall);
        CHECK(chain.capacitance.size() == 1);
        CHECK(chain.capacitance(0) == doctest::Approx(423200.0));
        CHECK(chain.between.size() == 0);
        CHECK(chain.outer_half == doctest::Approx(2.0 * 1.75 / 0.2));
        CHECK(chain.inner_half == doctest::Approx(2.0 * 1.75 / 0.2));
    }
    SUBCASE("refinement conserves aggregates") {
        wall.layers[0].node_count = 3;
        const WallChain coarse = discretize_wall(wall);
        wall.layers[0].node_count = 6;
        const WallChain fine = discretize_wall(wall);
        CHECK(coarse.capacitance.sum() == doctest::Approx(fine.capacitance.sum()));
        const auto total_r = [](const WallChain& c) {
            double r = 1.0 / c.outer_half + 1.0 / c.inner_half;
            for (Index i = 0; i < c.between.size(); ++i) {
                r += 1.0 / c.between(i);
            }
            return r;
        };
        CHECK(total_r(coarse) == doctest::Approx(total_r(fine)));
    }
    SUBCASE("two layers chain through the interface") {
        wall.layers[0].node_count = 2;
        wall.layers.push_back({0.35, 1200.0, 840.0, 0.015, 2});
        const WallChain chain = discretize_wall(wall);
        CHECK(chain.capacitance.size() == 4);
        CHECK(chain.capacitance.sum() ==
              doctest::Approx(423200.0 + 1200.0 * 840.0 * 0.015));
        const double r_total = 1.0 / chain.outer_half + 1.0 / chain.between(0) +
                               1.0 / chain.between(1) + 1.0 / chain.between(2) +
                               1.0 / chain.inner_half;
        CHECK(r_total == doctest::Approx(0.2 / 1.75 + 0.015 / 0.35).epsilon(1e-12));
    }
    SUBCASE("invalid properties rejected") {
        wall.layers[0].conductivity = -1.0;
        CHECK_THROWS_AS(discretize_wall(wall), ValueError);
        wall.layers[0].conductivity = 1.75;
        wall.layers[0].node_count = 0;
        CHECK_THROWS_AS(discretize_wall(wall), ValueError);
    }
}

TEST_CASE("two-node zone matches the hand computation") {
    const ZoneModel zm = build_zone(lumped_zone());
    REQUIRE(zm.envelope_order() == 1);
    REQUIRE(zm.frame.total() == 5);  // T_ext, T_sky, sw, T_vent, Q

    // hand values: half-wall conductance 2kA/t = 175 W/K,
    // exterior film 200 W/K, interior film 80 W/K
    const double c_wall = 2300.0 * 920.0 * 0.2 * 10.0;
    const double c_air = 1.2 * 1006.0 * 30.0;
    const double g_ext = 175.0 * 200.0 / 375.0;
    const double g_in = 175.0 * 80.0 / 255.0;

    CHECK(zm.A11(0, 0) == doctest::Approx(-(g_ext + g_in) / c_wall).epsilon(1e-10));
    CHECK(zm.A12(0, 0) == doctest::Approx(g_in / c_wall).epsilon(1e-10));
    CHECK(zm.B1(0, zm.frame.t_ext()) == doctest::Approx(g_ext / c_wall).epsilon(1e-10));
    CHECK(zm.B1(0, zm.frame.t_sky()) == 0.0);
    // absorbed short wave splits at the massless surface: fraction 175/375
    CHECK(zm.B1(0, zm.frame.shortwave_offset()) ==
          doctest::Approx(0.6 * 10.0 * (175.0 / 375.0) / c_wall).epsilon(1e-10));
    CHECK(zm.a21_const(0) == doctest::Approx(g_in / c_air).epsilon(1e-10));
    CHECK(zm.a22_const == doctest::Approx(-g_in / c_air).epsilon(1e-10));
    CHECK(zm.b2_const(zm.frame.q_internal()) == doctest::Approx(1.0 / c_air));
    CHECK(zm.air_capacitance == doctest::Approx(c_air));
}

TEST_CASE("generated zones: conductance rows balance and A is stable") {
    ZoneDescription zone = lumped_zone();
    zone.h_sky = 5.0;
    zone.walls[0].layers[0].node_count = 3;
    WallDescription party;
    party.name = "party";
    party.area = 8.0;
    party.boundary.kind = BoundaryKind::Zone;
    party.boundary.zone = "other";
    party.layers.push_back({0.5, 900.0, 840.0, 0.05, 2});
    zone.walls.push_back(party);
    GlazingDescription glazing;
    glazing.name = "win";
    glazing.area = 1.5;
    glazing.u_value = 5.7;
    glazing.solar_transmittance = 0.8;
    zone.glazings.push_back(glazing);

    const ZoneModel zm = build_zone(zone);
    REQUIRE(zm.envelope_order() == 6);  // 3 + 2 wall nodes + glazing
    REQUIRE(zm.frame.coupling_count == 1);

    for (Index row = 0; row < zm.envelope_order(); ++row) {
        const double scale = zm.A11.row(row).cwiseAbs().sum() + 1e-30;
        CHECK(std::abs(conductance_row_imbalance(zm, row)) <= 1e-13 * scale);
    }
    double air_sum = zm.a21_const.sum() + zm.a22_const +
                     zm.b2_const(zm.frame.t_vent());
    for (Index c = 0; c < zm.frame.coupling_count; ++c) {
        air_sum += zm.b2_const(zm.frame.coupling_offset() + c);
    }
    CHECK(std::abs(air_sum) <= 1e-13 * std::abs(zm.a22_const));

    const StateSpaceModel full = zm.full_model(Vector::Zero(0));
    CHECK(is_stable(full.A));
    CHECK(full.state_labels.size() == static_cast<std::size_t>(full.order()));
}

TEST_CASE("airflow taps modulate the air row") {
    BuildingDescription desc;
    desc.name = "pair";
    ZoneDescription a = lumped_zone();
    a.name = "a";
    ZoneDescription b = lumped_zone();
    b.name = "b";
    desc.zones = {a, b};
    desc.openings.push_back({"exterior", "a", 0.6, 1.0, 0.0, 0.6, 0.5});
    desc.openings.push_back({"a", "b", 0.6, 1.0, 1.0, 0.0, 0.5});
    const BuildingModel model = assemble_building(desc);

    const ZoneModel& za = model.zones[0];
    const ZoneModel& zb = model.zones[1];
    REQUIRE(za.taps.size() == 2);  // inflow from exterior, reverse flow from b
    REQUIRE(zb.taps.size() == 1);
    REQUIRE(zb.frame.coupling_count == 1);

    const double kappa = 0.15 * airflow::kAirCp / zb.air_capacitance;
    Vector flows(2);
    flows << 0.0, 0.15;  // a -> b
    double a22;
    Eigen::RowVectorXd b2;
    zb.air_row(flows, a22, b2);
    CHECK(a22 == doctest::Approx(zb.a22_const - kappa));
    CHECK(b2(zb.taps[0].input_column) == doctest::Approx(kappa));

    // reversed: b's inflow vanishes, a sees b's air instead
    flows << 0.0, -0.15;
    zb.air_row(flows, a22, b2);
    CHECK(a22 == doctest::Approx(zb.a22_const));
    CHECK(b2(zb.frame.coupling_offset()) == 0.0);
    za.air_row(flows, a22, b2);
    const double kappa_a = 0.15 * airflow::kAirCp / za.air_capacitance;
    CHECK(a22 == doctest::Approx(za.a22_const - kappa_a));
}

TEST_CASE("party walls couple symmetrically") {
    // mirrored half-wall declarations: each zone sees the same conductance
    BuildingDescription desc;
    desc.name = "duo";
    for (const char* name : {"left", "right"}) {
        ZoneDescription zone = lumped_zone();
        zone.name = name;
        WallDescription half;
        half.name = "shared";
        half.area = 9.0;
        half.boundary.kind = BoundaryKind::Zone;
        half.boundary.zone = std::string(name) == "left" ? "right" : "left";
        half.layers.push_back({0.8, 1400.0, 900.0, 0.06, 2});
        zone.walls.push_back(half);
        desc.zones.push_back(zone);
    }
    const BuildingModel model = assemble_building(desc);

    const auto coupling_rate = [](const ZoneModel& zm) {
        return zm.B1.col(zm.frame.coupling_offset()).sum();
    };
    // identical mirrored declarations: same UA toward the neighbor
    CHECK(coupling_rate(model.zones[0]) ==
          doctest::Approx(coupling_rate(model.zones[1])));

    SUBCASE("dangling party wall rejected") {
        desc.zones[0].walls[1].boundary.zone = "nowhere";
        CHECK_THROWS_AS(assemble_building(desc), TopologyError);
    }
    SUBCASE("duplicate zone names rejected") {
        desc.zones[1].name = "left";
        CHECK_THROWS_AS(assemble_building(desc), TopologyError);
    }
    SUBCASE("unknown opening endpoint rejected") {
        desc.openings.push_back({"left", "attic", 0.6, 1.0, 0.0, 0.0, 0.5});
        CHECK_THROWS_AS(assemble_building(desc), TopologyError);
    }
}

TEST_CASE("building JSON parsing") {
    const std::string text = R"({
      "name": "tiny",
      "latitude_deg": -20.9,
      "zones": [
        {
          "name": "cell",
          "air_volume": 30.0,
          "walls": [
            {"name": "shell", "area": 10.0, "boundary": "exterior",
             "layers": [{"conductivity": 1.75, "density": 2300,
                         "specific_heat": 920, "thickness": 0.2}]}
          ],
          "glazings": [{"name": "win", "area": 1.0, "u_value": 5.7}]
        }
      ],
      "openings": [
        {"from": "exterior", "to": "cell", "area": 0.5, "height": 1.0}
      ]
    })";
    const BuildingDescription desc = parse_building(text);
    CHECK(desc.name == "tiny");
    CHECK(desc.latitude_deg == doctest::Approx(-20.9));
    REQUIRE(desc.zones.size() == 1);
    CHECK(desc.zones[0].walls[0].layers[0].node_count == 3);  // default
    CHECK(desc.openings.size() == 1);
    const BuildingModel model = assemble_building(desc);
    CHECK(model.zones[0].order() == 3 + 1 + 1);

    CHECK_THROWS_AS(parse_building("{"), IoError);
    CHECK_THROWS_AS(parse_building(R"({"zones": [{"name": "x", "air_volume": 1,
        "walls": [{"name": "w", "area": 1, "boundary": "space",
        "layers": [{"conductivity": 1, "density": 1, "specific_heat": 1,
        "thickness": 0.1}]}]}]})"),
                    IoError);
}

TEST_CASE("weather-driven inputs") {
    BuildingDescription desc;
    desc.name = "tiny";
    desc.latitude_deg = -21.0;
    ZoneDescription zone = lumped_zone();
    GlazingDescription glazing;
    glazing.name = "win";
    glazing.area = 1.0;
    glazing.u_value = 5.7;
    glazing.solar_transmittance = 0.8;
    glazing.azimuth_deg = 0.0;
    zone.glazings.push_back(glazing);
    desc.zones.push_back(zone);
    const BuildingModel model = assemble_building(desc);

    std::vector<WeatherRecord> recs;
    WeatherRecord night;
    night.time = parse_iso8601("2003-01-01T00:00:00");
    night.t_air = 24.0;
    night.t_sky = 14.0;
    night.rh = 75.0;
    WeatherRecord day = night;
    day.time = parse_iso8601("2003-01-01T12:00:00");
    day.t_air = 30.0;
    day.t_sky = 22.0;
    day.global_h = 700.0;
    day.diffuse_h = 100.0;
    recs.push_back(night);
    recs.push_back(day);
    const WeatherSeries weather{recs};

    const ZoneModel& zm = model.zones[0];
    SUBCASE("night: short-wave segments all zero") {
        const std::vector<Vector> u = weather_inputs(weather, model, night.time);
        CHECK(u[0](zm.frame.t_ext()) == doctest::Approx(24.0));
        CHECK(u[0](zm.frame.t_sky()) == doctest::Approx(14.0));
        CHECK(u[0](zm.frame.t_vent()) == doctest::Approx(24.0));
        for (Index c = 0; c < zm.frame.shortwave_count; ++c) {
            CHECK(u[0](zm.frame.shortwave_offset() + c) == 0.0);
        }
    }
    SUBCASE("noon: south wall irradiated, values match the surface oracle") {
        const std::vector<Vector> u = weather_inputs(weather, model, day.time);
        // wall azimuth 180 (south), vertical: frozen projection value
        CHECK(u[0](zm.frame.shortwave_offset()) ==
              doctest::Approx(71.07447069418546).epsilon(1e-9));
        // glazing faces north: diffuse only
        CHECK(u[0](zm.frame.shortwave_offset() + 1) ==
              doctest::Approx(50.0).epsilon(1e-9));
    }
}

TEST_CASE("mesh refinement leaves the daily air trajectory nearly unchanged") {
    const auto air_trajectory = [](int nodes) {
        ZoneDescription zone = lumped_zone();
        zone.h_sky = 5.0;
        zone.walls[0].layers[0].node_count = nodes;
        const ZoneModel zm = build_zone(zone);
        const StateSpaceModel model = zm.full_model(Vector::Zero(0));
        const StepSolver solver(model, 3600.0);
        Vector x = Vector::Constant(model.order(), 25.0);
        Vector air(48);
        for (int k = 0; k < 48; ++k) {
            Vector u = Vector::Zero(zm.frame.total());
            const double t_ext =
                27.0 + 6.0 * std::sin(2.0 * M_PI * (k - 9.0) / 24.0);
            u(zm.frame.t_ext()) = t_ext;
            u(zm.frame.t_sky()) = t_ext - 12.0;
            u(zm.frame.t_vent()) = t_ext;
            u(zm.frame.shortwave_offset()) =
                std::max(0.0, 600.0 * std::sin(2.0 * M_PI * (k - 6.0) / 24.0));
            x = solver.step(x, u).state;
            air(k) = x(zm.air_index());
        }
        return air;
    };
    const Vector coarse = air_trajectory(3);
    const Vector fine = air_trajectory(6);
    CHECK((coarse - fine).lpNorm<Eigen::Infinity>() < 0.1);
}

TEST_SUITE_END();
