#include "thermred/weather.hpp"

#include <cstdio>
#include <fstream>

#include "doctest.h"

using namespace thermred;
using namespace thermred::building;

TEST_SUITE_BEGIN("weather");

namespace {

WeatherRecord rec(double t, double t_air) {
    WeatherRecord r;
    r.time = t;
    r.t_air = t_air;
    r.t_sky = t_air - 10.0;
    r.rh = 70.0;
    return r;
}

}  // namespace

TEST_CASE("ISO-8601 timestamps") {
    CHECK(parse_iso8601("1970-01-01T00:00:00") == 0.0);
    CHECK(parse_iso8601("1970-01-02T00:00:00") == 86400.0);
    CHECK(parse_iso8601("2003-01-15T12:00:00") == 1042632000.0);
    CHECK(parse_iso8601("2003-01-15T12:30") == 1042633800.0);
    CHECK(format_iso8601(1042632000.0) == "2003-01-15T12:00:00");
    CHECK(format_iso8601(parse_iso8601("1999-12-31T23:59:59")) ==
          "1999-12-31T23:59:59");
    CHECK_THROWS_AS(parse_iso8601("not a time"), IoError);
    CHECK_THROWS_AS(parse_iso8601("2003-13-01T00:00:00"), IoError);
}

TEST_CASE("weather series validation and interpolation") {
    SUBCASE("validation") {
        CHECK_THROWS_AS(WeatherSeries({}), ValueError);
        CHECK_THROWS_AS(WeatherSeries({rec(100.0, 20.0), rec(100.0, 21.0)}),
                        ValueError);
        WeatherRecord bad = rec(0.0, 20.0);
        bad.global_h = -1.0;
        CHECK_THROWS_AS(WeatherSeries({bad}), ValueError);
        bad = rec(0.0, 20.0);
        bad.rh = 130.0;
        CHECK_THROWS_AS(WeatherSeries({bad}), ValueError);
    }
    SUBCASE("linear interpolation at the midpoint") {
        const WeatherSeries series({rec(0.0, 20.0), rec(1800.0, 24.0)});
        CHECK(series.at(900.0).t_air == doctest::Approx(22.0));
        CHECK(series.at(0.0).t_air == doctest::Approx(20.0));
        CHECK(series.at(1800.0).t_air == doctest::Approx(24.0));
        CHECK_THROWS_AS(series.at(1801.0), RangeError);
        CHECK_THROWS_AS(series.at(-1.0), RangeError);
    }
    SUBCASE("periodic extension tiles the covered span") {
        WeatherSeries series({rec(0.0, 20.0), rec(1000.0, 30.0)});
        series.set_periodic_extension(true);
        CHECK(series.at(1200.0).t_air == doctest::Approx(series.at(200.0).t_air));
        CHECK(series.at(2500.0).t_air == doctest::Approx(series.at(500.0).t_air));
    }
}

TEST_CASE("weather CSV loading") {
    const std::string path = "/tmp/thermred_weather_test.csv";
    {
        std::ofstream out(path);
        out << "timestamp,t_air,t_sky,rh,global_h,diffuse_h,wind_speed,wind_dir\n";
        out << "2003-01-01T00:00:00,25.5,15.0,72,0,0,3.2,90\n";
        out << "2003-01-01T00:30:00,25.0,14.6,73,0,0,3.0,95\n";
    }
    const WeatherSeries series = WeatherSeries::load_csv(path);
    CHECK(series.size() == 2);
    CHECK(series.at(series.start()).t_air == doctest::Approx(25.5));
    CHECK(series.end() - series.start() == doctest::Approx(1800.0));
    CHECK_THROWS_AS(WeatherSeries::load_csv("/nonexistent/weather.csv"), IoError);
    std::remove(path.c_str());
}

TEST_CASE("sun position") {
    // lat -21, January 1, clock noon: declination -23.0116 deg,
    // sin(altitude) = cos(lat - decl) = 0.99938, azimuth slightly south
    const double noon = parse_iso8601("2003-01-01T12:00:00");
    const SunPosition sun = sun_position(noon, -21.0);
    CHECK(sun.up == doctest::Approx(0.9993837183466621).epsilon(1e-9));
    CHECK(sun.east == doctest::Approx(0.0));
    CHECK(sun.north == doctest::Approx(-0.03510247147423806).epsilon(1e-9));

    // morning sun rises in the east
    const SunPosition morning = sun_position(noon - 5.0 * 3600.0, -21.0);
    CHECK(morning.east > 0.5);
}

TEST_CASE("tilted irradiance") {
    SunPosition sun;
    sun.east = 0.0;
    sun.north = -0.03510247147423806;
    sun.up = 0.9993837183466621;

    SUBCASE("night: everything dark") {
        CHECK(tilted_irradiance(0.0, 0.0, sun, 180.0, 90.0) == 0.0);
    }
    SUBCASE("horizontal surface recovers the global value exactly") {
        CHECK(tilted_irradiance(700.0, 100.0, sun, 0.0, 0.0) ==
              doctest::Approx(700.0).epsilon(1e-12));
        SunPosition low;
        low.up = 0.01;  // below the beam cutoff: diffuse-only branch
        CHECK(tilted_irradiance(50.0, 30.0, low, 0.0, 0.0) ==
              doctest::Approx(50.0).epsilon(1e-12));
    }
    SUBCASE("vertical surfaces at the frozen sun position") {
        // hand projection: beam_n = 600 / 0.9993837, cos(theta) = +-0.0351025,
        // diffuse on a vertical face = 50
        CHECK(tilted_irradiance(700.0, 100.0, sun, 180.0, 90.0) ==
              doctest::Approx(71.07447069418546).epsilon(1e-9));
        CHECK(tilted_irradiance(700.0, 100.0, sun, 0.0, 90.0) ==
              doctest::Approx(50.0).epsilon(1e-9));
    }
}

TEST_SUITE_END();
