#pragma once

#include <string>
#include <vector>

#include "thermred/statespace.hpp"

namespace thermred::building {

struct WeatherRecord {
    double time = 0.0;        // epoch seconds
    double t_air = 0.0;       // outdoor dry air, °C
    double t_sky = 0.0;       // °C
    double rh = 0.0;          // %
    double global_h = 0.0;    // global horizontal, W/m²
    double diffuse_h = 0.0;   // diffuse horizontal, W/m²
    double wind_speed = 0.0;  // m/s
    double wind_dir = 0.0;    // deg from north
};

/// Timestamped weather sequence. Queries interpolate linearly between
/// records; with periodic extension enabled, times past the end wrap onto
/// the covered span (tiling, for long benchmark horizons).
class WeatherSeries {
  public:
    explicit WeatherSeries(std::vector<WeatherRecord> records);

    /// CSV columns: timestamp (ISO-8601), t_air, t_sky, rh, global_h,
    /// diffuse_h, wind_speed, wind_dir. Lines starting with '#' and a header
    /// row are skipped.
    static WeatherSeries load_csv(const std::string& path);

    WeatherRecord at(double t) const;

    void set_periodic_extension(bool on) { periodic_ = on; }
    bool periodic_extension() const { return periodic_; }

    double start() const { return records_.front().time; }
    double end() const { return records_.back().time; }
    std::size_t size() const { return records_.size(); }

  private:
    std::vector<WeatherRecord> records_;
    bool periodic_ = false;
};

/// "YYYY-MM-DDTHH:MM:SS" (optional seconds) -> epoch seconds. Naive civil
/// time; no zone handling.
double parse_iso8601(const std::string& text);
std::string format_iso8601(double epoch_seconds);

/// Sun direction in local east/north/up coordinates. Declination from the
/// day of year, hour angle from clock time (solar time == clock time).
struct SunPosition {
    double east = 0.0;
    double north = 0.0;
    double up = 0.0;  // sin(altitude)
};
SunPosition sun_position(double epoch_seconds, double latitude_deg);

/// Incident short-wave on a tilted surface: beam projected onto the surface
/// normal plus isotropic sky diffuse. Below 0.05 solar altitude (sine) all
/// radiation is treated as diffuse. Horizontal surfaces recover the global
/// horizontal value exactly.
double tilted_irradiance(double global_h, double diffuse_h, const SunPosition& sun,
                         double surface_azimuth_deg, double tilt_deg);

}  // namespace thermred::building
