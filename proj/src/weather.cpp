#include "thermred/weather.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace thermred::building {

namespace {

constexpr double kSecondsPerDay = 86400.0;

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long yr = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yr + (m <= 2));
}

void validate_records(const std::vector<WeatherRecord>& records) {
    if (records.empty()) {
        throw ValueError("weather series needs at least one record");
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        const WeatherRecord& r = records[i];
        if (i > 0 && !(r.time > records[i - 1].time)) {
            throw ValueError("weather timestamps must be strictly increasing");
        }
        if (r.global_h < 0.0 || r.diffuse_h < 0.0) {
            throw ValueError("weather radiation must be >= 0");
        }
        if (r.rh < 0.0 || r.rh > 100.0) {
            throw ValueError("weather relative humidity must be within [0, 100]");
        }
    }
}

WeatherRecord lerp(const WeatherRecord& a, const WeatherRecord& b, double t) {
    const double w = (t - a.time) / (b.time - a.time);
    WeatherRecord r;
    r.time = t;
    r.t_air = a.t_air + w * (b.t_air - a.t_air);
    r.t_sky = a.t_sky + w * (b.t_sky - a.t_sky);
    r.rh = a.rh + w * (b.rh - a.rh);
    r.global_h = a.global_h + w * (b.global_h - a.global_h);
    r.diffuse_h = a.diffuse_h + w * (b.diffuse_h - a.diffuse_h);
    r.wind_speed = a.wind_speed + w * (b.wind_speed - a.wind_speed);
    r.wind_dir = a.wind_dir + w * (b.wind_dir - a.wind_dir);
    return r;
}

}  // namespace

WeatherSeries::WeatherSeries(std::vector<WeatherRecord> records)
    : records_(std::move(records)) {
    validate_records(records_);
}

WeatherSeries WeatherSeries::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open weather file: " + path);
    }
    std::vector<WeatherRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (line.rfind("timestamp", 0) == 0) {
            continue;  // header
        }
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 8) {
            throw IoError("weather CSV needs 8 columns, got line: " + line);
        }
        WeatherRecord r;
        try {
            r.time = parse_iso8601(fields[0]);
            r.t_air = std::stod(fields[1]);
            r.t_sky = std::stod(fields[2]);
            r.rh = std::stod(fields[3]);
            r.global_h = std::stod(fields[4]);
            r.diffuse_h = std::stod(fields[5]);
            r.wind_speed = std::stod(fields[6]);
            r.wind_dir = std::stod(fields[7]);
        } catch (const std::exception&) {
            throw IoError("malformed weather CSV line: " + line);
        }
        records.push_back(r);
    }
    return WeatherSeries(std::move(records));
}

WeatherRecord WeatherSeries::at(double t) const {
    double query = t;
    if (periodic_ && records_.size() > 1) {
        const double span = end() - start();
        if (t > end() || t < start()) {
            query = start() + std::fmod(t - start(), span);
            if (query < start()) {
                query += span;
            }
        }
    }
    if (query < start() || query > end()) {
        throw RangeError("time outside the weather series range");
    }
    const auto it = std::lower_bound(
        records_.begin(), records_.end(), query,
        [](const WeatherRecord& r, double value) { return r.time < value; });
    if (it == records_.begin()) {
        return records_.front();
    }
    if (it == records_.end()) {
        return records_.back();
    }
    if (it->time == query) {
        return *it;
    }
    return lerp(*(it - 1), *it, query);
}

double parse_iso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    const int got =
        std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi, &s);
    if (got < 5) {
        throw IoError("expected ISO-8601 timestamp, got: " + text);
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
        mi > 59 || s < 0 || s > 60) {
        throw IoError("timestamp fields out of range: " + text);
    }
    return static_cast<double>(days_from_civil(y, mo, d)) * kSecondsPerDay +
           h * 3600.0 + mi * 60.0 + s;
}

std::string format_iso8601(double epoch_seconds) {
    const long long total = static_cast<long long>(std::llround(epoch_seconds));
    long long days = total / 86400;
    long long rem = total % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld", y, mo, d,
                  rem / 3600, (rem % 3600) / 60, rem % 60);
    return buf;
}

SunPosition sun_position(double epoch_seconds, double latitude_deg) {
    constexpr double kDegToRad = std::numbers::pi / 180.0;

    const long long total = static_cast<long long>(std::floor(epoch_seconds));
    long long days = total / 86400;
    double rem = epoch_seconds - static_cast<double>(days) * kSecondsPerDay;
    if (rem < 0) {
        rem += kSecondsPerDay;
        days -= 1;
    }
    int y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    const long long doy = days - days_from_civil(y, 1, 1) + 1;

    const double decl =
        23.45 * kDegToRad *
        std::sin(2.0 * std::numbers::pi * (284.0 + static_cast<double>(doy)) / 365.0);
    const double hour = rem / 3600.0;
    const double hour_angle = (hour - 12.0) * 15.0 * kDegToRad;
    const double lat = latitude_deg * kDegToRad;

    SunPosition sun;
    sun.up = std::sin(lat) * std::sin(decl) +
             std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
    sun.east = -std::cos(decl) * std::sin(hour_angle);
    sun.north = std::cos(lat) * std::sin(decl) -
                std::sin(lat) * std::cos(decl) * std::cos(hour_angle);
    return sun;
}

double tilted_irradiance(double global_h, double diffuse_h, const SunPosition& sun,
                         double surface_azimuth_deg, double tilt_deg) {
    constexpr double kDegToRad = std::numbers::pi / 180.0;
    constexpr double kMinSunUp = 0.05;

    const double tilt = tilt_deg * kDegToRad;
    const double az = surface_azimuth_deg * kDegToRad;
    const double diffuse_factor = 0.5 * (1.0 + std::cos(tilt));

    if (sun.up < kMinSunUp) {
        // Near or below the horizon the beam split is unreliable; treat the
        // whole of the measured global as diffuse.
        return global_h * diffuse_factor;
    }
    const double beam_h = std::max(0.0, global_h - diffuse_h);
    const double beam_normal = beam_h / sun.up;
    const double cos_incidence = sun.east * std::sin(tilt) * std::sin(az) +
                                 sun.north * std::sin(tilt) * std::cos(az) +
                                 sun.up * std::cos(tilt);
    return beam_normal * std::max(0.0, cos_incidence) + diffuse_h * diffuse_factor;
}

}  // namespace thermred::building
