#include "limref/synthetic.hpp"

#include "config_text.hpp"
#include "limref/error.hpp"
#include "limref/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

namespace limref {

void SyntheticSpec::validate() const {
    if (n_meters < 1 || days < 1 || clusters < 1) {
        fail_input("synthetic spec: n_meters, days and clusters must be positive");
    }
    if (!(base_low > 0.0) || !(base_high > 0.0) || !(reference_temp > 0.0)) {
        fail_input("synthetic spec: bases and reference_temp must be positive");
    }
    if (weekly_amplitude < 0.0 || weekly_amplitude >= 1.0) {
        fail_input("synthetic spec: weekly_amplitude must lie in [0, 1)");
    }
    if (temp_sensitivity < 0.0 || noise < 0.0 || temp_amplitude < 0.0) {
        fail_input("synthetic spec: temp_sensitivity, noise and temp_amplitude must be non-negative");
    }
    if (missing_rate < 0.0 || missing_rate >= 1.0 || short_fraction < 0.0 || short_fraction > 1.0) {
        fail_input("synthetic spec: missing_rate must lie in [0, 1) and short_fraction in [0, 1]");
    }
    if (short_fraction > 0.0 && (short_days < 1 || short_days > days)) {
        fail_input("synthetic spec: short_days must lie in [1, days]");
    }
}

double synthetic_weekly_factor(const SyntheticSpec& spec, unsigned weekday) {
    return 1.0 + spec.weekly_amplitude * std::cos(2.0 * std::numbers::pi * (static_cast<double>(weekday) - 5.0) / 7.0);
}

double synthetic_cluster_base(const SyntheticSpec& spec, std::size_t cluster) {
    if (spec.clusters == 1) {
        return spec.base_low;
    }
    const double frac = static_cast<double>(cluster) / static_cast<double>(spec.clusters - 1);
    return spec.base_low * std::pow(spec.base_high / spec.base_low, frac);
}

SyntheticPanel generate_synthetic_panel(const SyntheticSpec& spec) {
    spec.validate();
    SyntheticPanel out;
    for (std::size_t c = 0; c < spec.clusters; ++c) {
        out.cluster_base.push_back(synthetic_cluster_base(spec, c));
    }

    // Shared regional weather: annual cycle plus AR(1) anomalies.
    std::mt19937_64 weather_rng(mix64(spec.seed));
    std::normal_distribution<double> weather_noise(0.0, 1.2);
    std::vector<double> regional(spec.days);
    double anomaly = 0.0;
    for (std::size_t d = 0; d < spec.days; ++d) {
        const Date date = add_days(spec.start_date, static_cast<long long>(d));
        const auto ymd = std::chrono::year_month_day{date};
        const auto doy = (date - Date{ymd.year() / std::chrono::January / 1}).count();
        anomaly = 0.7 * anomaly + weather_noise(weather_rng);
        regional[d] = spec.temp_mean -
                      spec.temp_amplitude * std::cos(2.0 * std::numbers::pi * (static_cast<double>(doy) - 15.0) / 365.0) +
                      anomaly;
    }

    const auto n_short = static_cast<std::size_t>(std::llround(spec.short_fraction * static_cast<double>(spec.n_meters)));
    for (std::size_t i = 0; i < spec.n_meters; ++i) {
        char id_buf[16];
        std::snprintf(id_buf, sizeof(id_buf), "M%04zu", i + 1);
        const std::string id = id_buf;
        std::mt19937_64 rng(derive_seed(spec.seed, id));
        std::normal_distribution<double> standard(0.0, 1.0);
        std::uniform_real_distribution<double> spread(2.0, 5.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        const std::size_t cluster = i % spec.clusters;
        const double base = out.cluster_base[cluster];
        const double offset = 0.3 * standard(rng);

        TemperatureSeries temps{id, spec.start_date, {}, {}, {}};
        std::vector<double> truth(spec.days);
        for (std::size_t d = 0; d < spec.days; ++d) {
            const Date date = add_days(spec.start_date, static_cast<long long>(d));
            const double t = regional[d] + offset;
            temps.mean_temp.push_back(t);
            temps.min_temp.push_back(t - spread(rng));
            temps.max_temp.push_back(t + spread(rng));
            const double heating = 1.0 + spec.temp_sensitivity * std::max(0.0, spec.reference_temp - t) / spec.reference_temp;
            const double z = standard(rng);
            const double noise = std::exp(spec.noise * z - 0.5 * spec.noise * spec.noise);
            truth[d] = base * synthetic_weekly_factor(spec, weekday_index(date)) * heating * noise;
        }

        const std::size_t first_day = i < n_short ? spec.days - spec.short_days : 0;
        RawReadings raw{id, {}, {}};
        raw.timestamps.reserve((spec.days - first_day) * 48);
        raw.values.reserve((spec.days - first_day) * 48);
        for (std::size_t d = first_day; d < spec.days; ++d) {
            const Timestamp day_start{add_days(spec.start_date, static_cast<long long>(d))};
            for (int slot = 0; slot < 48; ++slot) {
                raw.timestamps.push_back(day_start + std::chrono::minutes{30 * slot});
                const bool missing = spec.missing_rate > 0.0 && unit(rng) < spec.missing_rate;
                raw.values.push_back(missing ? std::nullopt : std::optional<double>(truth[d] / 48.0));
            }
        }
        for (std::size_t d = 0; d < first_day; ++d) {
            truth[d] = std::nan("");
        }
        out.consumption.push_back(std::move(raw));
        out.temperatures.push_back(std::move(temps));
        out.cluster.push_back(cluster);
        out.daily_truth.push_back(std::move(truth));
    }
    return out;
}

void write_synthetic_panel(const SyntheticPanel& panel, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(std::filesystem::path(dir) / "consumption.csv");
        if (!out) {
            fail_input("cannot write consumption.csv under '" + dir + "'");
        }
        out << "meter_id,timestamp,kwh\n";
        char buf[96];
        for (const auto& raw : panel.consumption) {
            for (std::size_t i = 0; i < raw.timestamps.size(); ++i) {
                const auto day = std::chrono::floor<std::chrono::days>(raw.timestamps[i]);
                const auto tod = std::chrono::hh_mm_ss(raw.timestamps[i] - day);
                const std::string date = format_date(day);
                if (raw.values[i]) {
                    std::snprintf(buf, sizeof(buf), "%s,%sT%02d:%02d:00,%.10g\n", raw.meter_id.c_str(), date.c_str(),
                                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                                  *raw.values[i]);
                } else {
                    std::snprintf(buf, sizeof(buf), "%s,%sT%02d:%02d:00,\n", raw.meter_id.c_str(), date.c_str(),
                                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()));
                }
                out << buf;
            }
        }
    }
    std::ofstream out(std::filesystem::path(dir) / "temperature.csv");
    if (!out) {
        fail_input("cannot write temperature.csv under '" + dir + "'");
    }
    out << "meter_id,date,mean_temp,min_temp,max_temp\n";
    char buf[128];
    for (const auto& t : panel.temperatures) {
        for (std::size_t d = 0; d < t.size(); ++d) {
            std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f,%.6f\n", t.meter_id.c_str(),
                          format_date(add_days(t.start_date, static_cast<long long>(d))).c_str(), t.mean_temp[d],
                          t.min_temp[d], t.max_temp[d]);
            out << buf;
        }
    }
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
    SyntheticSpec spec;
    for (const auto& [key, value] : detail::parse_key_values(text)) {
        if (key == "n_meters") {
            spec.n_meters = detail::to_uint(key, value);
        } else if (key == "days") {
            spec.days = detail::to_uint(key, value);
        } else if (key == "start_date") {
            spec.start_date = parse_date(value);
        } else if (key == "clusters") {
            spec.clusters = detail::to_uint(key, value);
        } else if (key == "base_low") {
            spec.base_low = detail::to_double(key, value);
        } else if (key == "base_high") {
            spec.base_high = detail::to_double(key, value);
        } else if (key == "weekly_amplitude") {
            spec.weekly_amplitude = detail::to_double(key, value);
        } else if (key == "temp_sensitivity") {
            spec.temp_sensitivity = detail::to_double(key, value);
        } else if (key == "reference_temp") {
            spec.reference_temp = detail::to_double(key, value);
        } else if (key == "temp_mean") {
            spec.temp_mean = detail::to_double(key, value);
        } else if (key == "temp_amplitude") {
            spec.temp_amplitude = detail::to_double(key, value);
        } else if (key == "noise") {
            spec.noise = detail::to_double(key, value);
        } else if (key == "missing_rate") {
            spec.missing_rate = detail::to_double(key, value);
        } else if (key == "short_fraction") {
            spec.short_fraction = detail::to_double(key, value);
        } else if (key == "short_days") {
            spec.short_days = detail::to_uint(key, value);
        } else if (key == "seed") {
            spec.seed = detail::to_uint(key, value);
        } else {
            fail_input("synthetic spec: unknown key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

} // namespace limref
