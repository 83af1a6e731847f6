#pragma once

#include "limref/data_core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace limref {

// Desk-scale stand-in for a smart-meter panel with known generative structure:
//
//   kwh(d) = base_c * weekly(d) * (1 + gamma * max(0, T_ref - temp(d)) / T_ref) * noise(d)
//
// Meter i belongs to cluster i % clusters; cluster bases are spread
// geometrically from base_low to base_high. weekly(d) = 1 + a*cos(2*pi*(dow - 5)/7)
// (Monday = 0) and noise(d) = exp(sigma*z - sigma^2/2) with z standard normal.
struct SyntheticSpec {
    std::size_t n_meters = 30;
    std::size_t days = 730;
    Date start_date = make_date(2017, 1, 1);
    std::size_t clusters = 2;
    double base_low = 10.0;
    double base_high = 30.0;
    double weekly_amplitude = 0.15;
    double temp_sensitivity = 0.8;
    double reference_temp = 12.0;
    double temp_mean = 10.0;
    double temp_amplitude = 7.0;
    double noise = 0.1;
    double missing_rate = 0.0;   // per half-hour slot
    double short_fraction = 0.0; // meters observed only over the last short_days days
    std::size_t short_days = 120;
    std::uint64_t seed = 7;

    void validate() const;
};

struct SyntheticPanel {
    std::vector<RawReadings> consumption;
    std::vector<TemperatureSeries> temperatures;
    std::vector<std::size_t> cluster;            // per meter
    std::vector<std::vector<double>> daily_truth; // per meter, noiseless formula times noise, kWh/day
    std::vector<double> cluster_base;
};

double synthetic_weekly_factor(const SyntheticSpec& spec, unsigned weekday);
double synthetic_cluster_base(const SyntheticSpec& spec, std::size_t cluster);

SyntheticPanel generate_synthetic_panel(const SyntheticSpec& spec);

// Writes consumption.csv and temperature.csv into `dir`.
void write_synthetic_panel(const SyntheticPanel& panel, const std::string& dir);

SyntheticSpec parse_synthetic_spec(const std::string& text);

} // namespace limref
