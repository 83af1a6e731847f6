#pragma once

#include "limref/data_core.hpp"
#include "limref/gfm.hpp"
#include "limref/mining_table.hpp"
#include "limref/neighborhood.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace limref {

inline constexpr std::size_t kSurrogateFeatureCount = 5;

// Feature order shared by every tabular view: mean_cons, max_cons, min_cons, temp, month.
const std::array<std::string, kSurrogateFeatureCount>& surrogate_feature_names();

struct SurrogateInstance {
    double mean_cons = 0.0; // kWh/day over the input window
    double max_cons = 0.0;
    double min_cons = 0.0;
    double temp = 0.0;      // mean of daily mean temperatures over the target month
    unsigned month = 1;
    double target = 0.0;    // monthly forecast, kWh

    std::array<double, kSurrogateFeatureCount> feature_values() const {
        return {mean_cons, max_cons, min_cons, temp, static_cast<double>(month)};
    }
};

struct SurrogateTable {
    std::vector<SurrogateInstance> instances;
    std::vector<Provenance> provenance; // parallel to instances
    SurrogateInstance origin_instance;

    double target_mean() const;
};

// `series` is the model input (normalized, with scale); `temps` the extended
// temperatures covering the forecast horizon.
SurrogateInstance featurize(const DailySeries& series, const TemperatureSeries& temps, const ForecastResult& forecast,
                            unsigned target_month, std::size_t window = 20);

MiningTable to_mining_table(const SurrogateTable& table);
MiningTable to_mining_table(const std::vector<SurrogateInstance>& instances);

CutPoints derive_cutpoints(const SurrogateTable& table, std::size_t bins_per_feature);

// provenance,mean_cons,max_cons,min_cons,temp,month,target
void write_surrogate_csv(std::ostream& out, const SurrogateTable& table);

} // namespace limref
