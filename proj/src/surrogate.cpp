#include "limref/surrogate.hpp"

#include "limref/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

namespace limref {

void MiningTable::validate() const {
    if (columns.size() != features.size()) {
        fail_input("mining table: column count does not match feature count");
    }
    for (const auto& c : columns) {
        if (c.size() != targets.size()) {
            fail_input("mining table: ragged columns");
        }
    }
}

double empirical_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) {
        fail_input("quantile of empty sample");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

CutPoints derive_cutpoints(const MiningTable& table, std::size_t bins_per_feature) {
    if (bins_per_feature < 2) {
        fail_input("bins_per_feature must be >= 2");
    }
    table.validate();
    CutPoints cuts;
    cuts.boundaries.resize(table.feature_count());
    for (std::size_t f = 0; f < table.feature_count(); ++f) {
        const auto& name = table.features[f].name;
        if (table.rows() == 0) {
            cuts.dropped.push_back(name + ": empty table");
            continue;
        }
        if (table.features[f].kind == FeatureKind::Categorical) {
            std::set<double> levels(table.columns[f].begin(), table.columns[f].end());
            if (levels.size() < 2) {
                cuts.dropped.push_back(name + ": single level");
                continue;
            }
            cuts.boundaries[f].assign(levels.begin(), levels.end());
            continue;
        }
        std::vector<double> sorted = table.columns[f];
        std::sort(sorted.begin(), sorted.end());
        auto& b = cuts.boundaries[f];
        for (std::size_t k = 1; k < bins_per_feature; ++k) {
            const double q = empirical_quantile(sorted, static_cast<double>(k) / static_cast<double>(bins_per_feature));
            // A boundary at or above the maximum cannot split anything.
            if ((b.empty() || q > b.back()) && q < sorted.back()) {
                b.push_back(q);
            }
        }
        if (b.empty()) {
            cuts.dropped.push_back(name + ": fewer than 2 bins");
        }
    }
    return cuts;
}

const std::array<std::string, kSurrogateFeatureCount>& surrogate_feature_names() {
    static const std::array<std::string, kSurrogateFeatureCount> names = {"mean_cons", "max_cons", "min_cons", "temp",
                                                                         "month"};
    return names;
}

double SurrogateTable::target_mean() const {
    if (instances.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (const auto& i : instances) {
        s += i.target;
    }
    return s / static_cast<double>(instances.size());
}

SurrogateInstance featurize(const DailySeries& series, const TemperatureSeries& temps, const ForecastResult& forecast,
                            unsigned target_month, std::size_t window) {
    if (target_month < 1 || target_month > 12) {
        fail_input("target month must be in 1..12");
    }
    if (series.size() < window || window == 0) {
        fail_input(series.meter_id + ": series shorter than the " + std::to_string(window) + "-day feature window");
    }
    SurrogateInstance out;
    double sum = 0.0;
    out.max_cons = -std::numeric_limits<double>::infinity();
    out.min_cons = std::numeric_limits<double>::infinity();
    for (std::size_t i = series.size() - window; i < series.size(); ++i) {
        const double v = series.kwh_at(i);
        sum += v;
        out.max_cons = std::max(out.max_cons, v);
        out.min_cons = std::min(out.min_cons, v);
    }
    out.mean_cons = sum / static_cast<double>(window);
    // Rounding can push the mean a hair outside [min, max] for constant windows.
    out.mean_cons = std::clamp(out.mean_cons, out.min_cons, out.max_cons);

    double temp_sum = 0.0;
    std::size_t temp_days = 0;
    for (std::size_t h = 0; h < forecast.daily.size(); ++h) {
        const Date date = add_days(forecast.start_date, static_cast<long long>(h));
        if (month_of(date) != target_month) {
            continue;
        }
        const auto t = temps.mean_on(date);
        if (!t) {
            fail_input(series.meter_id + ": missing temperature on " + format_date(date));
        }
        temp_sum += *t;
        ++temp_days;
    }
    if (temp_days == 0) {
        fail_input(series.meter_id + ": forecast horizon does not include month " + std::to_string(target_month));
    }
    out.temp = temp_sum / static_cast<double>(temp_days);
    out.month = target_month;
    out.target = forecast.month_kwh(target_month);
    if (!std::isfinite(out.target)) {
        fail_numeric(series.meter_id + ": non-finite forecast target");
    }
    return out;
}

MiningTable to_mining_table(const std::vector<SurrogateInstance>& instances) {
    MiningTable table;
    const auto& names = surrogate_feature_names();
    for (std::size_t f = 0; f < kSurrogateFeatureCount; ++f) {
        table.features.push_back({names[f], f == 4 ? FeatureKind::Categorical : FeatureKind::Numeric});
    }
    table.columns.assign(kSurrogateFeatureCount, std::vector<double>());
    for (auto& c : table.columns) {
        c.reserve(instances.size());
    }
    table.targets.reserve(instances.size());
    for (const auto& inst : instances) {
        const auto values = inst.feature_values();
        for (std::size_t f = 0; f < kSurrogateFeatureCount; ++f) {
            table.columns[f].push_back(values[f]);
        }
        table.targets.push_back(inst.target);
    }
    return table;
}

MiningTable to_mining_table(const SurrogateTable& table) { return to_mining_table(table.instances); }

CutPoints derive_cutpoints(const SurrogateTable& table, std::size_t bins_per_feature) {
    return derive_cutpoints(to_mining_table(table), bins_per_feature);
}

void write_surrogate_csv(std::ostream& out, const SurrogateTable& table) {
    out << "provenance,mean_cons,max_cons,min_cons,temp,month,target\n";
    for (std::size_t i = 0; i < table.instances.size(); ++i) {
        const auto& inst = table.instances[i];
        std::string prov = "instance";
        if (i < table.provenance.size()) {
            const auto& p = table.provenance[i];
            prov = p.original ? "original:" + p.parent_meter_id
                              : "bootstrap:" + p.parent_meter_id + ":" + std::to_string(p.replicate_index);
        }
        out << prov << ',' << inst.mean_cons << ',' << inst.max_cons << ',' << inst.min_cons << ',' << inst.temp << ','
            << inst.month << ',' << inst.target << '\n';
    }
}

} // namespace limref
