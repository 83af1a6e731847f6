#pragma once

#include "limref/calendar.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace limref {

using MeterId = std::string;

// Half-hourly readings for one meter. Missing readings are std::nullopt.
struct RawReadings {
    MeterId meter_id;
    std::vector<Timestamp> timestamps;
    std::vector<std::optional<double>> values;
};

// Daily totals before imputation; days without any present reading are nullopt.
struct DailyObservations {
    MeterId meter_id;
    Date start_date{};
    std::vector<std::optional<double>> values;
    std::vector<bool> partial;
};

struct DailySeries {
    MeterId meter_id;
    Date start_date{};
    std::vector<double> values;
    double scale = 1.0;
    bool normalized = false;

    std::size_t size() const { return values.size(); }
    Date end_date() const { return add_days(start_date, static_cast<long long>(values.size()) - 1); }
    Date date_at(std::size_t i) const { return add_days(start_date, static_cast<long long>(i)); }
    double kwh_at(std::size_t i) const { return values[i] * scale; }
};

struct TemperatureSeries {
    MeterId meter_id;
    Date start_date{};
    std::vector<double> mean_temp;
    std::vector<double> min_temp;
    std::vector<double> max_temp;

    std::size_t size() const { return mean_temp.size(); }
    Date end_date() const { return add_days(start_date, static_cast<long long>(size()) - 1); }
    // Mean temperature on `date`, if covered.
    std::optional<double> mean_on(Date date) const;
    TemperatureSeries slice(Date first, Date last) const;
};

struct PanelEntry {
    DailySeries consumption;
    TemperatureSeries temperature;
};

struct Rejection {
    MeterId meter_id;
    std::string reason;
};

// Immutable after construction; entries sorted by meter id.
class SeriesPanel {
public:
    SeriesPanel() = default;
    explicit SeriesPanel(std::vector<PanelEntry> entries);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<PanelEntry>& entries() const { return entries_; }
    const PanelEntry& at(std::size_t i) const { return entries_[i]; }
    const PanelEntry* find(const MeterId& id) const;
    const PanelEntry& get(const MeterId& id) const;
    std::vector<MeterId> meter_ids() const;

private:
    std::vector<PanelEntry> entries_;
    std::map<MeterId, std::size_t> index_;
};

struct PanelBuild {
    SeriesPanel panel;
    std::vector<Rejection> rejections;
};

DailyObservations aggregate_to_daily(const RawReadings& raw);
DailySeries impute_seasonal(const DailyObservations& observations);
DailySeries mean_scale(const DailySeries& series);
DailySeries inverse_scale(const DailySeries& series);

// Repeats the most recent year (or the whole record when shorter) cyclically
// to cover `horizon_days` days after the end of `temps`.
TemperatureSeries extend_temperature(const TemperatureSeries& temps, std::size_t horizon_days);

// Median; the mean of the two middle values for an even count.
double median(std::vector<double> values);

// Runs aggregation, imputation and scaling per meter and pairs each meter with
// its temperature record. Per-meter failures become rejections.
PanelBuild build_panel(const std::vector<RawReadings>& consumption,
                       const std::vector<TemperatureSeries>& temperatures, std::size_t jobs = 1);

// Keeps only days strictly before `cutoff`; meters left shorter than
// `min_length` are rejected.
PanelBuild truncate_panel(const SeriesPanel& panel, Date cutoff, std::size_t min_length);

// CSV I/O (formats: consumption `meter_id,timestamp,kwh`; temperature
// `meter_id,date,mean_temp,min_temp,max_temp`).
std::vector<RawReadings> read_consumption_csv(std::istream& in);
std::vector<RawReadings> read_consumption_csv(const std::string& path);
std::vector<TemperatureSeries> read_temperature_csv(std::istream& in);
std::vector<TemperatureSeries> read_temperature_csv(const std::string& path);
void write_rejection_log(std::ostream& out, const std::vector<Rejection>& rejections);

} // namespace limref
