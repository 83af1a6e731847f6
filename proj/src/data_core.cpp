#include "limref/data_core.hpp"

#include "limref/error.hpp"
#include "limref/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace limref {

namespace {

constexpr std::size_t kSlotsPerDay = 48;

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) {
        s.remove_suffix(1);
    }
    while (!s.empty() && s.front() == ' ') {
        s.remove_prefix(1);
    }
    return s;
}

double parse_double(std::string_view text, std::size_t line_no) {
    const std::string copy(text);
    char* end = nullptr;
    const double value = std::strtod(copy.c_str(), &end);
    if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(value)) {
        fail_input("line " + std::to_string(line_no) + ": malformed number '" + copy + "'");
    }
    return value;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail_input("cannot open '" + path + "'");
    }
    return in;
}

} // namespace

std::optional<double> TemperatureSeries::mean_on(Date date) const {
    const auto offset = (date - start_date).count();
    if (offset < 0 || static_cast<std::size_t>(offset) >= size()) {
        return std::nullopt;
    }
    return mean_temp[static_cast<std::size_t>(offset)];
}

TemperatureSeries TemperatureSeries::slice(Date first, Date last) const {
    const auto lo = (first - start_date).count();
    const auto hi = (last - start_date).count();
    if (lo < 0 || hi < lo || static_cast<std::size_t>(hi) >= size()) {
        fail_input("temperature record for " + meter_id + " does not cover " + format_date(first) +
                   ".." + format_date(last));
    }
    TemperatureSeries out{meter_id, first, {}, {}, {}};
    out.mean_temp.assign(mean_temp.begin() + lo, mean_temp.begin() + hi + 1);
    out.min_temp.assign(min_temp.begin() + lo, min_temp.begin() + hi + 1);
    out.max_temp.assign(max_temp.begin() + lo, max_temp.begin() + hi + 1);
    return out;
}

SeriesPanel::SeriesPanel(std::vector<PanelEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const PanelEntry& a, const PanelEntry& b) {
        return a.consumption.meter_id < b.consumption.meter_id;
    });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& id = entries_[i].consumption.meter_id;
        if (!index_.emplace(id, i).second) {
            fail_input("duplicate meter id '" + id + "' in panel");
        }
        if (entries_[i].temperature.meter_id != id) {
            fail_input("meter '" + id + "' paired with temperature of '" +
                       entries_[i].temperature.meter_id + "'");
        }
    }
}

const PanelEntry* SeriesPanel::find(const MeterId& id) const {
    const auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

const PanelEntry& SeriesPanel::get(const MeterId& id) const {
    const auto* entry = find(id);
    if (entry == nullptr) {
        std::string valid;
        for (const auto& e : entries_) {
            valid += (valid.empty() ? "" : ", ") + e.consumption.meter_id;
        }
        fail_input("unknown meter '" + id + "'; valid ids: " + valid);
    }
    return *entry;
}

std::vector<MeterId> SeriesPanel::meter_ids() const {
    std::vector<MeterId> ids;
    ids.reserve(entries_.size());
    for (const auto& e : entries_) {
        ids.push_back(e.consumption.meter_id);
    }
    return ids;
}

DailyObservations aggregate_to_daily(const RawReadings& raw) {
    if (raw.timestamps.size() != raw.values.size()) {
        fail_input(raw.meter_id + ": timestamp/value count mismatch");
    }
    const bool any_present = std::any_of(raw.values.begin(), raw.values.end(),
                                         [](const auto& v) { return v.has_value(); });
    if (raw.timestamps.empty() || !any_present) {
        fail_input(raw.meter_id + ": empty series");
    }
    for (std::size_t i = 1; i < raw.timestamps.size(); ++i) {
        if (raw.timestamps[i] <= raw.timestamps[i - 1]) {
            fail_input(raw.meter_id + ": timestamps not strictly increasing");
        }
    }
    for (const auto& v : raw.values) {
        if (v && (*v < 0.0 || !std::isfinite(*v))) {
            fail_input(raw.meter_id + ": negative or non-finite reading");
        }
    }

    const Date first = std::chrono::floor<std::chrono::days>(raw.timestamps.front());
    const Date last = std::chrono::floor<std::chrono::days>(raw.timestamps.back());
    const auto n_days = static_cast<std::size_t>((last - first).count() + 1);

    std::vector<double> sums(n_days, 0.0);
    std::vector<std::size_t> present(n_days, 0);
    for (std::size_t i = 0; i < raw.timestamps.size(); ++i) {
        if (!raw.values[i]) {
            continue;
        }
        const Date day = std::chrono::floor<std::chrono::days>(raw.timestamps[i]);
        const auto d = static_cast<std::size_t>((day - first).count());
        sums[d] += *raw.values[i];
        ++present[d];
    }

    DailyObservations out{raw.meter_id, first, std::vector<std::optional<double>>(n_days),
                          std::vector<bool>(n_days, false)};
    for (std::size_t d = 0; d < n_days; ++d) {
        if (present[d] > 0) {
            out.values[d] = sums[d];
            out.partial[d] = present[d] < kSlotsPerDay;
        }
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        fail_input("median of empty set");
    }
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

DailySeries impute_seasonal(const DailyObservations& observations) {
    std::vector<double> by_weekday[7];
    std::vector<double> all;
    for (std::size_t d = 0; d < observations.values.size(); ++d) {
        if (const auto& v = observations.values[d]) {
            by_weekday[weekday_index(add_days(observations.start_date, static_cast<long long>(d)))].push_back(*v);
            all.push_back(*v);
        }
    }
    if (all.empty()) {
        fail_input(observations.meter_id + ": no observed values to impute from");
    }

    const double overall = median(all);
    double fill[7];
    for (int w = 0; w < 7; ++w) {
        fill[w] = by_weekday[w].empty() ? overall : median(by_weekday[w]);
    }

    DailySeries out{observations.meter_id, observations.start_date, {}, 1.0, false};
    out.values.reserve(observations.values.size());
    for (std::size_t d = 0; d < observations.values.size(); ++d) {
        const auto& v = observations.values[d];
        out.values.push_back(v ? *v : fill[weekday_index(out.date_at(d))]);
    }
    return out;
}

DailySeries mean_scale(const DailySeries& series) {
    if (series.values.empty()) {
        fail_input(series.meter_id + ": empty series");
    }
    const double mean =
        std::accumulate(series.values.begin(), series.values.end(), 0.0) / static_cast<double>(series.size());
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        fail_input(series.meter_id + ": non-positive mean");
    }
    DailySeries out = series;
    for (auto& v : out.values) {
        v /= mean;
    }
    out.scale = series.scale * mean;
    out.normalized = true;
    return out;
}

DailySeries inverse_scale(const DailySeries& series) {
    DailySeries out = series;
    for (auto& v : out.values) {
        v *= series.scale;
    }
    out.scale = 1.0;
    out.normalized = false;
    return out;
}

TemperatureSeries extend_temperature(const TemperatureSeries& temps, std::size_t horizon_days) {
    const std::size_t len = temps.size();
    if (horizon_days > len) {
        fail_input(temps.meter_id + ": temperature horizon of " + std::to_string(horizon_days) +
                   " days exceeds the " + std::to_string(len) + "-day history");
    }
    const std::size_t period = std::min<std::size_t>(len, 365);
    const std::size_t base = len - period;
    TemperatureSeries out{temps.meter_id, add_days(temps.end_date(), 1), {}, {}, {}};
    out.mean_temp.reserve(horizon_days);
    out.min_temp.reserve(horizon_days);
    out.max_temp.reserve(horizon_days);
    for (std::size_t d = 0; d < horizon_days; ++d) {
        const std::size_t src = base + d % period;
        out.mean_temp.push_back(temps.mean_temp[src]);
        out.min_temp.push_back(temps.min_temp[src]);
        out.max_temp.push_back(temps.max_temp[src]);
    }
    return out;
}

namespace {

std::optional<std::string> validate_temperature(const TemperatureSeries& t) {
    for (std::size_t d = 0; d < t.size(); ++d) {
        if (std::isnan(t.mean_temp[d])) {
            return "temperature gap on " + format_date(add_days(t.start_date, static_cast<long long>(d)));
        }
        if (!(t.min_temp[d] <= t.mean_temp[d] && t.mean_temp[d] <= t.max_temp[d])) {
            return "inconsistent temperature on " +
                   format_date(add_days(t.start_date, static_cast<long long>(d)));
        }
    }
    return std::nullopt;
}

} // namespace

PanelBuild build_panel(const std::vector<RawReadings>& consumption,
                       const std::vector<TemperatureSeries>& temperatures, std::size_t jobs) {
    std::map<MeterId, const TemperatureSeries*> temps_by_id;
    for (const auto& t : temperatures) {
        temps_by_id[t.meter_id] = &t;
    }

    struct Outcome {
        std::optional<PanelEntry> entry;
        std::optional<Rejection> rejection;
    };
    std::vector<Outcome> outcomes(consumption.size());

    parallel_for(consumption.size(), jobs, [&](std::size_t i) {
        const RawReadings& raw = consumption[i];
        try {
            DailySeries scaled = mean_scale(impute_seasonal(aggregate_to_daily(raw)));
            const auto it = temps_by_id.find(raw.meter_id);
            if (it == temps_by_id.end()) {
                outcomes[i].rejection = Rejection{raw.meter_id, "missing temperature series"};
                return;
            }
            const TemperatureSeries& t = *it->second;
            if (t.size() == 0 || t.start_date > scaled.start_date || t.end_date() < scaled.end_date()) {
                outcomes[i].rejection =
                    Rejection{raw.meter_id, "temperature record does not cover the consumption span"};
                return;
            }
            TemperatureSeries aligned = t.slice(t.start_date, scaled.end_date());
            if (auto problem = validate_temperature(aligned)) {
                outcomes[i].rejection = Rejection{raw.meter_id, *problem};
                return;
            }
            outcomes[i].entry = PanelEntry{std::move(scaled), std::move(aligned)};
        } catch (const Error& e) {
            outcomes[i].rejection = Rejection{raw.meter_id, e.what()};
        }
    });

    PanelBuild out;
    std::vector<PanelEntry> entries;
    for (auto& o : outcomes) {
        if (o.entry) {
            entries.push_back(std::move(*o.entry));
        } else {
            out.rejections.push_back(std::move(*o.rejection));
        }
    }
    std::sort(out.rejections.begin(), out.rejections.end(),
              [](const Rejection& a, const Rejection& b) { return a.meter_id < b.meter_id; });
    out.panel = SeriesPanel(std::move(entries));
    return out;
}

PanelBuild truncate_panel(const SeriesPanel& panel, Date cutoff, std::size_t min_length) {
    PanelBuild out;
    std::vector<PanelEntry> entries;
    for (const auto& e : panel.entries()) {
        const auto& c = e.consumption;
        const auto keep = std::max<long long>(0, (cutoff - c.start_date).count());
        if (static_cast<std::size_t>(keep) < min_length) {
            out.rejections.push_back({c.meter_id, "history before cutoff shorter than " +
                                                      std::to_string(min_length) + " days"});
            continue;
        }
        DailySeries raw = inverse_scale(c);
        raw.values.resize(std::min<std::size_t>(raw.values.size(), static_cast<std::size_t>(keep)));
        try {
            DailySeries scaled = mean_scale(raw);
            TemperatureSeries t = e.temperature.slice(e.temperature.start_date, scaled.end_date());
            entries.push_back({std::move(scaled), std::move(t)});
        } catch (const Error& err) {
            out.rejections.push_back({c.meter_id, err.what()});
        }
    }
    out.panel = SeriesPanel(std::move(entries));
    return out;
}

std::vector<RawReadings> read_consumption_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "meter_id,timestamp,kwh") {
        fail_input("consumption CSV: expected header 'meter_id,timestamp,kwh'");
    }
    std::map<MeterId, std::vector<std::pair<Timestamp, std::optional<double>>>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) {
            continue;
        }
        const auto fields = split_csv(text);
        if (fields.size() != 3) {
            fail_input("consumption CSV line " + std::to_string(line_no) + ": expected 3 fields");
        }
        std::optional<double> value;
        if (!trim(fields[2]).empty()) {
            value = parse_double(trim(fields[2]), line_no);
        }
        rows[std::string(trim(fields[0]))].emplace_back(parse_timestamp(trim(fields[1])), value);
    }
    std::vector<RawReadings> out;
    out.reserve(rows.size());
    for (auto& [id, readings] : rows) {
        std::stable_sort(readings.begin(), readings.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        RawReadings r{id, {}, {}};
        r.timestamps.reserve(readings.size());
        r.values.reserve(readings.size());
        for (const auto& [ts, v] : readings) {
            r.timestamps.push_back(ts);
            r.values.push_back(v);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RawReadings> read_consumption_csv(const std::string& path) {
    auto in = open_input(path);
    return read_consumption_csv(in);
}

std::vector<TemperatureSeries> read_temperature_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != "meter_id,date,mean_temp,min_temp,max_temp") {
        fail_input("temperature CSV: expected header 'meter_id,date,mean_temp,min_temp,max_temp'");
    }
    struct Row {
        Date date;
        double mean, lo, hi;
    };
    std::map<MeterId, std::vector<Row>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) {
            continue;
        }
        const auto f = split_csv(text);
        if (f.size() != 5) {
            fail_input("temperature CSV line " + std::to_string(line_no) + ": expected 5 fields");
        }
        rows[std::string(trim(f[0]))].push_back({parse_date(trim(f[1])), parse_double(trim(f[2]), line_no),
                                                 parse_double(trim(f[3]), line_no),
                                                 parse_double(trim(f[4]), line_no)});
    }
    std::vector<TemperatureSeries> out;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (auto& [id, days] : rows) {
        std::sort(days.begin(), days.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
        TemperatureSeries t{id, days.front().date, {}, {}, {}};
        const auto n = static_cast<std::size_t>((days.back().date - days.front().date).count() + 1);
        t.mean_temp.assign(n, nan);
        t.min_temp.assign(n, nan);
        t.max_temp.assign(n, nan);
        for (const auto& r : days) {
            const auto d = static_cast<std::size_t>((r.date - t.start_date).count());
            t.mean_temp[d] = r.mean;
            t.min_temp[d] = r.lo;
            t.max_temp[d] = r.hi;
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<TemperatureSeries> read_temperature_csv(const std::string& path) {
    auto in = open_input(path);
    return read_temperature_csv(in);
}

void write_rejection_log(std::ostream& out, const std::vector<Rejection>& rejections) {
    for (const auto& r : rejections) {
        out << r.meter_id << '\t' << r.reason << '\n';
    }
}

} // namespace limref
