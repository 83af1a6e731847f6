#include "limref/neighborhood.hpp"

#include "limref/error.hpp"
#include "limref/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace limref {

namespace {

std::vector<double> mean_normalized(std::span<const double> x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    std::vector<double> out(x.begin(), x.end());
    if (mean != 0.0) {
        for (auto& v : out) {
            v /= mean;
        }
    }
    return out;
}

} // namespace

double dtw_distance(std::span<const double> a, std::span<const double> b, const DtwConfig& cfg) {
    if (a.empty() || b.empty()) {
        fail_input("dtw_distance: empty series");
    }
    if (cfg.band_radius && *cfg.band_radius < 1) {
        fail_input("dtw_distance: band radius must be >= 1");
    }
    std::vector<double> na, nb;
    if (cfg.normalize_before) {
        na = mean_normalized(a);
        nb = mean_normalized(b);
        a = na;
        b = nb;
    }
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const std::size_t gap = n > m ? n - m : m - n;
    const std::size_t radius = cfg.band_radius ? std::max(*cfg.band_radius, gap) : std::max(n, m);

    constexpr double inf = std::numeric_limits<double>::infinity();
    // Rows indexed 0..m with a sentinel column 0.
    std::vector<double> prev(m + 1, inf);
    std::vector<double> curr(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(curr.begin(), curr.end(), inf);
        const std::size_t lo = i > radius ? i - radius : 1;
        const std::size_t hi = std::min(m, i + radius);
        for (std::size_t j = lo; j <= hi; ++j) {
            const double diff = a[i - 1] - b[j - 1];
            const double best = std::min({prev[j], curr[j - 1], prev[j - 1]});
            curr[j] = diff * diff + best;
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

double dtw_distance(const DailySeries& a, const DailySeries& b, const DtwConfig& cfg) {
    return dtw_distance(std::span<const double>(a.values), std::span<const double>(b.values), cfg);
}

std::vector<Neighbor> select_nearest(const SeriesPanel& panel, const MeterId& origin, std::size_t n_filt,
                                     const DtwConfig& cfg, std::size_t jobs) {
    const PanelEntry& target = panel.get(origin);
    if (n_filt + 1 > panel.size()) {
        fail_input("select_nearest: n_filt=" + std::to_string(n_filt) + " but only " +
                   std::to_string(panel.size() - 1) + " candidate meters besides " + origin);
    }
    std::vector<Neighbor> candidates;
    candidates.reserve(panel.size() - 1);
    for (const auto& e : panel.entries()) {
        if (e.consumption.meter_id != origin) {
            candidates.push_back({e.consumption.meter_id, 0.0});
        }
    }
    parallel_for(candidates.size(), jobs, [&](std::size_t i) {
        candidates[i].distance = dtw_distance(target.consumption, panel.get(candidates[i].meter_id).consumption, cfg);
    });
    std::sort(candidates.begin(), candidates.end(), [](const Neighbor& x, const Neighbor& y) {
        return x.distance != y.distance ? x.distance < y.distance : x.meter_id < y.meter_id;
    });
    candidates.resize(n_filt);
    return candidates;
}

double BoxCox::forward(double y) const {
    const double shifted = y + shift;
    return lambda == 0.0 ? std::log(shifted) : (std::pow(shifted, lambda) - 1.0) / lambda;
}

double BoxCox::inverse(double z) const {
    if (lambda == 0.0) {
        return std::exp(z) - shift;
    }
    const double base = std::max(lambda * z + 1.0, std::numeric_limits<double>::min());
    return std::pow(base, 1.0 / lambda) - shift;
}

BoxCox fit_box_cox(std::span<const double> values) {
    BoxCox best;
    if (values.empty()) {
        return best;
    }
    const double lo = *std::min_element(values.begin(), values.end());
    best.shift = lo <= 0.0 ? 1.0 - lo : 0.0;

    const auto n = static_cast<double>(values.size());
    double log_sum = 0.0;
    for (double v : values) {
        log_sum += std::log(v + best.shift);
    }

    double best_ll = -std::numeric_limits<double>::infinity();
    double best_lambda = 1.0;
    for (int step = 0; step <= 10; ++step) {
        const BoxCox candidate{step / 10.0, best.shift};
        std::vector<double> z(values.size());
        std::transform(values.begin(), values.end(), z.begin(), [&](double v) { return candidate.forward(v); });
        const double mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
        double ss = 0.0;
        for (double x : z) {
            ss += (x - mean) * (x - mean);
        }
        const double var = ss / n;
        if (!(var > 0.0)) {
            continue;
        }
        const double ll = -0.5 * n * std::log(var) + (candidate.lambda - 1.0) * log_sum;
        if (ll > best_ll) {
            best_ll = ll;
            best_lambda = candidate.lambda;
        }
    }
    best.lambda = best_lambda;
    return best;
}

Decomposition decompose_additive(std::span<const double> values) {
    const std::size_t n = values.size();
    constexpr std::size_t half = kSeasonalPeriod / 2;
    if (n < 2 * kSeasonalPeriod) {
        fail_input("too short to decompose");
    }
    Decomposition d;
    d.trend.assign(n, 0.0);
    for (std::size_t i = half; i + half < n; ++i) {
        double s = 0.0;
        for (std::size_t k = i - half; k <= i + half; ++k) {
            s += values[k];
        }
        d.trend[i] = s / static_cast<double>(kSeasonalPeriod);
    }
    for (std::size_t i = 0; i < half; ++i) {
        d.trend[i] = d.trend[half];
        d.trend[n - 1 - i] = d.trend[n - 1 - half];
    }

    double sums[kSeasonalPeriod] = {};
    std::size_t counts[kSeasonalPeriod] = {};
    for (std::size_t i = half; i + half < n; ++i) {
        sums[i % kSeasonalPeriod] += values[i] - d.trend[i];
        ++counts[i % kSeasonalPeriod];
    }
    double pattern[kSeasonalPeriod];
    double centre = 0.0;
    for (std::size_t p = 0; p < kSeasonalPeriod; ++p) {
        pattern[p] = sums[p] / static_cast<double>(counts[p]);
        centre += pattern[p];
    }
    centre /= static_cast<double>(kSeasonalPeriod);
    for (auto& v : pattern) {
        v -= centre;
    }

    d.seasonal.resize(n);
    d.remainder.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.seasonal[i] = pattern[i % kSeasonalPeriod];
        d.remainder[i] = values[i] - d.trend[i] - d.seasonal[i];
    }
    return d;
}

std::vector<std::vector<double>> bootstrap_series(std::span<const double> parent, std::size_t n_synthetic,
                                                  std::uint64_t seed) {
    if (parent.size() < 2 * kSeasonalPeriod) {
        fail_input("too short to decompose");
    }
    for (double v : parent) {
        if (!std::isfinite(v)) {
            fail_input("bootstrap_series: non-finite value in parent");
        }
    }
    const BoxCox transform = fit_box_cox(parent);
    std::vector<double> z(parent.size());
    std::transform(parent.begin(), parent.end(), z.begin(), [&](double v) { return transform.forward(v); });
    const Decomposition parts = decompose_additive(z);

    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> replicates;
    replicates.reserve(n_synthetic);
    for (std::size_t r = 0; r < n_synthetic; ++r) {
        const auto remainder = moving_block_bootstrap(std::span<const double>(parts.remainder), kBlockLength, rng);
        std::vector<double> out(parent.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = std::max(0.0, transform.inverse(parts.trend[i] + parts.seasonal[i] + remainder[i]));
        }
        replicates.push_back(std::move(out));
    }
    return replicates;
}

std::size_t Neighborhood::original_count() const {
    return static_cast<std::size_t>(std::count_if(members.begin(), members.end(),
                                                  [](const NeighborhoodMember& m) { return m.provenance.original; }));
}

Neighborhood build_neighborhood(const SeriesPanel& panel, const MeterId& origin, std::size_t n_filt,
                                std::size_t n_synthetic, std::uint64_t global_seed, const DtwConfig& cfg,
                                std::size_t jobs) {
    const auto nearest = select_nearest(panel, origin, n_filt, cfg, jobs);

    std::vector<std::vector<std::vector<double>>> replicates(nearest.size());
    parallel_for(nearest.size(), jobs, [&](std::size_t i) {
        const auto& parent = panel.get(nearest[i].meter_id).consumption;
        replicates[i] = bootstrap_series(parent.values, n_synthetic, derive_seed(global_seed, parent.meter_id));
    });

    Neighborhood hood{origin, {}};
    hood.members.reserve(nearest.size() * (n_synthetic + 1));
    for (const auto& nb : nearest) {
        const auto& entry = panel.get(nb.meter_id);
        hood.members.push_back({entry.consumption, &entry.temperature, {true, nb.meter_id, 0}, nb.distance});
    }
    for (std::size_t i = 0; i < nearest.size(); ++i) {
        const auto& entry = panel.get(nearest[i].meter_id);
        for (std::size_t r = 0; r < replicates[i].size(); ++r) {
            DailySeries series = entry.consumption;
            series.values = std::move(replicates[i][r]);
            hood.members.push_back({std::move(series), &entry.temperature, {false, nearest[i].meter_id, r},
                                    nearest[i].distance});
        }
    }
    return hood;
}

void write_neighborhood_csv(std::ostream& out, const Neighborhood& neighborhood) {
    out << "meter_id,provenance,replicate,day_index,value\n";
    for (const auto& m : neighborhood.members) {
        for (std::size_t d = 0; d < m.series.size(); ++d) {
            out << m.provenance.parent_meter_id << ',' << (m.provenance.original ? "original" : "bootstrap") << ','
                << (m.provenance.original ? 0 : m.provenance.replicate_index) << ',' << d << ','
                << m.series.values[d] << '\n';
        }
    }
}

} // namespace limref
