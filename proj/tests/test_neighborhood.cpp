#include <doctest.h>

#include "limref/error.hpp"
#include "limref/neighborhood.hpp"
#include "limref/synthetic.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace limref;

namespace {

PanelEntry entry(const std::string& id, std::vector<double> values) {
    PanelEntry e;
    e.consumption.meter_id = id;
    e.consumption.start_date = make_date(2017, 1, 1);
    e.consumption.values = std::move(values);
    e.consumption = mean_scale(e.consumption);
    e.temperature.meter_id = id;
    e.temperature.start_date = e.consumption.start_date;
    e.temperature.mean_temp.assign(e.consumption.size(), 8.0);
    e.temperature.min_temp.assign(e.consumption.size(), 4.0);
    e.temperature.max_temp.assign(e.consumption.size(), 12.0);
    return e;
}

std::vector<double> random_positive(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.5, 5.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

SeriesPanel small_synthetic_panel(std::size_t meters, std::size_t days) {
    SyntheticSpec spec;
    spec.n_meters = meters;
    spec.days = days;
    const auto synth = generate_synthetic_panel(spec);
    return build_panel(synth.consumption, synth.temperatures).panel;
}

} // namespace

TEST_CASE("DTW basic values") {
    std::vector<double> a = {1, 2, 3, 4, 3, 2};
    CHECK(dtw_distance(a, a) == 0.0);

    std::vector<double> x = {1, 2, 3}, y = {1, 2, 2, 3};
    CHECK(dtw_distance(x, y) ==
          doctest::Approx(oracle::dtw_full(oracle::divide_by_mean(x), oracle::divide_by_mean(y))).epsilon(1e-12));

    std::vector<double> c1 = {4.0}, c3 = {4.0, 4.0, 4.0};
    CHECK(dtw_distance(c1, c3) == 0.0);

    std::vector<double> empty;
    CHECK_THROWS_AS(dtw_distance(empty, a), Error);
}

TEST_CASE("DTW agrees with the full-matrix oracle") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::size_t> len(1, 60);
    DtwConfig raw;
    raw.normalize_before = false;
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_positive(rng, len(rng));
        const auto b = random_positive(rng, len(rng));
        const double d = dtw_distance(a, b);
        CHECK(d >= 0.0);
        CHECK(d == doctest::Approx(dtw_distance(b, a)).epsilon(1e-12));
        CHECK(d == doctest::Approx(oracle::dtw_full(oracle::divide_by_mean(a), oracle::divide_by_mean(b)))
                       .epsilon(1e-12));
        CHECK(dtw_distance(a, b, raw) == doctest::Approx(oracle::dtw_full(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("DTW band") {
    std::mt19937_64 rng(2);
    const auto a = random_positive(rng, 40), b = random_positive(rng, 35);
    DtwConfig wide;
    wide.band_radius = 100;
    CHECK(dtw_distance(a, b, wide) == doctest::Approx(dtw_distance(a, b)).epsilon(1e-12));
    DtwConfig narrow;
    narrow.band_radius = 1;
    CHECK(dtw_distance(a, b, narrow) >= dtw_distance(a, b) - 1e-12);
}

TEST_CASE("nearest-neighbour selection") {
    const std::vector<double> base = {1, 3, 2, 5, 4, 2, 1, 3, 4, 2};
    std::vector<double> shifted = base;
    std::rotate(shifted.begin(), shifted.begin() + 3, shifted.end());
    std::vector<double> scaled = base;
    for (auto& v : scaled) v *= 3.0;
    std::vector<double> other = {5, 1, 5, 1, 5, 1, 5, 1, 5, 1};
    SeriesPanel panel({entry("o", base), entry("dup", scaled), entry("b", shifted), entry("c", other)});

    const auto nn = select_nearest(panel, "o", 2);
    REQUIRE(nn.size() == 2);
    CHECK(nn[0].meter_id == "dup");
    CHECK(nn[0].distance == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& n : nn) CHECK(n.meter_id != "o");
    CHECK(select_nearest(panel, "o", 3).size() == 3);
    CHECK_THROWS_AS(select_nearest(panel, "o", 4), Error);
    CHECK_THROWS_AS(select_nearest(panel, "zzz", 1), Error);
}

TEST_CASE("nearest-neighbour selection matches brute force and is order invariant") {
    std::mt19937_64 rng(23);
    std::vector<PanelEntry> entries;
    std::uniform_int_distribution<std::size_t> len(30, 60);
    for (int i = 0; i < 20; ++i) entries.push_back(entry("m" + std::to_string(100 + i), random_positive(rng, len(rng))));
    const SeriesPanel panel(entries);
    std::vector<std::pair<double, std::string>> brute;
    const auto& origin = panel.get("m105").consumption.values;
    for (const auto& e : entries) {
        if (e.consumption.meter_id == "m105") continue;
        brute.emplace_back(oracle::dtw_full(origin, e.consumption.values), e.consumption.meter_id);
    }
    std::sort(brute.begin(), brute.end());
    const auto nn = select_nearest(panel, "m105", 7, {}, 3);
    REQUIRE(nn.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(nn[i].meter_id == brute[i].second);
        CHECK(nn[i].distance == doctest::Approx(brute[i].first).epsilon(1e-12));
    }

    std::shuffle(entries.begin(), entries.end(), rng);
    const auto again = select_nearest(SeriesPanel(entries), "m105", 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(again[i].meter_id == nn[i].meter_id);
}

TEST_CASE("additive decomposition of trend plus weekly pattern") {
    const std::array<double, 7> s = {0.3, -0.1, 0.2, -0.4, 0.1, 0.0, -0.1};
    std::vector<double> y(28);
    for (std::size_t d = 0; d < 28; ++d) y[d] = 5.0 + static_cast<double>(d) / 10.0 + s[d % 7];
    const auto dec = decompose_additive(y);
    for (std::size_t d = 3; d + 3 < 28; ++d) {
        double cma = 0.0;
        for (std::size_t j = d - 3; j <= d + 3; ++j) cma += y[j];
        CHECK(dec.trend[d] == doctest::Approx(cma / 7.0).epsilon(1e-12));
        CHECK(dec.trend[d] == doctest::Approx(5.0 + static_cast<double>(d) / 10.0).epsilon(1e-12));
    }
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(dec.trend[d] == dec.trend[3]);
        CHECK(dec.trend[27 - d] == dec.trend[24]);
    }
    double season_sum = 0.0;
    for (std::size_t d = 0; d < 7; ++d) season_sum += dec.seasonal[d];
    CHECK(std::abs(season_sum) < 1e-12);
    for (std::size_t d = 0; d < 28; ++d)
        CHECK(dec.trend[d] + dec.seasonal[d] + dec.remainder[d] == doctest::Approx(y[d]).epsilon(1e-12));
    for (std::size_t d = 7; d < 21; ++d) CHECK(std::abs(dec.remainder[d]) < 1e-9);

    std::vector<double> too_short(13, 1.0);
    CHECK_THROWS_WITH_AS(decompose_additive(too_short), doctest::Contains("too short"), Error);
}

TEST_CASE("Box-Cox") {
    std::vector<double> v = {0.0, 1.0, 2.0, 3.0, 10.0};
    const auto bc = fit_box_cox(v);
    CHECK(bc.shift == doctest::Approx(1.0));
    CHECK(bc.lambda >= 0.0);
    CHECK(bc.lambda <= 1.0);
    CHECK(std::abs(bc.lambda * 10.0 - std::round(bc.lambda * 10.0)) < 1e-9);
    for (double x : v) CHECK(bc.inverse(bc.forward(x)) == doctest::Approx(x).epsilon(1e-9));
}

TEST_CASE("block bootstrap of a purely periodic series reproduces it") {
    std::vector<double> parent(84);
    const std::array<double, 7> week = {1.2, 0.9, 1.0, 1.1, 0.8, 0.95, 1.05};
    for (std::size_t d = 0; d < parent.size(); ++d) parent[d] = week[d % 7];
    const auto reps = bootstrap_series(parent, 3, 99);
    REQUIRE(reps.size() == 3);
    for (const auto& r : reps) {
        REQUIRE(r.size() == parent.size());
        for (std::size_t d = 0; d < parent.size(); ++d) CHECK(std::abs(r[d] - parent[d]) <= 1e-9);
    }
}

TEST_CASE("block bootstrap determinism and shape") {
    std::mt19937_64 rng(8);
    const auto parent = random_positive(rng, 120);
    const auto a = bootstrap_series(parent, 5, 1234);
    const auto b = bootstrap_series(parent, 5, 1234);
    const auto c = bootstrap_series(parent, 5, 4321);
    CHECK(a == b);
    CHECK(a != c);
    for (const auto& r : a) {
        CHECK(r.size() == parent.size());
        for (double v : r) CHECK(v >= 0.0);
    }
    std::vector<double> short_parent(10, 1.0);
    CHECK_THROWS_AS(bootstrap_series(short_parent, 1, 1), Error);
}

TEST_CASE("moving block bootstrap draws contiguous blocks") {
    std::vector<double> v(50);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    std::mt19937_64 rng(4);
    const auto out = moving_block_bootstrap(std::span<const double>(v), 14, rng);
    REQUIRE(out.size() == v.size());
    std::size_t breaks = 0;
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] != out[i - 1] + 1.0) ++breaks;
    CHECK(breaks <= out.size() / 14 + 1);
}

TEST_CASE("neighbourhood composition") {
    const auto panel = small_synthetic_panel(12, 200);
    const auto nh = build_neighborhood(panel, "M0001", 5, 4, 42, {}, 2);
    CHECK(nh.original_count() == 5);
    CHECK(nh.members.size() == 5 + 5 * 4);
    for (std::size_t i = 0; i < nh.members.size(); ++i) {
        const auto& m = nh.members[i];
        CHECK((i < 5) == m.provenance.original);
        CHECK(m.provenance.parent_meter_id != "M0001");
        CHECK(panel.find(m.provenance.parent_meter_id) != nullptr);
        CHECK(m.temperature != nullptr);
        CHECK(m.series.size() == panel.get(m.provenance.parent_meter_id).consumption.size());
    }
    const auto again = build_neighborhood(panel, "M0001", 5, 4, 42, {}, 1);
    for (std::size_t i = 0; i < nh.members.size(); ++i) CHECK(again.members[i].series.values == nh.members[i].series.values);

    const auto originals_only = build_neighborhood(panel, "M0001", 5, 0, 42);
    CHECK(originals_only.members.size() == 5);
}
