#include <doctest.h>

#include "limref/error.hpp"
#include "limref/impact_miner.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace limref;

namespace {

MiningTable table_of(std::vector<std::vector<double>> columns, std::vector<double> targets) {
    MiningTable t;
    for (std::size_t f = 0; f < columns.size(); ++f) t.features.push_back({"f" + std::to_string(f), FeatureKind::Numeric});
    t.columns = std::move(columns);
    t.targets = std::move(targets);
    return t;
}

Condition at_most(std::size_t f, double v) { return {f, "f" + std::to_string(f), ConditionForm::AtMost, 0.0, v}; }
Condition above(std::size_t f, double v) { return {f, "f" + std::to_string(f), ConditionForm::Above, v, 0.0}; }

void check_against_oracle(const MiningTable& t, std::size_t bins, const MinerConfig& cfg) {
    const auto cuts = derive_cutpoints(t, bins);
    const auto universe = condition_universe(t, cuts);
    const auto expected_universe = oracle::conditions(t, cuts);
    REQUIRE(universe.size() == expected_universe.size());
    const auto all = oracle::enumerate_all(t, cuts, cfg.max_len);
    const auto mined = mine_k_optimal(t, cuts, cfg);
    for (int sign : {+1, -1}) {
        const auto expect = oracle::top_k(all, cfg.k, cfg.min_coverage, t.rows(), sign);
        const auto& got = sign > 0 ? mined.top_positive : mined.top_negative;
        REQUIRE(got.size() == expect.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].condition_ids == expect[i].ids);
            CHECK(got[i].absolute_coverage == expect[i].stats.count);
            CHECK(std::abs(got[i].impact - expect[i].stats.impact) <= 1e-9 * (1.0 + std::abs(expect[i].stats.impact)));
        }
    }
}

} // namespace

TEST_CASE("rule statistics") {
    const auto t = table_of({{1, 2}}, {10, 20});
    const auto all = evaluate_rule({}, t);
    CHECK(all.coverage == 1.0);
    CHECK(all.impact == doctest::Approx(0.0));

    const auto low = evaluate_rule({at_most(0, 1.5)}, t);
    CHECK(low.absolute_coverage == 1);
    CHECK(low.sum == 10.0);
    CHECK(low.dataset_mean == 15.0);
    CHECK(low.impact == doctest::Approx(-5.0));
    CHECK(low.mean == 10.0);

    const auto none = evaluate_rule({above(0, 5.0)}, t);
    CHECK(none.absolute_coverage == 0);
    CHECK(none.coverage == 0.0);
    CHECK(none.impact == 0.0);
}

TEST_CASE("rule statistics match a row-by-row filter") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::vector<double>> cols(3, std::vector<double>(50));
    std::vector<double> y(50);
    for (auto& c : cols)
        for (auto& v : c) v = n(rng);
    for (auto& v : y) v = 100 + 10 * n(rng);
    const auto t = table_of(cols, y);
    const std::vector<Condition> lhs = {above(0, -0.3), at_most(2, 0.8)};
    const auto rule = evaluate_rule(lhs, t);
    const auto stats = oracle::evaluate({{0, 2, -0.3, 0.0}, {2, 0, 0.0, 0.8}}, t);
    CHECK(rule.absolute_coverage == stats.count);
    CHECK(rule.sum == doctest::Approx(stats.sum).epsilon(1e-12));
    CHECK(rule.impact == doctest::Approx(stats.impact).epsilon(1e-12));
    CHECK(rule.impact == doctest::Approx(rule.sum - rule.dataset_mean * static_cast<double>(rule.absolute_coverage)));
}

TEST_CASE("planted binary effect") {
    const auto t = table_of({{0, 0, 1, 1}}, {0, 0, 7, 7});
    const auto cuts = derive_cutpoints(t, 2);
    REQUIRE(cuts.boundaries[0] == std::vector<double>{0.5});
    const auto universe = condition_universe(t, cuts);
    REQUIRE(universe.size() == 2);
    MinerConfig cfg;
    cfg.k = 1;
    const auto r = mine_k_optimal(t, cuts, cfg);
    REQUIRE(r.top_positive.size() == 1);
    CHECK(r.top_positive[0].impact == doctest::Approx(7.0));
    CHECK(r.top_positive[0].lhs[0].form == ConditionForm::Above);
    CHECK(r.top_positive[0].lhs[0].low == 0.5);
    REQUIRE(r.top_negative.size() == 1);
    CHECK(r.top_negative[0].impact == doctest::Approx(-7.0));
}

TEST_CASE("full-coverage requirement leaves only zero-impact rules") {
    std::mt19937_64 rng(3);
    auto t = oracle::random_table(rng, 4, 80);
    MinerConfig cfg;
    cfg.min_coverage = 1.0;
    for (const auto& r : mine_k_optimal(t, derive_cutpoints(t, 3), cfg).combined()) {
        CHECK(r.coverage == 1.0);
        CHECK(std::abs(r.impact) <= 1e-9);
    }
}

TEST_CASE("search agrees with exhaustive enumeration") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const auto t = oracle::random_table(rng, 5, 200);
        MinerConfig cfg;
        cfg.k = 1 + static_cast<std::size_t>(trial % 7);
        cfg.max_len = 1 + static_cast<std::size_t>(trial % 3);
        cfg.min_coverage = trial % 2 ? 0.05 : 0.2;
        check_against_oracle(t, 2 + static_cast<std::size_t>(trial % 3), cfg);
    }
}

TEST_CASE("five features by three bins, rules up to three conditions") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::vector<double>> cols(5, std::vector<double>(200));
    std::vector<double> y(200);
    for (auto& c : cols)
        for (auto& v : c) v = n(rng);
    for (std::size_t r = 0; r < 200; ++r) y[r] = 3 * cols[0][r] - 2 * (cols[3][r] > 0.5) + n(rng);
    check_against_oracle(table_of(cols, y), 3, MinerConfig{});
}

TEST_CASE("optimistic bound") {
    const auto below = table_of({{1, 2, 3, 4}}, {1, 1, 1, 9});
    // Rows covered by f0 <= 3 all sit below the mean of 3.
    CHECK(optimistic_bound({at_most(0, 3.0)}, below, +1) == 0.0);

    const auto two = table_of({{1, 2, 3, 4}}, {13, 9, 10, 8});
    // mean 10; covered rows 13 and 9: max(0, 3) + max(0, -1)
    CHECK(optimistic_bound({at_most(0, 2.0)}, two, +1) == doctest::Approx(3.0));
    CHECK(optimistic_bound({at_most(0, 2.0)}, two, -1) == doctest::Approx(1.0));
}

TEST_CASE("optimistic bound is admissible over every refinement") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto t = oracle::random_table(rng, 4, 60);
        const auto cuts = derive_cutpoints(t, 3);
        const auto universe = condition_universe(t, cuts);
        const auto all = oracle::enumerate_all(t, cuts, 3);
        for (const auto& parent : all) {
            if (parent.ids.size() != 1) continue;
            const std::vector<Condition> lhs = {universe[parent.ids[0]]};
            const double up = optimistic_bound(lhs, t, +1), down = optimistic_bound(lhs, t, -1);
            for (const auto& child : all) {
                if (child.ids.empty() || child.ids[0] != parent.ids[0]) continue;
                CHECK(child.stats.impact <= up + 1e-9);
                CHECK(-child.stats.impact <= down + 1e-9);
            }
        }
    }
}

TEST_CASE("coverage is anti-monotone and impact shifts covariantly") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        auto t = oracle::random_table(rng, 4, 100);
        const auto cuts = derive_cutpoints(t, 3);
        const auto universe = condition_universe(t, cuts);
        if (universe.size() < 2) continue;
        std::uniform_int_distribution<std::size_t> pick(0, universe.size() - 1);
        const auto a = universe[pick(rng)], b = universe[pick(rng)];
        CHECK(evaluate_rule({a, b}, t).absolute_coverage <= evaluate_rule({a}, t).absolute_coverage);

        const auto before = evaluate_rule({a}, t);
        auto shifted = t;
        for (auto& y : shifted.targets) y += 123.25;
        const auto after = evaluate_rule({a}, shifted);
        CHECK(after.impact == doctest::Approx(before.impact).epsilon(1e-6));
        CHECK(after.dataset_mean == doctest::Approx(before.dataset_mean + 123.25));
    }
}

TEST_CASE("miner configuration and JSON") {
    MinerConfig bad;
    bad.k = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = MinerConfig{};
    bad.min_coverage = 1.5;
    CHECK_THROWS_AS(bad.validate(), Error);

    const auto t = table_of({{1, 2, 3, 4}}, {1, 2, 3, 4});
    const auto j = rule_to_json(evaluate_rule({above(0, 2.5)}, t));
    CHECK(j.contains("lhs"));
    CHECK(j["impact"].get<double>() == doctest::Approx(2.0));
    CHECK(j["lhs"][0]["form"] == "gt");
}
