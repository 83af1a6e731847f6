#include <doctest.h>

#include "limref/guidance.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace limref;

namespace {

Condition mean_cons_above(double v) { return {0, "mean_cons", ConditionForm::Above, v, 0.0}; }

SurrogateInstance origin_with(double mean_cons, unsigned month = 2) {
    SurrogateInstance o;
    o.mean_cons = mean_cons;
    o.max_cons = mean_cons * 2;
    o.min_cons = 0.0;
    o.temp = 6.0;
    o.month = month;
    return o;
}

MiningTable one_feature_table(std::vector<double> x, std::vector<double> y) {
    MiningTable t;
    t.features = {{"mean_cons", FeatureKind::Numeric}};
    t.columns = {std::move(x)};
    t.targets = std::move(y);
    return t;
}

RuleClassification classified(Quadrant q, double impact, double coverage, std::size_t len, double x_tilde = 0.0) {
    RuleClassification c;
    c.quadrant = q;
    c.rule.impact = impact;
    c.rule.coverage = coverage;
    c.rule.absolute_coverage = static_cast<std::size_t>(coverage * 100);
    for (std::size_t i = 0; i < len; ++i) c.rule.lhs.push_back(mean_cons_above(static_cast<double>(i)));
    c.x_tilde = x_tilde;
    return c;
}

} // namespace

TEST_CASE("worked supporting rule") {
    // Covered targets straddle p so that x_tilde sits inside the band.
    const auto t = one_feature_table({10, 12, 15, 16, 18, 20}, {300, 320, 540, 600, 560, 580});
    const auto rule = evaluate_rule({mean_cons_above(14.74)}, t);
    const auto c = classify_rule(rule, origin_with(16.22), t, 568.93);
    REQUIRE(c.has_value());
    CHECK(c->lhs_true);
    CHECK(c->rhs_true);
    CHECK(c->quadrant == Quadrant::CurrentSupporting);
    CHECK(c->x_tilde == doctest::Approx(570.0));

    GuidanceReport report = select_guidance({*c}, "M", 2, 568.93);
    CHECK(render(report)[0] == "Your predicted consumption is 568.93kWh. Because you have mean consumption > 14.74kWh.");
}

TEST_CASE("x_tilde at the forecast is always inside the band") {
    const auto t = one_feature_table({1, 2, 3, 4}, {50, 50, 70, 30});
    const auto rule = evaluate_rule({mean_cons_above(2.5)}, t);
    const auto c = classify_rule(rule, origin_with(1.0), t, 50.0);
    REQUIRE(c.has_value());
    CHECK_FALSE(c->lhs_true);
    CHECK(c->x_tilde == 50.0);
    CHECK(c->quadrant == Quadrant::HypotheticallySupporting);
}

TEST_CASE("hand-computed mean and spread below the band") {
    std::vector<double> x(10, 1.0), y;
    for (int i = 0; i < 5; ++i) {
        y.push_back(35.0);
        y.push_back(45.0);
    }
    const auto t = one_feature_table(x, y);
    const auto rule = evaluate_rule({mean_cons_above(0.5)}, t);
    const auto c = classify_rule(rule, origin_with(1.0), t, 50.0);
    REQUIRE(c.has_value());
    CHECK(c->x_tilde == doctest::Approx(40.0));
    CHECK(c->delta == doctest::Approx(5.0));
    CHECK_FALSE(c->rhs_true);
    CHECK(c->quadrant == Quadrant::CurrentContradicting2);
}

TEST_CASE("band edges and degenerate spread") {
    CHECK(quadrant_for(true, 55.0, 50.0, 5.0) == Quadrant::CurrentSupporting);
    CHECK(quadrant_for(true, 45.0, 50.0, 5.0) == Quadrant::CurrentSupporting);
    CHECK(quadrant_for(true, 55.0001, 50.0, 5.0) == Quadrant::CurrentContradicting1);
    CHECK(quadrant_for(false, 44.9, 50.0, 5.0) == Quadrant::HypotheticallyContradicting2);
    CHECK(quadrant_for(false, 50.0, 50.0, 0.0) == Quadrant::HypotheticallySupporting);
    CHECK(quadrant_for(false, 50.1, 50.0, 0.0) == Quadrant::HypotheticallyContradicting1);
}

TEST_CASE("rules covering fewer than two instances are dropped") {
    const auto t = one_feature_table({1, 2, 3}, {1, 2, 3});
    const auto rule = evaluate_rule({mean_cons_above(2.5)}, t);
    CHECK_FALSE(classify_rule(rule, origin_with(1.0), t, 2.0).has_value());
    std::vector<std::string> log;
    CHECK(classify_rules({rule}, origin_with(1.0), t, 2.0, &log).empty());
    CHECK(log.size() == 1);
}

TEST_CASE("partition and consistency on random rules") {
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> u(-100.0, 100.0), sd(0.0, 30.0);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 2000; ++i) {
        const double p = u(rng), x = u(rng), d = i % 50 == 0 ? 0.0 : sd(rng);
        const bool lhs = coin(rng);
        const auto q = quadrant_for(lhs, x, p, d);
        const bool in = p - d <= x && x <= p + d;
        const bool above = x > p + d, below = x < p - d;
        CHECK(int(in) + int(above) + int(below) == 1);
        const auto flipped = quadrant_for(!lhs, x, p, d);
        CHECK(guidance_index(q) % 3 == guidance_index(flipped) % 3);
        CHECK((guidance_index(q) < 3) == lhs);
        CHECK((guidance_index(q) % 3 == 0) == in);
        CHECK((guidance_index(q) % 3 == 1) == above);
    }
}

TEST_CASE("selection keeps the strongest rule per quadrant") {
    const auto a = classified(Quadrant::CurrentSupporting, 5.0, 0.2, 1);
    const auto b = classified(Quadrant::CurrentSupporting, 9.0, 0.1, 2);
    const auto report = select_guidance({a, b});
    REQUIRE(report.guidance[0].has_value());
    CHECK(report.guidance[0]->rule.impact == 9.0);
    for (std::size_t g = 1; g < kQuadrantCount; ++g) CHECK_FALSE(report.guidance[g].has_value());

    const auto tie_low = classified(Quadrant::HypotheticallyContradicting2, -4.0, 0.1, 1);
    const auto tie_high = classified(Quadrant::HypotheticallyContradicting2, 4.0, 0.3, 2);
    const auto tie_short = classified(Quadrant::HypotheticallyContradicting2, -4.0, 0.3, 1);
    const auto r2 = select_guidance({tie_low, tie_high, tie_short});
    CHECK(r2.guidance[5]->rule.coverage == 0.3);
    CHECK(r2.guidance[5]->rule.lhs.size() == 1);

    const auto empty = select_guidance({});
    for (const auto& slot : empty.guidance) CHECK_FALSE(slot.has_value());
}

TEST_CASE("selection equals a per-quadrant linear scan") {
    std::mt19937_64 rng(71);
    std::uniform_int_distribution<int> quad(0, 5), len(1, 3), imp(-20, 20), cov(1, 9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<RuleClassification> rules;
        for (int i = 0; i < 25; ++i)
            rules.push_back(classified(static_cast<Quadrant>(quad(rng)), imp(rng), cov(rng) / 10.0, len(rng)));
        const auto report = select_guidance(rules);
        for (std::size_t g = 0; g < kQuadrantCount; ++g) {
            const RuleClassification* best = nullptr;
            for (const auto& r : rules) {
                if (guidance_index(r.quadrant) != g) continue;
                if (best == nullptr) {
                    best = &r;
                    continue;
                }
                const double a = std::abs(r.rule.impact), b = std::abs(best->rule.impact);
                if (a > b || (a == b && (r.rule.coverage > best->rule.coverage ||
                                         (r.rule.coverage == best->rule.coverage && r.rule.lhs.size() < best->rule.lhs.size()))))
                    best = &r;
            }
            REQUIRE(report.guidance[g].has_value() == (best != nullptr));
            if (best) {
                CHECK(std::abs(report.guidance[g]->rule.impact) == std::abs(best->rule.impact));
                CHECK(report.guidance[g]->rule.coverage == best->rule.coverage);
                CHECK(report.guidance[g]->rule.lhs.size() == best->rule.lhs.size());
            }
        }
    }
}

TEST_CASE("rendering") {
    GuidanceReport report;
    report.p = 568.93;
    auto g6 = classified(Quadrant::HypotheticallyContradicting2, -50, 0.2, 0, report.p - 216.6);
    g6.rule.lhs = {{3, "temp", ConditionForm::Between, 5.95, 6.01}};
    report.guidance[5] = g6;
    auto g5 = classified(Quadrant::HypotheticallyContradicting1, 50, 0.2, 0, report.p + 110.64);
    g5.rule.lhs = {{4, "month", ConditionForm::Equals, 2, 2}};
    report.guidance[4] = g5;
    const auto lines = render(report);
    REQUIRE(lines.size() == 6);
    CHECK(lines[5].find("reduce your consumption by 216.60kWh") != std::string::npos);
    CHECK(lines[5].find("5.95 < average temperature <= 6.01°C") != std::string::npos);
    CHECK(lines[4] == "If you have month = Feb it will increase your consumption by 110.64kWh.");
    for (std::size_t g = 0; g < 4; ++g) CHECK(lines[g].find("no rule found") != std::string::npos);

    for (const auto& line : render(GuidanceReport{})) CHECK(line.find("no rule found") != std::string::npos);
}

TEST_CASE("rendering distinguishes distinct rules") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    std::vector<std::string> seen;
    for (int i = 0; i < 50; ++i) {
        GuidanceReport report;
        report.p = 100.0;
        auto c = classified(Quadrant::CurrentSupporting, 1.0, 0.5, 0, 100.0);
        c.rule.lhs = {mean_cons_above(std::round(u(rng) * 100.0) / 100.0 + 0.001 * i)};
        report.guidance[0] = c;
        seen.push_back(render(report)[0] + describe_lhs(c.rule.lhs));
    }
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("report JSON layout") {
    GuidanceReport report;
    report.meter_id = "M0001";
    report.target_month = 2;
    report.p = 12.5;
    report.guidance[0] = classified(Quadrant::CurrentSupporting, 1.0, 0.5, 1, 12.0);
    const auto j = report_to_json(report);
    CHECK(j["meter_id"] == "M0001");
    CHECK(j["month"] == 2);
    CHECK(j["p_kwh"].get<double>() == 12.5);
    CHECK(j["guidance"]["G1"].is_object());
    CHECK(j["guidance"]["G1"].contains("text"));
    CHECK(j["guidance"]["G6"].is_null());
    CHECK(report_to_text(report).find("M0001") != std::string::npos);
}
