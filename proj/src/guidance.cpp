#include "limref/guidance.hpp"

#include "limref/calendar.hpp"
#include "limref/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace limref {

namespace {

struct FeatureText {
    const char* label;
    const char* unit;
};

FeatureText feature_text(const std::string& name) {
    if (name == "mean_cons") {
        return {"mean consumption", "kWh"};
    }
    if (name == "max_cons") {
        return {"max consumption", "kWh"};
    }
    if (name == "min_cons") {
        return {"min consumption", "kWh"};
    }
    if (name == "temp") {
        return {"average temperature", "°C"};
    }
    return {nullptr, ""};
}

std::string describe_condition(const Condition& c) {
    const auto text = feature_text(c.feature_name);
    const std::string label = text.label != nullptr ? text.label : c.feature_name;
    if (c.feature_name == "month" && c.form == ConditionForm::Equals) {
        const auto m = static_cast<unsigned>(c.low);
        return fmt::format("month = {}", (m >= 1 && m <= 12) ? month_abbrev(m) : std::to_string(m));
    }
    switch (c.form) {
    case ConditionForm::AtMost:
        return fmt::format("{} <= {:.2f}{}", label, c.high, text.unit);
    case ConditionForm::Between:
        return fmt::format("{:.2f} < {} <= {:.2f}{}", c.low, label, c.high, text.unit);
    case ConditionForm::Above:
        return fmt::format("{} > {:.2f}{}", label, c.low, text.unit);
    case ConditionForm::Equals:
        return fmt::format("{} = {:.2f}{}", label, c.low, text.unit);
    }
    return label;
}

double population_sd(const std::vector<double>& values, double mean) {
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(values.size()));
}

} // namespace

const char* quadrant_name(Quadrant q) {
    switch (q) {
    case Quadrant::CurrentSupporting:
        return "CurrentSupporting";
    case Quadrant::CurrentContradicting1:
        return "CurrentContradicting1";
    case Quadrant::CurrentContradicting2:
        return "CurrentContradicting2";
    case Quadrant::HypotheticallySupporting:
        return "HypotheticallySupporting";
    case Quadrant::HypotheticallyContradicting1:
        return "HypotheticallyContradicting1";
    case Quadrant::HypotheticallyContradicting2:
        return "HypotheticallyContradicting2";
    }
    return "?";
}

Quadrant quadrant_for(bool lhs_true, double x_tilde, double p, double delta) {
    if (x_tilde > p + delta) {
        return lhs_true ? Quadrant::CurrentContradicting1 : Quadrant::HypotheticallyContradicting1;
    }
    if (x_tilde < p - delta) {
        return lhs_true ? Quadrant::CurrentContradicting2 : Quadrant::HypotheticallyContradicting2;
    }
    return lhs_true ? Quadrant::CurrentSupporting : Quadrant::HypotheticallySupporting;
}

std::optional<RuleClassification> classify_rule(const ImpactRule& rule, const SurrogateInstance& origin,
                                                const MiningTable& table, double p) {
    std::vector<double> covered;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        bool ok = true;
        for (const auto& c : rule.lhs) {
            if (!c.holds(table.columns[c.feature][r])) {
                ok = false;
                break;
            }
        }
        if (ok) {
            covered.push_back(table.targets[r]);
        }
    }
    if (covered.size() < 2) {
        return std::nullopt;
    }
    RuleClassification out;
    out.rule = rule;
    double sum = 0.0;
    for (double v : covered) {
        sum += v;
    }
    out.x_tilde = sum / static_cast<double>(covered.size());
    out.delta = population_sd(covered, out.x_tilde);
    out.lhs_true = rule.covers(origin.feature_values());
    out.rhs_true = p - out.delta <= out.x_tilde && out.x_tilde <= p + out.delta;
    out.quadrant = quadrant_for(out.lhs_true, out.x_tilde, p, out.delta);
    return out;
}

std::vector<RuleClassification> classify_rules(const std::vector<ImpactRule>& rules, const SurrogateInstance& origin,
                                               const MiningTable& table, double p, std::vector<std::string>* log) {
    std::vector<RuleClassification> out;
    for (const auto& rule : rules) {
        if (auto c = classify_rule(rule, origin, table, p)) {
            out.push_back(std::move(*c));
        } else if (log != nullptr) {
            log->push_back("rule '" + describe_lhs(rule.lhs) + "' covers fewer than 2 instances; skipped");
        }
    }
    return out;
}

GuidanceReport select_guidance(const std::vector<RuleClassification>& classified, std::string meter_id,
                               unsigned target_month, double p) {
    GuidanceReport report;
    report.meter_id = std::move(meter_id);
    report.target_month = target_month;
    report.p = p;
    auto better = [](const RuleClassification& a, const RuleClassification& b) {
        const double ia = std::abs(a.rule.impact);
        const double ib = std::abs(b.rule.impact);
        if (ia != ib) {
            return ia > ib;
        }
        if (a.rule.absolute_coverage != b.rule.absolute_coverage) {
            return a.rule.absolute_coverage > b.rule.absolute_coverage;
        }
        return a.rule.lhs.size() < b.rule.lhs.size();
    };
    for (const auto& c : classified) {
        auto& slot = report.guidance[guidance_index(c.quadrant)];
        if (!slot || better(c, *slot)) {
            slot = c;
        }
    }
    return report;
}

std::string describe_lhs(const std::vector<Condition>& lhs) {
    std::string out;
    for (const auto& c : lhs) {
        if (!out.empty()) {
            out += " & ";
        }
        out += describe_condition(c);
    }
    return out;
}

std::vector<std::string> render(const GuidanceReport& report) {
    std::vector<std::string> lines;
    for (std::size_t g = 0; g < kQuadrantCount; ++g) {
        const auto& slot = report.guidance[g];
        if (!slot) {
            lines.push_back(fmt::format("G{}: no rule found.", g + 1));
            continue;
        }
        const std::string lhs = describe_lhs(slot->rule.lhs);
        const double magnitude = std::abs(slot->x_tilde - report.p);
        switch (slot->quadrant) {
        case Quadrant::CurrentSupporting:
            lines.push_back(
                fmt::format("Your predicted consumption is {:.2f}kWh. Because you have {}.", report.p, lhs));
            break;
        case Quadrant::CurrentContradicting1:
            lines.push_back(fmt::format(
                "Your current conditions {} point to an increase of your consumption by {:.2f}kWh.", lhs, magnitude));
            break;
        case Quadrant::CurrentContradicting2:
            lines.push_back(fmt::format(
                "Your current conditions {} point to a decrease of your consumption by {:.2f}kWh.", lhs, magnitude));
            break;
        case Quadrant::HypotheticallySupporting:
            lines.push_back(fmt::format("To maintain your predicted consumption of {:.2f}kWh the conditions would be {}.",
                                        report.p, lhs));
            break;
        case Quadrant::HypotheticallyContradicting1:
            lines.push_back(fmt::format("If you have {} it will increase your consumption by {:.2f}kWh.", lhs, magnitude));
            break;
        case Quadrant::HypotheticallyContradicting2:
            lines.push_back(
                fmt::format("To reduce your consumption by {:.2f}kWh the conditions would be {}.", magnitude, lhs));
            break;
        }
    }
    return lines;
}

nlohmann::json report_to_json(const GuidanceReport& report) {
    nlohmann::json guidance = nlohmann::json::object();
    const auto lines = render(report);
    for (std::size_t g = 0; g < kQuadrantCount; ++g) {
        const auto key = fmt::format("G{}", g + 1);
        const auto& slot = report.guidance[g];
        if (!slot) {
            guidance[key] = nullptr;
            continue;
        }
        guidance[key] = {{"rule", rule_to_json(slot->rule)},
                         {"x_tilde", slot->x_tilde},
                         {"delta", slot->delta},
                         {"text", lines[g]}};
    }
    return {{"meter_id", report.meter_id}, {"month", report.target_month}, {"p_kwh", report.p}, {"guidance", guidance}};
}

std::string report_to_text(const GuidanceReport& report) {
    std::string out = fmt::format("meter {} | month {} | predicted {:.2f}kWh\n", report.meter_id,
                                  month_abbrev(report.target_month), report.p);
    const auto lines = render(report);
    for (std::size_t g = 0; g < kQuadrantCount; ++g) {
        const auto& slot = report.guidance[g];
        if (slot) {
            out += fmt::format("  G{} [{}] {}\n", g + 1, quadrant_name(slot->quadrant), lines[g]);
        } else {
            out += fmt::format("  G{} [{}] no rule found.\n", g + 1, quadrant_name(static_cast<Quadrant>(g)));
        }
    }
    return out;
}

} // namespace limref
