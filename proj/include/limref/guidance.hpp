#pragma once

#include "limref/impact_miner.hpp"
#include "limref/surrogate.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace limref {

enum class Quadrant {
    CurrentSupporting,            // G1
    CurrentContradicting1,        // G2: lhs holds, covered forecasts above the band
    CurrentContradicting2,        // G3: lhs holds, covered forecasts below the band
    HypotheticallySupporting,     // G4
    HypotheticallyContradicting1, // G5
    HypotheticallyContradicting2, // G6
};

inline constexpr std::size_t kQuadrantCount = 6;

const char* quadrant_name(Quadrant q);
inline std::size_t guidance_index(Quadrant q) { return static_cast<std::size_t>(q); }

// The quadrant of a rule from the lhs truth on the explained instance and the
// position of x_tilde relative to the closed band [p - delta, p + delta].
Quadrant quadrant_for(bool lhs_true, double x_tilde, double p, double delta);

struct RuleClassification {
    ImpactRule rule;
    bool lhs_true = false;
    double x_tilde = 0.0; // mean target of covered instances, kWh
    double delta = 0.0;   // population standard deviation of covered targets
    bool rhs_true = false;
    Quadrant quadrant = Quadrant::CurrentSupporting;
};

// std::nullopt when the rule covers fewer than two instances of the table.
std::optional<RuleClassification> classify_rule(const ImpactRule& rule, const SurrogateInstance& origin,
                                                const MiningTable& table, double p);

// Classifies every rule; rules with coverage < 2 are dropped and noted in `log`.
std::vector<RuleClassification> classify_rules(const std::vector<ImpactRule>& rules, const SurrogateInstance& origin,
                                               const MiningTable& table, double p,
                                               std::vector<std::string>* log = nullptr);

struct GuidanceReport {
    std::string meter_id;
    unsigned target_month = 1;
    double p = 0.0;
    std::array<std::optional<RuleClassification>, kQuadrantCount> guidance;
};

// Per quadrant, the rule with the largest |impact|; ties go to higher coverage,
// then shorter lhs.
GuidanceReport select_guidance(const std::vector<RuleClassification>& classified, std::string meter_id = {},
                               unsigned target_month = 1, double p = 0.0);

// Human-readable form of a conjunction, e.g. "mean consumption > 14.74kWh".
std::string describe_lhs(const std::vector<Condition>& lhs);

// One sentence per guidance type G1..G6, in order.
std::vector<std::string> render(const GuidanceReport& report);

nlohmann::json report_to_json(const GuidanceReport& report);
std::string report_to_text(const GuidanceReport& report);

} // namespace limref
