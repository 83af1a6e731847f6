#pragma once

#include "limref/mining_table.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace limref {

enum class ConditionForm {
    AtMost,  // x <= high
    Between, // low < x <= high
    Above,   // x > low
    Equals,  // x == low (categorical)
};

struct Condition {
    std::size_t feature = 0;
    std::string feature_name;
    ConditionForm form = ConditionForm::AtMost;
    double low = 0.0;
    double high = 0.0;

    bool holds(double value) const;
    bool operator==(const Condition&) const = default;
};

const char* form_name(ConditionForm form);

struct ImpactRule {
    std::vector<Condition> lhs;
    std::vector<std::size_t> condition_ids; // positions in the condition universe; orders ties
    double coverage = 0.0;
    std::size_t absolute_coverage = 0;
    double mean = 0.0;
    double sum = 0.0;
    double impact = 0.0;
    double dataset_mean = 0.0;

    // True when every condition holds on a row given as per-feature values.
    template <typename Values>
    bool covers(const Values& values) const {
        for (const auto& c : lhs) {
            if (!c.holds(values[c.feature])) {
                return false;
            }
        }
        return true;
    }
};

struct MinerConfig {
    std::size_t k = 5;
    std::size_t max_len = 3;
    double min_coverage = 0.05;

    void validate() const;
};

// All single-feature conditions implied by the cut points, ordered by feature
// then form. For a numeric feature with boundaries b1 < ... < bm this is every
// union of adjacent bins except the full range.
std::vector<Condition> condition_universe(const MiningTable& table, const CutPoints& cuts);

// Statistics over the rows satisfying every condition in `lhs`. The impact is
// measured against the table-wide target mean.
ImpactRule evaluate_rule(const std::vector<Condition>& lhs, const MiningTable& table);

// Upper bound on the signed impact of any refinement of `lhs` (sign +1 for the
// positive search, -1 for the negative search, where the bound is on -impact).
double optimistic_bound(const std::vector<Condition>& lhs, const MiningTable& table, int sign);

struct MiningResult {
    std::vector<ImpactRule> top_positive; // impact descending
    std::vector<ImpactRule> top_negative; // impact ascending
    std::size_t nodes_visited = 0;

    // Positive rules followed by negative rules not already listed.
    std::vector<ImpactRule> combined() const;
};

// True when `a` ranks ahead of `b` for the search with the given sign: larger
// signed impact, then shorter lhs, then lexicographically smaller condition ids.
bool ranks_before(const ImpactRule& a, const ImpactRule& b, int sign);

// Exact k-optimal impact rule search: depth-first over conjunctions with at
// most one condition per feature, pruned by coverage anti-monotonicity and the
// admissible optimistic bound.
MiningResult mine_k_optimal(const MiningTable& table, const CutPoints& cuts, const MinerConfig& cfg);

nlohmann::json rule_to_json(const ImpactRule& rule);

} // namespace limref
