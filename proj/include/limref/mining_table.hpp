#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace limref {

enum class FeatureKind { Numeric, Categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
};

// Column-major table with a numeric target, the input of rule mining.
struct MiningTable {
    std::vector<FeatureSpec> features;
    std::vector<std::vector<double>> columns; // columns[feature][row]
    std::vector<double> targets;

    std::size_t rows() const { return targets.size(); }
    std::size_t feature_count() const { return features.size(); }
    void validate() const;
};

// Per numeric feature: strictly increasing bin boundaries. Per categorical
// feature: the distinct levels, ascending. An empty list means the feature is
// not used in conditions.
struct CutPoints {
    std::vector<std::vector<double>> boundaries;
    std::vector<std::string> dropped; // log of unused features with the reason
};

// Empirical quantile with linear interpolation between order statistics
// (position (n-1)q in the sorted sample).
double empirical_quantile(const std::vector<double>& sorted, double q);

// Numeric boundaries at quantiles k/bins, k = 1..bins-1, deduplicated;
// categorical features contribute their levels when there are at least two.
CutPoints derive_cutpoints(const MiningTable& table, std::size_t bins_per_feature);

} // namespace limref
