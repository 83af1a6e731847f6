#pragma once

#include "limref/guidance.hpp"
#include "limref/impact_miner.hpp"
#include "limref/mining_table.hpp"

#include <Eigen/Dense>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace limref {

// --- LR explainer -------------------------------------------------------------

struct LinearExplainer {
    std::vector<std::string> feature_names;
    std::vector<double> feature_means;
    std::vector<double> feature_sds;          // population form; 0 marks an unused constant column
    std::vector<double> standardized_coefficients;
    std::vector<double> coefficients;         // original feature scale
    double intercept = 0.0;
    double penalty = 0.0;

    double predict(std::span<const double> values) const;
};

// Ridge on standardized features at a fixed penalty; the intercept is not
// penalized. Every feature is used as a numeric column.
LinearExplainer fit_ridge(const MiningTable& table, double penalty);

// 10 penalties 1e-6 .. 1e3 (log spaced).
std::vector<double> default_penalty_grid();

// Penalty chosen by 5-fold (row index mod 5) cross-validated squared error.
LinearExplainer fit_linear_explainer(const MiningTable& table,
                                     const std::vector<double>& penalty_grid = default_penalty_grid());

// --- DT explainer -------------------------------------------------------------

struct TreeNode {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0; // rows with value <= threshold go left
    std::size_t left = 0;
    std::size_t right = 0;
    double value = 0.0;     // mean target of the node's rows
    std::size_t rows = 0;
    std::size_t depth = 0;
    double sse_reduction = 0.0;
};

struct TreeExplainer {
    std::vector<std::string> feature_names;
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double predict(std::span<const double> values) const;
    std::size_t depth() const;
    std::size_t leaf_count() const;
};

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double sse_reduction = 0.0;
};

// Exact best variance-reduction split of `rows` with both sides >= min_leaf.
SplitChoice best_split(const MiningTable& table, const std::vector<std::size_t>& rows, std::size_t min_leaf);

TreeExplainer fit_tree_explainer(const MiningTable& table, std::size_t max_depth = 4, std::size_t min_leaf = 20);

// --- LIMREF point prediction --------------------------------------------------

// x_tilde of the highest-|impact| rule whose lhs holds on `values`; the
// fallback is the table-wide target mean.
double limref_predict(const std::vector<RuleClassification>& rules, std::span<const double> values,
                      double table_mean);
double limref_predict(const std::vector<ImpactRule>& rules, std::span<const double> values, double table_mean);

// --- metrics ------------------------------------------------------------------

enum class MetricMode { Fidelity, Accuracy };

const char* metric_mode_name(MetricMode mode);

struct EvalRecord {
    std::string meter_id;
    unsigned month = 1;
    double prediction = 0.0;  // explainer output, kWh
    double gfm_forecast = 0.0;
    double actual = 0.0;
};

struct Metrics {
    double rae = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
};

Metrics metrics(const std::vector<EvalRecord>& records, MetricMode mode);

// --- feature importance -------------------------------------------------------

// |standardized coefficient| per feature.
std::vector<double> feature_importance(const LinearExplainer& lr);
// Variance reduction per feature, normalized to sum to 1 (all zero without splits).
std::vector<double> feature_importance(const TreeExplainer& tree);
// Per quadrant, the fraction of its rules whose lhs mentions each feature.
std::array<std::vector<double>, kQuadrantCount> feature_usage(const std::vector<RuleClassification>& rules,
                                                              std::size_t feature_count);

// --- global explainers --------------------------------------------------------

struct ExplainerSettings {
    std::size_t bins = 3;
    MinerConfig miner;
    std::size_t tree_max_depth = 4;
    std::size_t tree_min_leaf = 20;
};

struct GlobalExplainers {
    LinearExplainer lr;
    TreeExplainer dt;
    MiningResult rules;
    std::vector<EvalRecord> lr_records;
    std::vector<EvalRecord> dt_records;
    std::vector<EvalRecord> limref_records;
};

// Fits LR, DT and LIMREF once on `table` (one row per meter-month of the real
// series) and predicts every row. `meter_ids`, `months` and `actuals` run
// parallel to the table rows; the table target is the GFM forecast.
GlobalExplainers global_explainers(const MiningTable& table, const std::vector<std::string>& meter_ids,
                                   const std::vector<unsigned>& months, const std::vector<double>& actuals,
                                   const ExplainerSettings& settings);

} // namespace limref
