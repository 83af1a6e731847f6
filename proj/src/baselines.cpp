#include "limref/baselines.hpp"

#include "limref/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace limref {

namespace {

struct Standardized {
    Eigen::MatrixXd z;
    Eigen::VectorXd centered_y;
    std::vector<double> means;
    std::vector<double> sds;
    double y_mean = 0.0;
};

Standardized standardize(const MiningTable& table, const std::vector<std::size_t>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(table.feature_count());
    Standardized s;
    s.z.resize(n, p);
    s.centered_y.resize(n);
    s.means.assign(table.feature_count(), 0.0);
    s.sds.assign(table.feature_count(), 0.0);
    for (Eigen::Index f = 0; f < p; ++f) {
        const auto& col = table.columns[static_cast<std::size_t>(f)];
        double mean = 0.0;
        for (auto r : rows) {
            mean += col[r];
        }
        mean /= static_cast<double>(rows.size());
        double ss = 0.0;
        for (auto r : rows) {
            ss += (col[r] - mean) * (col[r] - mean);
        }
        double sd = std::sqrt(ss / static_cast<double>(rows.size()));
        const double tol = 1e-12 * std::max(1.0, std::abs(mean));
        if (!(sd > tol)) {
            sd = 0.0;
        }
        s.means[static_cast<std::size_t>(f)] = mean;
        s.sds[static_cast<std::size_t>(f)] = sd;
        for (Eigen::Index i = 0; i < n; ++i) {
            s.z(i, f) = sd > 0.0 ? (col[rows[static_cast<std::size_t>(i)]] - mean) / sd : 0.0;
        }
    }
    for (auto r : rows) {
        s.y_mean += table.targets[r];
    }
    s.y_mean /= static_cast<double>(rows.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        s.centered_y(i) = table.targets[rows[static_cast<std::size_t>(i)]] - s.y_mean;
    }
    return s;
}

LinearExplainer fit_ridge_rows(const MiningTable& table, const std::vector<std::size_t>& rows, double penalty) {
    const Standardized s = standardize(table, rows);
    const auto p = static_cast<Eigen::Index>(table.feature_count());
    Eigen::MatrixXd a = s.z.transpose() * s.z;
    for (Eigen::Index f = 0; f < p; ++f) {
        // Constant columns are all zero in z; a unit diagonal pins their weight at 0.
        a(f, f) += s.sds[static_cast<std::size_t>(f)] > 0.0 ? penalty : 1.0;
    }
    const Eigen::VectorXd b = s.z.transpose() * s.centered_y;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    Eigen::VectorXd beta = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success || !beta.allFinite()) {
        fail_numeric("ridge normal equations could not be solved");
    }

    LinearExplainer lr;
    for (const auto& f : table.features) {
        lr.feature_names.push_back(f.name);
    }
    lr.feature_means = s.means;
    lr.feature_sds = s.sds;
    lr.penalty = penalty;
    lr.intercept = s.y_mean;
    for (Eigen::Index f = 0; f < p; ++f) {
        const double sd = s.sds[static_cast<std::size_t>(f)];
        const double std_coef = sd > 0.0 ? beta(f) : 0.0;
        const double coef = sd > 0.0 ? std_coef / sd : 0.0;
        lr.standardized_coefficients.push_back(std_coef);
        lr.coefficients.push_back(coef);
        lr.intercept -= coef * s.means[static_cast<std::size_t>(f)];
    }
    return lr;
}

std::vector<std::size_t> iota_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

double sse_of(double sum, double sum_sq, double n) { return n > 0 ? sum_sq - sum * sum / n : 0.0; }

void grow(TreeExplainer& tree, const MiningTable& table, std::vector<std::size_t> rows, std::size_t depth,
          std::size_t max_depth, std::size_t min_leaf) {
    const std::size_t id = tree.nodes.size();
    tree.nodes.push_back({});
    double sum = 0.0;
    for (auto r : rows) {
        sum += table.targets[r];
    }
    tree.nodes[id].value = sum / static_cast<double>(rows.size());
    tree.nodes[id].rows = rows.size();
    tree.nodes[id].depth = depth;
    if (depth >= max_depth || rows.size() < 2 * min_leaf) {
        return;
    }
    const SplitChoice split = best_split(table, rows, min_leaf);
    if (!split.found) {
        return;
    }
    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) {
        (table.columns[split.feature][r] <= split.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[id].leaf = false;
    tree.nodes[id].feature = split.feature;
    tree.nodes[id].threshold = split.threshold;
    tree.nodes[id].sse_reduction = split.sse_reduction;
    tree.nodes[id].left = tree.nodes.size();
    grow(tree, table, std::move(left_rows), depth + 1, max_depth, min_leaf);
    tree.nodes[id].right = tree.nodes.size();
    grow(tree, table, std::move(right_rows), depth + 1, max_depth, min_leaf);
}

template <typename Rule, typename Fn>
double best_covering(const std::vector<Rule>& rules, std::span<const double> values, double fallback, Fn&& rule_of,
                     auto&& x_tilde_of) {
    const Rule* best = nullptr;
    for (const auto& r : rules) {
        const ImpactRule& rule = rule_of(r);
        if (!rule.covers(values)) {
            continue;
        }
        if (best == nullptr) {
            best = &r;
            continue;
        }
        const ImpactRule& b = rule_of(*best);
        const double ia = std::abs(rule.impact);
        const double ib = std::abs(b.impact);
        if (ia > ib || (ia == ib && (rule.absolute_coverage > b.absolute_coverage ||
                                     (rule.absolute_coverage == b.absolute_coverage && rule.lhs.size() < b.lhs.size())))) {
            best = &r;
        }
    }
    return best == nullptr ? fallback : x_tilde_of(*best);
}

} // namespace

double LinearExplainer::predict(std::span<const double> values) const {
    double y = intercept;
    for (std::size_t f = 0; f < coefficients.size(); ++f) {
        y += coefficients[f] * values[f];
    }
    return y;
}

LinearExplainer fit_ridge(const MiningTable& table, double penalty) {
    table.validate();
    if (table.rows() == 0) {
        fail_input("fit_ridge: empty table");
    }
    return fit_ridge_rows(table, iota_rows(table.rows()), penalty);
}

std::vector<double> default_penalty_grid() {
    std::vector<double> grid;
    for (int e = -6; e <= 3; ++e) {
        grid.push_back(std::pow(10.0, e));
    }
    return grid;
}

LinearExplainer fit_linear_explainer(const MiningTable& table, const std::vector<double>& penalty_grid) {
    table.validate();
    if (table.rows() < 2 * table.feature_count() || table.rows() < 5) {
        fail_input("fit_linear_explainer: need at least twice as many rows as features");
    }
    if (penalty_grid.empty()) {
        fail_input("fit_linear_explainer: empty penalty grid");
    }
    const auto [lo, hi] = std::minmax_element(table.targets.begin(), table.targets.end());
    if (*lo == *hi) {
        LinearExplainer lr = fit_ridge(table, penalty_grid.front());
        std::fill(lr.coefficients.begin(), lr.coefficients.end(), 0.0);
        std::fill(lr.standardized_coefficients.begin(), lr.standardized_coefficients.end(), 0.0);
        lr.intercept = *lo;
        return lr;
    }

    constexpr std::size_t folds = 5;
    double best_error = std::numeric_limits<double>::infinity();
    double best_penalty = penalty_grid.front();
    for (double penalty : penalty_grid) {
        double error = 0.0;
        for (std::size_t k = 0; k < folds; ++k) {
            std::vector<std::size_t> train, held;
            for (std::size_t r = 0; r < table.rows(); ++r) {
                (r % folds == k ? held : train).push_back(r);
            }
            const LinearExplainer model = fit_ridge_rows(table, train, penalty);
            std::vector<double> values(table.feature_count());
            for (auto r : held) {
                for (std::size_t f = 0; f < values.size(); ++f) {
                    values[f] = table.columns[f][r];
                }
                const double e = model.predict(values) - table.targets[r];
                error += e * e;
            }
        }
        if (error < best_error) {
            best_error = error;
            best_penalty = penalty;
        }
    }
    return fit_ridge(table, best_penalty);
}

double TreeExplainer::predict(std::span<const double> values) const {
    std::size_t id = 0;
    while (!nodes[id].leaf) {
        id = values[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    }
    return nodes[id].value;
}

std::size_t TreeExplainer::depth() const {
    std::size_t d = 0;
    for (const auto& n : nodes) {
        d = std::max(d, n.depth);
    }
    return d;
}

std::size_t TreeExplainer::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

SplitChoice best_split(const MiningTable& table, const std::vector<std::size_t>& rows, std::size_t min_leaf) {
    SplitChoice best;
    const std::size_t n = rows.size();
    min_leaf = std::max<std::size_t>(min_leaf, 1);
    if (n < 2 * min_leaf) {
        return best;
    }
    double total = 0.0;
    double total_sq = 0.0;
    for (auto r : rows) {
        total += table.targets[r];
        total_sq += table.targets[r] * table.targets[r];
    }
    const double parent_sse = sse_of(total, total_sq, static_cast<double>(n));
    const double tol = 1e-12 * std::max(1.0, total_sq);
    std::vector<std::size_t> order = rows;
    for (std::size_t f = 0; f < table.feature_count(); ++f) {
        const auto& col = table.columns[f];
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return col[a] < col[b]; });
        double left = 0.0;
        double left_sq = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            const double y = table.targets[order[i - 1]];
            left += y;
            left_sq += y * y;
            if (i < min_leaf || n - i < min_leaf || !(col[order[i - 1]] < col[order[i]])) {
                continue;
            }
            const double gain = parent_sse - sse_of(left, left_sq, static_cast<double>(i)) -
                                sse_of(total - left, total_sq - left_sq, static_cast<double>(n - i));
            if (gain > tol && (!best.found || gain > best.sse_reduction)) {
                best = {true, f, 0.5 * (col[order[i - 1]] + col[order[i]]), gain};
            }
        }
    }
    return best;
}

TreeExplainer fit_tree_explainer(const MiningTable& table, std::size_t max_depth, std::size_t min_leaf) {
    table.validate();
    if (table.rows() == 0) {
        fail_input("fit_tree_explainer: empty table");
    }
    TreeExplainer tree;
    for (const auto& f : table.features) {
        tree.feature_names.push_back(f.name);
    }
    grow(tree, table, iota_rows(table.rows()), 0, max_depth, min_leaf);
    return tree;
}

double limref_predict(const std::vector<RuleClassification>& rules, std::span<const double> values, double table_mean) {
    return best_covering(
        rules, values, table_mean, [](const RuleClassification& r) -> const ImpactRule& { return r.rule; },
        [](const RuleClassification& r) { return r.x_tilde; });
}

double limref_predict(const std::vector<ImpactRule>& rules, std::span<const double> values, double table_mean) {
    return best_covering(
        rules, values, table_mean, [](const ImpactRule& r) -> const ImpactRule& { return r; },
        [](const ImpactRule& r) { return r.mean; });
}

const char* metric_mode_name(MetricMode mode) { return mode == MetricMode::Fidelity ? "fidelity" : "accuracy"; }

Metrics metrics(const std::vector<EvalRecord>& records, MetricMode mode) {
    if (records.size() < 2) {
        fail_input("metrics: need at least 2 records");
    }
    const auto reference = [&](const EvalRecord& r) { return mode == MetricMode::Fidelity ? r.gfm_forecast : r.actual; };
    double ref_mean = 0.0;
    for (const auto& r : records) {
        ref_mean += reference(r);
    }
    ref_mean /= static_cast<double>(records.size());
    double abs_err = 0.0;
    double sq_err = 0.0;
    double abs_dev = 0.0;
    for (const auto& r : records) {
        const double e = r.prediction - reference(r);
        abs_err += std::abs(e);
        sq_err += e * e;
        abs_dev += std::abs(reference(r) - ref_mean);
    }
    if (!(abs_dev > 0.0)) {
        fail_numeric("undefined RAE: reference values are constant");
    }
    const auto n = static_cast<double>(records.size());
    return {abs_err / abs_dev, std::sqrt(sq_err / n), abs_err / n};
}

std::vector<double> feature_importance(const LinearExplainer& lr) {
    std::vector<double> out;
    for (double c : lr.standardized_coefficients) {
        out.push_back(std::abs(c));
    }
    return out;
}

std::vector<double> feature_importance(const TreeExplainer& tree) {
    std::vector<double> out(tree.feature_names.size(), 0.0);
    double total = 0.0;
    for (const auto& n : tree.nodes) {
        if (!n.leaf) {
            out[n.feature] += n.sse_reduction;
            total += n.sse_reduction;
        }
    }
    if (total > 0.0) {
        for (auto& v : out) {
            v /= total;
        }
    }
    return out;
}

std::array<std::vector<double>, kQuadrantCount> feature_usage(const std::vector<RuleClassification>& rules,
                                                              std::size_t feature_count) {
    std::array<std::vector<double>, kQuadrantCount> usage;
    std::array<std::size_t, kQuadrantCount> counts{};
    for (auto& u : usage) {
        u.assign(feature_count, 0.0);
    }
    for (const auto& r : rules) {
        const auto q = guidance_index(r.quadrant);
        ++counts[q];
        std::vector<bool> seen(feature_count, false);
        for (const auto& c : r.rule.lhs) {
            if (c.feature < feature_count && !seen[c.feature]) {
                seen[c.feature] = true;
                usage[q][c.feature] += 1.0;
            }
        }
    }
    for (std::size_t q = 0; q < kQuadrantCount; ++q) {
        if (counts[q] > 0) {
            for (auto& v : usage[q]) {
                v /= static_cast<double>(counts[q]);
            }
        }
    }
    return usage;
}

GlobalExplainers global_explainers(const MiningTable& table, const std::vector<std::string>& meter_ids,
                                   const std::vector<unsigned>& months, const std::vector<double>& actuals,
                                   const ExplainerSettings& settings) {
    table.validate();
    if (meter_ids.size() != table.rows() || months.size() != table.rows() || actuals.size() != table.rows()) {
        fail_input("global_explainers: row metadata does not match the table");
    }
    GlobalExplainers g;
    g.lr = fit_linear_explainer(table);
    g.dt = fit_tree_explainer(table, settings.tree_max_depth, settings.tree_min_leaf);
    const CutPoints cuts = derive_cutpoints(table, settings.bins);
    g.rules = mine_k_optimal(table, cuts, settings.miner);
    const auto rules = g.rules.combined();

    double mean = 0.0;
    for (double t : table.targets) {
        mean += t;
    }
    mean /= static_cast<double>(table.rows());

    std::vector<double> values(table.feature_count());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t f = 0; f < values.size(); ++f) {
            values[f] = table.columns[f][r];
        }
        const EvalRecord base{meter_ids[r], months[r], 0.0, table.targets[r], actuals[r]};
        auto rec = base;
        rec.prediction = g.lr.predict(values);
        g.lr_records.push_back(rec);
        rec.prediction = g.dt.predict(values);
        g.dt_records.push_back(rec);
        rec.prediction = limref_predict(rules, values, mean);
        g.limref_records.push_back(rec);
    }
    return g;
}

} // namespace limref
