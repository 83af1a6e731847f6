#pragma once

// Independent reference computations used by the unit and acceptance suites.
// Nothing here calls into the code paths it checks.

#include "limref/impact_miner.hpp"
#include "limref/mining_table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Full O(n*m) DTW matrix, squared cost, symmetric unit steps, no band.
inline double dtw_full(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size(), m = b.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> d(n + 1, std::vector<double>(m + 1, inf));
    d[0][0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const double c = (a[i - 1] - b[j - 1]) * (a[i - 1] - b[j - 1]);
            d[i][j] = c + std::min({d[i - 1][j], d[i][j - 1], d[i - 1][j - 1]});
        }
    }
    return d[n][m];
}

inline std::vector<double> divide_by_mean(std::vector<double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    const double mean = s / static_cast<double>(x.size());
    for (auto& v : x) v /= mean;
    return x;
}

struct Cond {
    std::size_t feature;
    int form; // 0 <=, 1 between, 2 >, 3 ==
    double low, high;
    bool holds(double v) const {
        switch (form) {
        case 0: return v <= high;
        case 1: return v > low && v <= high;
        case 2: return v > low;
        default: return v == low;
        }
    }
};

// Same ordering contract as the production universe: per feature, all "<= b",
// then "b_i < x <= b_j" (i < j), then "> b"; categorical levels ascending.
inline std::vector<Cond> conditions(const limref::MiningTable& t, const limref::CutPoints& cuts) {
    std::vector<Cond> out;
    for (std::size_t f = 0; f < t.feature_count(); ++f) {
        const auto& b = cuts.boundaries[f];
        if (t.features[f].kind == limref::FeatureKind::Categorical) {
            for (double v : b) out.push_back({f, 3, v, v});
            continue;
        }
        for (double v : b) out.push_back({f, 0, 0.0, v});
        for (std::size_t i = 0; i < b.size(); ++i)
            for (std::size_t j = i + 1; j < b.size(); ++j) out.push_back({f, 1, b[i], b[j]});
        for (double v : b) out.push_back({f, 2, v, 0.0});
    }
    return out;
}

struct Stats {
    std::size_t count = 0;
    double sum = 0.0;
    double impact = 0.0;
};

inline double target_mean(const limref::MiningTable& t) {
    double s = 0.0;
    for (std::size_t r = 0; r < t.rows(); ++r) s += t.targets[r];
    return s / static_cast<double>(t.rows());
}

// Row-by-row filter and fold.
inline Stats evaluate(const std::vector<Cond>& lhs, const limref::MiningTable& t) {
    Stats s;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        bool ok = true;
        for (const auto& c : lhs) ok = ok && c.holds(t.columns[c.feature][r]);
        if (ok) {
            s.sum += t.targets[r];
            ++s.count;
        }
    }
    s.impact = s.count == 0 ? 0.0 : s.sum - target_mean(t) * static_cast<double>(s.count);
    return s;
}

struct Candidate {
    std::vector<std::size_t> ids;
    Stats stats;
};

// Every conjunction of length <= max_len with at most one condition per feature.
inline std::vector<Candidate> enumerate_all(const limref::MiningTable& t, const limref::CutPoints& cuts,
                                            std::size_t max_len) {
    const auto conds = conditions(t, cuts);
    std::vector<Candidate> out;
    std::vector<std::size_t> ids;
    auto rec = [&](auto&& self, std::size_t start) -> void {
        for (std::size_t c = start; c < conds.size(); ++c) {
            if (!ids.empty() && conds[ids.back()].feature >= conds[c].feature) continue;
            ids.push_back(c);
            std::vector<Cond> lhs;
            for (auto i : ids) lhs.push_back(conds[i]);
            out.push_back({ids, evaluate(lhs, t)});
            if (ids.size() < max_len) self(self, c + 1);
            ids.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

// Top-k by signed impact, then shorter lhs, then lexicographic ids.
inline std::vector<Candidate> top_k(std::vector<Candidate> all, std::size_t k, double min_coverage, std::size_t rows,
                                    int sign) {
    std::vector<Candidate> ok;
    for (auto& c : all) {
        if (c.stats.count > 0 && static_cast<double>(c.stats.count) / static_cast<double>(rows) >= min_coverage - 1e-12)
            ok.push_back(std::move(c));
    }
    std::sort(ok.begin(), ok.end(), [&](const Candidate& a, const Candidate& b) {
        const double sa = sign * a.stats.impact, sb = sign * b.stats.impact;
        if (sa != sb) return sa > sb;
        if (a.ids.size() != b.ids.size()) return a.ids.size() < b.ids.size();
        return a.ids < b.ids;
    });
    if (ok.size() > k) ok.resize(k);
    return ok;
}

// Random mining table: up to max_features numeric features (some with few
// distinct levels to force ties), optional categorical last feature.
inline limref::MiningTable random_table(std::mt19937_64& rng, std::size_t max_features, std::size_t max_rows) {
    std::uniform_int_distribution<std::size_t> nf(1, max_features), nr(20, max_rows);
    const std::size_t features = nf(rng), rows = nr(rng);
    limref::MiningTable t;
    std::uniform_int_distribution<int> coin(0, 3), level(0, 4), cat(1, 4), target_int(0, 40);
    std::normal_distribution<double> normal(0.0, 1.0);
    const bool integer_targets = coin(rng) < 2;
    for (std::size_t f = 0; f < features; ++f) {
        const bool categorical = (f + 1 == features) && coin(rng) == 0;
        const bool discrete = coin(rng) == 0;
        t.features.push_back({"f" + std::to_string(f),
                              categorical ? limref::FeatureKind::Categorical : limref::FeatureKind::Numeric});
        std::vector<double> col(rows);
        for (auto& v : col) v = categorical ? cat(rng) : discrete ? level(rng) : normal(rng);
        t.columns.push_back(std::move(col));
    }
    for (std::size_t r = 0; r < rows; ++r) {
        double y = integer_targets ? target_int(rng) : 10.0 * normal(rng);
        if (t.columns[0][r] > 0.5) y += 5.0; // mild planted effect
        t.targets.push_back(y);
    }
    return t;
}

// Minimizer of sum_i w_i (y_i - m)^2 over a grid, w = tau above, 1 - tau below.
inline double expectile_grid(const std::vector<double>& y, double tau, double lo, double hi, std::size_t steps) {
    double best_m = lo, best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s <= steps; ++s) {
        const double m = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(steps);
        double loss = 0.0;
        for (double v : y) {
            const double r = v - m;
            loss += (r >= 0 ? tau : 1 - tau) * r * r;
        }
        if (loss < best_loss) {
            best_loss = loss;
            best_m = m;
        }
    }
    return best_m;
}

} // namespace oracle
