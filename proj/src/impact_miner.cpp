#include "limref/impact_miner.hpp"

#include "limref/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace limref {

namespace {

using Bits = std::vector<std::uint64_t>;

Bits all_rows(std::size_t n) {
    Bits b((n + 63) / 64, ~std::uint64_t{0});
    if (n % 64 != 0) {
        b.back() = (std::uint64_t{1} << (n % 64)) - 1;
    }
    return b;
}

std::size_t popcount(const Bits& b) {
    std::size_t c = 0;
    for (auto w : b) {
        c += static_cast<std::size_t>(std::popcount(w));
    }
    return c;
}

template <typename Fn>
void for_each_row(const Bits& b, Fn&& fn) {
    for (std::size_t w = 0; w < b.size(); ++w) {
        std::uint64_t word = b[w];
        while (word != 0) {
            const auto bit = static_cast<std::size_t>(std::countr_zero(word));
            fn(w * 64 + bit);
            word &= word - 1;
        }
    }
}

double table_mean(const MiningTable& table) {
    double s = 0.0;
    for (double t : table.targets) {
        s += t;
    }
    return table.rows() == 0 ? 0.0 : s / static_cast<double>(table.rows());
}

Bits cover_of(const std::vector<Condition>& lhs, const MiningTable& table) {
    Bits b = all_rows(table.rows());
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (const auto& c : lhs) {
            if (c.feature >= table.feature_count()) {
                fail_input("condition refers to unknown feature index");
            }
            if (!c.holds(table.columns[c.feature][r])) {
                b[r / 64] &= ~(std::uint64_t{1} << (r % 64));
                break;
            }
        }
    }
    return b;
}

// Fills the statistics of `rule` from its cover.
void fill_stats(ImpactRule& rule, const Bits& cover, const MiningTable& table, double mu) {
    double sum = 0.0;
    std::size_t count = 0;
    for_each_row(cover, [&](std::size_t r) {
        sum += table.targets[r];
        ++count;
    });
    rule.dataset_mean = mu;
    rule.absolute_coverage = count;
    if (count == 0) {
        rule.coverage = rule.mean = rule.sum = rule.impact = 0.0;
        return;
    }
    rule.coverage = static_cast<double>(count) / static_cast<double>(table.rows());
    rule.sum = sum;
    rule.mean = sum / static_cast<double>(count);
    rule.impact = sum - mu * static_cast<double>(count);
}

double bound_of(const Bits& cover, const MiningTable& table, double mu, int sign) {
    double b = 0.0;
    for_each_row(cover, [&](std::size_t r) {
        const double dev = sign * (table.targets[r] - mu);
        if (dev > 0.0) {
            b += dev;
        }
    });
    return b;
}

class Search {
public:
    Search(const MiningTable& table, const std::vector<Condition>& universe, const MinerConfig& cfg, int sign)
        : table_(table), universe_(universe), cfg_(cfg), sign_(sign), mu_(table_mean(table)) {
        const double n = static_cast<double>(table.rows());
        min_count_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.min_coverage * n - 1e-9)));
        double scale = 0.0;
        for (double t : table.targets) {
            scale += std::abs(t) + std::abs(mu_);
        }
        slack_ = 1e-10 * (1.0 + scale);
        bits_.reserve(universe.size());
        for (const auto& c : universe) {
            bits_.push_back(cover_of({c}, table));
        }
        next_feature_start_.assign(universe.size(), universe.size());
        for (std::size_t i = universe.size(); i-- > 0;) {
            if (i + 1 < universe.size() && universe[i + 1].feature == universe[i].feature) {
                next_feature_start_[i] = next_feature_start_[i + 1];
            } else {
                next_feature_start_[i] = i + 1;
            }
        }
    }

    std::vector<ImpactRule> run(std::size_t& nodes) {
        std::vector<std::size_t> ids;
        expand(all_rows(table_.rows()), 0, ids, nodes);
        return std::move(best_);
    }

private:
    void expand(const Bits& cover, std::size_t start, std::vector<std::size_t>& ids, std::size_t& nodes) {
        for (std::size_t c = start; c < universe_.size(); ++c) {
            Bits child(cover.size());
            for (std::size_t w = 0; w < cover.size(); ++w) {
                child[w] = cover[w] & bits_[c][w];
            }
            if (popcount(child) < min_count_) {
                continue; // coverage is anti-monotone: no refinement qualifies either
            }
            ++nodes;
            ids.push_back(c);
            consider(child, ids);
            if (ids.size() < cfg_.max_len && next_feature_start_[c] < universe_.size()) {
                if (best_.size() < cfg_.k || bound_of(child, table_, mu_, sign_) >= kth_score() - slack_) {
                    expand(child, next_feature_start_[c], ids, nodes);
                }
            }
            ids.pop_back();
        }
    }

    double kth_score() const { return sign_ * best_.back().impact; }

    void consider(const Bits& cover, const std::vector<std::size_t>& ids) {
        ImpactRule rule;
        rule.condition_ids = ids;
        fill_stats(rule, cover, table_, mu_);
        if (best_.size() == cfg_.k && !ranks_before(rule, best_.back(), sign_)) {
            return;
        }
        for (auto id : ids) {
            rule.lhs.push_back(universe_[id]);
        }
        const auto pos = std::upper_bound(best_.begin(), best_.end(), rule,
                                          [&](const ImpactRule& a, const ImpactRule& b) { return ranks_before(a, b, sign_); });
        best_.insert(pos, std::move(rule));
        if (best_.size() > cfg_.k) {
            best_.pop_back();
        }
    }

    const MiningTable& table_;
    const std::vector<Condition>& universe_;
    const MinerConfig& cfg_;
    int sign_;
    double mu_;
    std::size_t min_count_ = 1;
    double slack_ = 0.0;
    std::vector<Bits> bits_;
    std::vector<std::size_t> next_feature_start_;
    std::vector<ImpactRule> best_;
};

} // namespace

bool Condition::holds(double value) const {
    switch (form) {
    case ConditionForm::AtMost:
        return value <= high;
    case ConditionForm::Between:
        return value > low && value <= high;
    case ConditionForm::Above:
        return value > low;
    case ConditionForm::Equals:
        return value == low;
    }
    return false;
}

const char* form_name(ConditionForm form) {
    switch (form) {
    case ConditionForm::AtMost:
        return "le";
    case ConditionForm::Between:
        return "between";
    case ConditionForm::Above:
        return "gt";
    case ConditionForm::Equals:
        return "eq";
    }
    return "?";
}

void MinerConfig::validate() const {
    if (k < 1) {
        fail_input("k must be >= 1");
    }
    if (max_len < 1) {
        fail_input("max rule length must be >= 1");
    }
    if (!(min_coverage > 0.0 && min_coverage <= 1.0)) {
        fail_input("min_coverage must lie in (0, 1]");
    }
}

std::vector<Condition> condition_universe(const MiningTable& table, const CutPoints& cuts) {
    if (cuts.boundaries.size() != table.feature_count()) {
        fail_input("cut points do not match the table's features");
    }
    std::vector<Condition> out;
    for (std::size_t f = 0; f < table.feature_count(); ++f) {
        const auto& b = cuts.boundaries[f];
        const auto& name = table.features[f].name;
        if (table.features[f].kind == FeatureKind::Categorical) {
            for (double level : b) {
                out.push_back({f, name, ConditionForm::Equals, level, level});
            }
            continue;
        }
        for (double hi : b) {
            out.push_back({f, name, ConditionForm::AtMost, 0.0, hi});
        }
        for (std::size_t i = 0; i < b.size(); ++i) {
            for (std::size_t j = i + 1; j < b.size(); ++j) {
                out.push_back({f, name, ConditionForm::Between, b[i], b[j]});
            }
        }
        for (double lo : b) {
            out.push_back({f, name, ConditionForm::Above, lo, 0.0});
        }
    }
    return out;
}

ImpactRule evaluate_rule(const std::vector<Condition>& lhs, const MiningTable& table) {
    table.validate();
    if (table.rows() == 0) {
        fail_input("evaluate_rule: empty table");
    }
    ImpactRule rule;
    rule.lhs = lhs;
    fill_stats(rule, cover_of(lhs, table), table, table_mean(table));
    return rule;
}

double optimistic_bound(const std::vector<Condition>& lhs, const MiningTable& table, int sign) {
    table.validate();
    return bound_of(cover_of(lhs, table), table, table_mean(table), sign >= 0 ? 1 : -1);
}

bool ranks_before(const ImpactRule& a, const ImpactRule& b, int sign) {
    const double sa = sign * a.impact;
    const double sb = sign * b.impact;
    if (sa != sb) {
        return sa > sb;
    }
    if (a.condition_ids.size() != b.condition_ids.size()) {
        return a.condition_ids.size() < b.condition_ids.size();
    }
    return a.condition_ids < b.condition_ids;
}

std::vector<ImpactRule> MiningResult::combined() const {
    std::vector<ImpactRule> out = top_positive;
    for (const auto& r : top_negative) {
        const bool seen = std::any_of(top_positive.begin(), top_positive.end(),
                                      [&](const ImpactRule& p) { return p.condition_ids == r.condition_ids; });
        if (!seen) {
            out.push_back(r);
        }
    }
    return out;
}

MiningResult mine_k_optimal(const MiningTable& table, const CutPoints& cuts, const MinerConfig& cfg) {
    cfg.validate();
    table.validate();
    MiningResult result;
    if (table.rows() == 0) {
        return result;
    }
    const auto universe = condition_universe(table, cuts);
    if (universe.empty()) {
        fail_input("mine_k_optimal: no conditions to search (all features dropped)");
    }
    result.top_positive = Search(table, universe, cfg, +1).run(result.nodes_visited);
    result.top_negative = Search(table, universe, cfg, -1).run(result.nodes_visited);
    return result;
}

nlohmann::json rule_to_json(const ImpactRule& rule) {
    nlohmann::json lhs = nlohmann::json::array();
    for (const auto& c : rule.lhs) {
        nlohmann::json cond = {{"feature", c.feature_name}, {"form", form_name(c.form)}};
        switch (c.form) {
        case ConditionForm::AtMost:
            cond["low"] = nullptr;
            cond["high"] = c.high;
            break;
        case ConditionForm::Between:
            cond["low"] = c.low;
            cond["high"] = c.high;
            break;
        case ConditionForm::Above:
            cond["low"] = c.low;
            cond["high"] = nullptr;
            break;
        case ConditionForm::Equals:
            cond["low"] = c.low;
            cond["high"] = c.low;
            break;
        }
        lhs.push_back(std::move(cond));
    }
    return {{"lhs", std::move(lhs)},
            {"coverage", rule.coverage},
            {"absolute_coverage", rule.absolute_coverage},
            {"mean", rule.mean},
            {"sum", rule.sum},
            {"impact", rule.impact}};
}

} // namespace limref
