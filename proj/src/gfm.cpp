#include "limref/gfm.hpp"

#include "limref/error.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>

namespace limref {

namespace {

template <typename Row>
void fill_row(Row&& row, std::span<const double> history, std::size_t window,
              double temperature, Date date) {
    // history ends at t-1; lag_k = history[size - k]
    for (std::size_t k = 1; k <= window; ++k) {
        row(static_cast<Eigen::Index>(k - 1)) = history[history.size() - k];
    }
    const auto w = static_cast<Eigen::Index>(window);
    row(w) = temperature;
    for (Eigen::Index d = 0; d < 7; ++d) {
        row(w + 1 + d) = 0.0;
    }
    row(w + 1 + static_cast<Eigen::Index>(weekday_index(date))) = 1.0;
    row(w + 8) = 1.0;
}

} // namespace

void GfmConfig::validate() const {
    if (window < 1) {
        fail_input("gfm window must be >= 1");
    }
    for (double tau : {tau_long, tau_short}) {
        if (!(tau > 0.0 && tau < 1.0)) {
            fail_input("expectile level must lie in (0, 1)");
        }
    }
    if (ridge_penalty < 0.0) {
        fail_input("ridge penalty must be non-negative");
    }
}

std::vector<std::string> gfm_feature_names(std::size_t window) {
    std::vector<std::string> names;
    for (std::size_t k = 1; k <= window; ++k) {
        names.push_back("lag_" + std::to_string(k));
    }
    names.emplace_back("mean_temp");
    for (const char* d : {"dow_mon", "dow_tue", "dow_wed", "dow_thu", "dow_fri", "dow_sat", "dow_sun"}) {
        names.emplace_back(d);
    }
    names.emplace_back("intercept");
    return names;
}

TrainingData build_training_matrix(const std::vector<const PanelEntry*>& entries, const GfmConfig& cfg) {
    cfg.validate();
    TrainingData out;
    std::size_t rows = 0;
    for (const auto* e : entries) {
        const std::size_t len = e->consumption.size();
        if (len <= cfg.window) {
            out.skipped.push_back({e->consumption.meter_id, "series too short for window " + std::to_string(cfg.window)});
        } else {
            rows += len - cfg.window;
        }
    }
    const auto cols = static_cast<Eigen::Index>(cfg.window + 9);
    out.features.resize(static_cast<Eigen::Index>(rows), cols);
    out.targets.resize(static_cast<Eigen::Index>(rows));

    Eigen::Index r = 0;
    for (const auto* e : entries) {
        const auto& s = e->consumption;
        if (s.size() <= cfg.window) {
            continue;
        }
        for (std::size_t t = cfg.window; t < s.size(); ++t) {
            const Date date = s.date_at(t);
            const auto temp = e->temperature.mean_on(date);
            if (!temp) {
                fail_input(s.meter_id + ": no temperature on " + format_date(date));
            }
            fill_row(out.features.row(r), std::span<const double>(s.values.data(), t), cfg.window, *temp, date);
            out.targets(r) = s.values[t];
            ++r;
        }
    }
    return out;
}

TrainingData build_training_matrix(const SeriesPanel& panel, const GfmConfig& cfg) {
    std::vector<const PanelEntry*> entries;
    for (const auto& e : panel.entries()) {
        entries.push_back(&e);
    }
    return build_training_matrix(entries, cfg);
}

ExpectileFit fit_expectile(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau, double ridge_penalty) {
    if (!(tau > 0.0 && tau < 1.0)) {
        fail_input("expectile level must lie in (0, 1)");
    }
    if (x.rows() < x.cols() || x.rows() != y.size()) {
        fail_input("fit_expectile: need at least as many instances as features");
    }
    const Eigen::Index p = x.cols();
    const Eigen::MatrixXd ridge = ridge_penalty * Eigen::MatrixXd::Identity(p, p);

    auto solve = [&](const Eigen::VectorXd& w) {
        const Eigen::MatrixXd a = x.transpose() * w.asDiagonal() * x + ridge;
        const Eigen::VectorXd b = x.transpose() * w.asDiagonal() * y;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
        const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
        // LDLT::rcond does not see exactly zero pivots, so check the pivot spread too.
        if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14) || !(d.minCoeff() > 1e-14 * d.maxCoeff())) {
            fail_numeric("rank-deficient design");
        }
        Eigen::VectorXd beta = ldlt.solve(b);
        if (!beta.allFinite()) {
            fail_numeric("rank-deficient design");
        }
        return beta;
    };

    ExpectileFit fit;
    Eigen::VectorXd w = Eigen::VectorXd::Constant(x.rows(), 0.5);
    fit.coefficients = solve(w);
    for (fit.iterations = 1; fit.iterations <= 100; ++fit.iterations) {
        const Eigen::VectorXd residual = y - x * fit.coefficients;
        for (Eigen::Index i = 0; i < residual.size(); ++i) {
            w(i) = residual(i) >= 0.0 ? tau : 1.0 - tau;
        }
        Eigen::VectorXd next = solve(w);
        const double change = (next - fit.coefficients).cwiseAbs().maxCoeff();
        fit.coefficients = std::move(next);
        if (change < 1e-8) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

double expectile_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double tau,
                      double ridge_penalty) {
    const Eigen::VectorXd r = y - x * beta;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        loss += (r(i) >= 0.0 ? tau : 1.0 - tau) * r(i) * r(i);
    }
    return loss + ridge_penalty * beta.squaredNorm();
}

Eigen::VectorXd expectile_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                   double tau, double ridge_penalty) {
    Eigen::VectorXd r = y - x * beta;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        r(i) *= r(i) >= 0.0 ? tau : 1.0 - tau;
    }
    return -2.0 * x.transpose() * r + 2.0 * ridge_penalty * beta;
}

double select_tau(std::size_t series_length, const GfmConfig& cfg) {
    return series_length >= cfg.long_series_threshold ? cfg.tau_long : cfg.tau_short;
}

ForecastResult forecast_recursive(const GfmModel& model, const DailySeries& series, const TemperatureSeries& temps,
                                  std::size_t horizon) {
    if (model.coefficients.size() != model.feature_count()) {
        fail_input("model coefficient count does not match its feature layout");
    }
    if (series.size() < model.window) {
        fail_input(series.meter_id + ": series shorter than the model window");
    }
    const Eigen::Map<const Eigen::VectorXd> beta(model.coefficients.data(),
                                                 static_cast<Eigen::Index>(model.coefficients.size()));

    ForecastResult out;
    out.meter_id = series.meter_id;
    out.start_date = add_days(series.end_date(), 1);
    out.daily.reserve(horizon);
    out.daily_kwh.reserve(horizon);

    std::vector<double> history(series.values.end() - static_cast<std::ptrdiff_t>(model.window), series.values.end());
    history.reserve(model.window + horizon);
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(model.feature_count()));
    for (std::size_t h = 0; h < horizon; ++h) {
        const Date date = add_days(out.start_date, static_cast<long long>(h));
        const auto temp = temps.mean_on(date);
        if (!temp) {
            fail_input(series.meter_id + ": missing temperature for forecast day " + format_date(date));
        }
        fill_row(row, history, model.window, *temp, date);
        const double value = row.dot(beta);
        history.push_back(value);
        out.daily.push_back(value);
        out.daily_kwh.push_back(value * series.scale);
        out.monthly_kwh[month_of(date) - 1] += value * series.scale;
    }
    for (double m : out.monthly_kwh) {
        out.yearly_kwh += m;
    }
    return out;
}

const GfmModel& GfmModels::for_length(std::size_t series_length) const {
    const bool is_long = series_length >= config.long_series_threshold;
    const auto& preferred = is_long ? long_model : short_model;
    const auto& other = is_long ? short_model : long_model;
    if (preferred) {
        return *preferred;
    }
    if (other) {
        return *other;
    }
    fail_input("no trained model available");
}

GfmModels train_models(const SeriesPanel& panel, const GfmConfig& cfg, std::vector<Rejection>* skipped) {
    cfg.validate();
    std::vector<const PanelEntry*> long_group;
    std::vector<const PanelEntry*> short_group;
    for (const auto& e : panel.entries()) {
        (e.consumption.size() >= cfg.long_series_threshold ? long_group : short_group).push_back(&e);
    }
    GfmModels models;
    models.config = cfg;
    auto train = [&](const std::vector<const PanelEntry*>& group, double tau) -> std::optional<GfmModel> {
        if (group.empty()) {
            return std::nullopt;
        }
        TrainingData data = build_training_matrix(group, cfg);
        if (skipped != nullptr) {
            skipped->insert(skipped->end(), data.skipped.begin(), data.skipped.end());
        }
        if (data.features.rows() == 0) {
            return std::nullopt;
        }
        const ExpectileFit fit = fit_expectile(data.features, data.targets, tau, cfg.ridge_penalty);
        return GfmModel{cfg.window, tau, std::vector<double>(fit.coefficients.data(),
                                                             fit.coefficients.data() + fit.coefficients.size())};
    };
    models.long_model = train(long_group, cfg.tau_long);
    models.short_model = train(short_group, cfg.tau_short);
    return models;
}

void write_model(std::ostream& out, const GfmModel& model) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", model.tau);
    out << "#gfm\ttau=" << buf << "\twindow=" << model.window << '\n';
    const auto names = gfm_feature_names(model.window);
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", model.coefficients.at(i));
        out << names[i] << '\t' << buf << '\n';
    }
}

GfmModel read_model(std::istream& in) {
    std::string line;
    GfmModel model;
    if (!std::getline(in, line) || line.rfind("#gfm\t", 0) != 0) {
        fail_input("model file: missing '#gfm' header");
    }
    {
        std::istringstream header(line.substr(5));
        std::string field;
        bool have_tau = false;
        bool have_window = false;
        while (std::getline(header, field, '\t')) {
            if (field.rfind("tau=", 0) == 0) {
                model.tau = std::stod(field.substr(4));
                have_tau = true;
            } else if (field.rfind("window=", 0) == 0) {
                model.window = std::stoul(field.substr(7));
                have_window = true;
            }
        }
        if (!have_tau || !have_window || model.window < 1) {
            fail_input("model file: header must carry tau= and window=");
        }
    }
    const auto names = gfm_feature_names(model.window);
    for (const auto& expected : names) {
        if (!std::getline(in, line)) {
            fail_input("model file: truncated, expected feature '" + expected + "'");
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.substr(0, tab) != expected) {
            fail_input("model file: expected feature '" + expected + "'");
        }
        char* end = nullptr;
        const std::string number = line.substr(tab + 1);
        const double value = std::strtod(number.c_str(), &end);
        if (end == number.c_str() || !std::isfinite(value)) {
            fail_input("model file: malformed coefficient for '" + expected + "'");
        }
        model.coefficients.push_back(value);
    }
    return model;
}

} // namespace limref
