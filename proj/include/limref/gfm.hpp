#pragma once

#include "limref/data_core.hpp"

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace limref {

struct GfmConfig {
    std::size_t window = 20;
    double tau_long = 0.57;
    double tau_short = 0.39;
    std::size_t long_series_threshold = 180; // days; boundary counts as long
    double ridge_penalty = 1e-6;

    void validate() const;
};

// Feature layout: lag_1..lag_<window>, mean_temp, dow_mon..dow_sun, intercept.
std::vector<std::string> gfm_feature_names(std::size_t window);

struct GfmModel {
    std::size_t window = 20;
    double tau = 0.5;
    std::vector<double> coefficients;

    std::size_t feature_count() const { return window + 9; }
};

struct TrainingData {
    Eigen::MatrixXd features;
    Eigen::VectorXd targets;
    std::vector<Rejection> skipped;
};

// One row per (meter, day t) with t >= window (0-based): the previous `window`
// normalized values, the day's mean temperature and its weekday one-hot.
TrainingData build_training_matrix(const std::vector<const PanelEntry*>& entries, const GfmConfig& cfg);
TrainingData build_training_matrix(const SeriesPanel& panel, const GfmConfig& cfg);

struct ExpectileFit {
    Eigen::VectorXd coefficients;
    std::size_t iterations = 0;
    bool converged = false;
};

// Asymmetric least squares by iteratively reweighted least squares: weight tau
// on non-negative residuals, 1 - tau on negative ones, plus a ridge term.
ExpectileFit fit_expectile(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau, double ridge_penalty);

double expectile_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double tau,
                      double ridge_penalty);
Eigen::VectorXd expectile_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                   double tau, double ridge_penalty);

double select_tau(std::size_t series_length, const GfmConfig& cfg);

struct ForecastResult {
    MeterId meter_id;
    Date start_date{};
    std::vector<double> daily;     // normalized
    std::vector<double> daily_kwh; // denormalized
    std::array<double, 12> monthly_kwh{}; // indexed by calendar month - 1
    double yearly_kwh = 0.0;

    double month_kwh(unsigned month) const { return monthly_kwh.at(month - 1); }
};

// Recursive multi-step forecast; forecasts are fed back as lags. `temps` must
// cover every horizon day (normally the output of extend_temperature).
ForecastResult forecast_recursive(const GfmModel& model, const DailySeries& series, const TemperatureSeries& temps,
                                  std::size_t horizon = 365);

// Models for the long and short series groups; either may be absent when its
// group is empty.
struct GfmModels {
    std::optional<GfmModel> long_model;
    std::optional<GfmModel> short_model;
    GfmConfig config;

    // The model of the series' length group, falling back to the other group.
    const GfmModel& for_length(std::size_t series_length) const;
};

GfmModels train_models(const SeriesPanel& panel, const GfmConfig& cfg, std::vector<Rejection>* skipped = nullptr);

void write_model(std::ostream& out, const GfmModel& model);
GfmModel read_model(std::istream& in);

} // namespace limref
