#pragma once

#include "limref/baselines.hpp"
#include "limref/data_core.hpp"
#include "limref/gfm.hpp"
#include "limref/guidance.hpp"
#include "limref/impact_miner.hpp"
#include "limref/neighborhood.hpp"
#include "limref/surrogate.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace limref {

struct RunConfig {
    std::string consumption_csv = "consumption.csv";
    std::string temperature_csv = "temperature.csv";
    std::string output_dir = "out";
    std::size_t n_filt = 50;
    std::size_t n_synthetic = 100;
    MinerConfig miner;
    std::size_t bins = 3;
    GfmConfig gfm;
    std::size_t horizon = 365;
    unsigned month = 1;
    std::size_t tree_max_depth = 4;
    std::size_t tree_min_leaf = 20;
    std::uint64_t seed = 42;
    std::size_t jobs = 0; // 0 = available cores
    bool verbose = false;

    void validate() const;
    std::size_t effective_jobs() const;
    ExplainerSettings explainer_settings() const;
};

// Flat `key = value` text; '#' starts a comment. Unknown keys are rejected.
void apply_config_text(RunConfig& config, const std::string& text);
void apply_config_file(RunConfig& config, const std::string& path);

struct Explanation {
    MeterId meter_id;
    unsigned month = 1;
    ForecastResult origin_forecast;
    SurrogateTable table;
    MiningTable mining_table;
    CutPoints cuts;
    MiningResult mined;
    std::vector<RuleClassification> classified;
    GuidanceReport report;
    std::vector<std::string> log;
};

struct StageTimes {
    double neighborhood_s = 0.0;
    double forecast_s = 0.0;
    double mining_s = 0.0;
};

// The whole explanation procedure for one meter: nearest neighbours, block
// bootstrap, global-model forecasts, surrogate features, rule mining and
// guidance. One neighbourhood serves all requested months.
std::vector<Explanation> explain_meter(const SeriesPanel& panel, const GfmModels& models, const MeterId& meter,
                                       const std::vector<unsigned>& months, const RunConfig& config,
                                       std::size_t jobs = 1, StageTimes* times = nullptr);

PanelBuild load_panel(const RunConfig& config);

// Stage entry points used by the CLI. They write under config.output_dir.
struct TrainSummary {
    std::size_t meters = 0;
    std::size_t rejected = 0;
    bool long_model = false;
    bool short_model = false;
};
TrainSummary run_train(const RunConfig& config);
GfmModels load_models(const RunConfig& config);

std::vector<std::string> run_explain(const RunConfig& config, const MeterId& meter, unsigned month);
std::vector<std::string> run_explain_all(const RunConfig& config);

struct ResultRow {
    std::string explainer;
    std::string scope;
    MetricMode mode = MetricMode::Fidelity;
    Metrics values;
};

struct ImportanceRow {
    std::string explainer_or_ruletype;
    std::string feature;
    double score = 0.0;
};

struct EvalReport {
    std::vector<ResultRow> results;
    std::vector<ImportanceRow> importance;
    std::vector<Rejection> excluded;
    std::map<std::string, std::vector<EvalRecord>> records; // keyed "<explainer>/<scope>"
};

// Holds out the final `horizon` days, retrains the global model on the rest,
// explains every remaining meter for every month and scores the LR, DT and
// rule-based explainers locally and globally.
EvalReport evaluate_panel(const SeriesPanel& panel, const RunConfig& config);
EvalReport run_eval(const RunConfig& config);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_importance_csv(std::ostream& out, const std::vector<ImportanceRow>& rows);

} // namespace limref
