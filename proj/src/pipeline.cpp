#include "limref/pipeline.hpp"

#include "config_text.hpp"
#include "limref/error.hpp"
#include "limref/parallel.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace limref {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail_input("cannot write '" + path.string() + "'");
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail_input("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path model_path(const RunConfig& config, bool long_group) {
    return fs::path(config.output_dir) / "models" / (long_group ? "gfm_long.txt" : "gfm_short.txt");
}

std::string report_stem(const MeterId& meter, unsigned month) { return fmt::format("{}_m{:02}", meter, month); }

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void write_report_files(const RunConfig& config, const GuidanceReport& report, std::vector<std::string>& written) {
    const auto dir = fs::path(config.output_dir) / "reports";
    const auto stem = report_stem(report.meter_id, report.target_month);
    {
        auto out = open_output(dir / (stem + ".json"));
        out << report_to_json(report).dump(2) << '\n';
    }
    {
        auto out = open_output(dir / (stem + ".txt"));
        out << report_to_text(report);
    }
    written.push_back((dir / (stem + ".json")).string());
    written.push_back((dir / (stem + ".txt")).string());
}

} // namespace

void RunConfig::validate() const {
    if (n_filt < 1) {
        fail_input("n_filt must be >= 1");
    }
    if (bins < 2) {
        fail_input("bins must be >= 2");
    }
    if (month < 1 || month > 12) {
        fail_input("month must be in 1..12");
    }
    if (horizon < 1) {
        fail_input("horizon must be >= 1");
    }
    miner.validate();
    gfm.validate();
}

std::size_t RunConfig::effective_jobs() const { return jobs == 0 ? default_jobs() : jobs; }

ExplainerSettings RunConfig::explainer_settings() const { return {bins, miner, tree_max_depth, tree_min_leaf}; }

void apply_config_text(RunConfig& config, const std::string& text) {
    using detail::to_double;
    using detail::to_uint;
    for (const auto& [key, value] : detail::parse_key_values(text)) {
        if (key == "consumption") {
            config.consumption_csv = value;
        } else if (key == "temperature") {
            config.temperature_csv = value;
        } else if (key == "output") {
            config.output_dir = value;
        } else if (key == "n_filt") {
            config.n_filt = to_uint(key, value);
        } else if (key == "n_synthetic") {
            config.n_synthetic = to_uint(key, value);
        } else if (key == "k") {
            config.miner.k = to_uint(key, value);
        } else if (key == "max_rule_len") {
            config.miner.max_len = to_uint(key, value);
        } else if (key == "min_coverage") {
            config.miner.min_coverage = to_double(key, value);
        } else if (key == "bins") {
            config.bins = to_uint(key, value);
        } else if (key == "window") {
            config.gfm.window = to_uint(key, value);
        } else if (key == "tau_long") {
            config.gfm.tau_long = to_double(key, value);
        } else if (key == "tau_short") {
            config.gfm.tau_short = to_double(key, value);
        } else if (key == "long_series_threshold") {
            config.gfm.long_series_threshold = to_uint(key, value);
        } else if (key == "ridge_penalty") {
            config.gfm.ridge_penalty = to_double(key, value);
        } else if (key == "horizon") {
            config.horizon = to_uint(key, value);
        } else if (key == "month") {
            config.month = static_cast<unsigned>(to_uint(key, value));
        } else if (key == "tree_max_depth") {
            config.tree_max_depth = to_uint(key, value);
        } else if (key == "tree_min_leaf") {
            config.tree_min_leaf = to_uint(key, value);
        } else if (key == "seed") {
            config.seed = to_uint(key, value);
        } else if (key == "jobs") {
            config.jobs = to_uint(key, value);
        } else {
            fail_input("config: unknown key '" + key + "'");
        }
    }
}

void apply_config_file(RunConfig& config, const std::string& path) { apply_config_text(config, read_file(path)); }

std::vector<Explanation> explain_meter(const SeriesPanel& panel, const GfmModels& models, const MeterId& meter,
                                       const std::vector<unsigned>& months, const RunConfig& config, std::size_t jobs,
                                       StageTimes* times) {
    config.validate();
    const PanelEntry& origin = panel.get(meter);
    StageTimes local_times;
    auto clock = std::chrono::steady_clock::now();

    const Neighborhood hood =
        build_neighborhood(panel, meter, config.n_filt, config.n_synthetic, config.seed, DtwConfig{}, jobs);
    local_times.neighborhood_s = seconds_since(clock);
    clock = std::chrono::steady_clock::now();

    std::map<MeterId, TemperatureSeries> extended;
    extended.emplace(meter, extend_temperature(origin.temperature, config.horizon));
    for (const auto& m : hood.members) {
        if (m.provenance.original) {
            extended.emplace(m.provenance.parent_meter_id, extend_temperature(*m.temperature, config.horizon));
        }
    }

    std::vector<ForecastResult> forecasts(hood.members.size());
    parallel_for(hood.members.size(), jobs, [&](std::size_t i) {
        const auto& m = hood.members[i];
        forecasts[i] = forecast_recursive(models.for_length(m.series.size()), m.series,
                                          extended.at(m.provenance.parent_meter_id), config.horizon);
    });
    const ForecastResult origin_forecast = forecast_recursive(models.for_length(origin.consumption.size()),
                                                              origin.consumption, extended.at(meter), config.horizon);
    local_times.forecast_s = seconds_since(clock);
    clock = std::chrono::steady_clock::now();

    std::vector<Explanation> out;
    for (unsigned month : months) {
        Explanation ex;
        ex.meter_id = meter;
        ex.month = month;
        ex.origin_forecast = origin_forecast;
        ex.table.instances.reserve(hood.members.size());
        for (std::size_t i = 0; i < hood.members.size(); ++i) {
            const auto& m = hood.members[i];
            ex.table.instances.push_back(featurize(m.series, extended.at(m.provenance.parent_meter_id), forecasts[i],
                                                   month, config.gfm.window));
            ex.table.provenance.push_back(m.provenance);
        }
        ex.table.origin_instance =
            featurize(origin.consumption, extended.at(meter), origin_forecast, month, config.gfm.window);
        ex.mining_table = to_mining_table(ex.table);
        ex.cuts = derive_cutpoints(ex.mining_table, config.bins);
        for (const auto& d : ex.cuts.dropped) {
            ex.log.push_back("feature dropped from conditions: " + d);
        }
        try {
            ex.mined = mine_k_optimal(ex.mining_table, ex.cuts, config.miner);
        } catch (const Error& e) {
            ex.log.push_back(std::string("rule mining skipped: ") + e.what());
        }
        const double p = origin_forecast.month_kwh(month);
        ex.classified = classify_rules(ex.mined.combined(), ex.table.origin_instance, ex.mining_table, p, &ex.log);
        ex.report = select_guidance(ex.classified, meter, month, p);
        out.push_back(std::move(ex));
    }
    local_times.mining_s = seconds_since(clock);
    if (times != nullptr) {
        *times = local_times;
    }
    return out;
}

PanelBuild load_panel(const RunConfig& config) {
    const auto consumption = read_consumption_csv(config.consumption_csv);
    const auto temperatures = read_temperature_csv(config.temperature_csv);
    return build_panel(consumption, temperatures, config.effective_jobs());
}

TrainSummary run_train(const RunConfig& config) {
    config.validate();
    const PanelBuild build = load_panel(config);
    {
        auto log = open_output(fs::path(config.output_dir) / "rejections.tsv");
        write_rejection_log(log, build.rejections);
    }
    if (build.panel.empty()) {
        fail_input("no usable meters in the input panel");
    }
    std::vector<Rejection> skipped;
    const GfmModels models = train_models(build.panel, config.gfm, &skipped);
    for (bool long_group : {true, false}) {
        const auto& model = long_group ? models.long_model : models.short_model;
        const auto path = model_path(config, long_group);
        if (model) {
            auto out = open_output(path);
            write_model(out, *model);
        } else {
            fs::remove(path);
        }
    }
    TrainSummary summary{build.panel.size(), build.rejections.size(), models.long_model.has_value(),
                         models.short_model.has_value()};
    std::cerr << fmt::format("train: {} meters ({} rejected, {} skipped); models: long(tau={}) {}, short(tau={}) {}\n",
                             summary.meters, summary.rejected, skipped.size(), config.gfm.tau_long,
                             summary.long_model ? "written" : "absent", config.gfm.tau_short,
                             summary.short_model ? "written" : "absent");
    return summary;
}

GfmModels load_models(const RunConfig& config) {
    GfmModels models;
    models.config = config.gfm;
    for (bool long_group : {true, false}) {
        const auto path = model_path(config, long_group);
        if (!fs::exists(path)) {
            continue;
        }
        std::ifstream in(path);
        GfmModel model = read_model(in);
        if (model.window != config.gfm.window) {
            fail_input("model '" + path.string() + "' was trained with window " + std::to_string(model.window));
        }
        (long_group ? models.long_model : models.short_model) = std::move(model);
    }
    if (!models.long_model && !models.short_model) {
        fail_input("no trained model under '" + config.output_dir + "/models'; run 'train' first");
    }
    return models;
}

std::vector<std::string> run_explain(const RunConfig& config, const MeterId& meter, unsigned month) {
    config.validate();
    const PanelBuild build = load_panel(config);
    const GfmModels models = load_models(config);
    StageTimes times;
    const auto explanations = explain_meter(build.panel, models, meter, {month}, config, config.effective_jobs(), &times);
    std::vector<std::string> written;
    write_report_files(config, explanations.front().report, written);
    std::cerr << fmt::format("explain {}: neighbourhood {:.3f}s, forecasts {:.3f}s, rules {:.3f}s\n", meter,
                             times.neighborhood_s, times.forecast_s, times.mining_s);
    if (config.verbose) {
        for (const auto& line : explanations.front().log) {
            std::cerr << "  " << line << '\n';
        }
    }
    return written;
}

std::vector<std::string> run_explain_all(const RunConfig& config) {
    config.validate();
    const PanelBuild build = load_panel(config);
    const GfmModels models = load_models(config);
    const auto ids = build.panel.meter_ids();
    std::vector<GuidanceReport> reports(ids.size());
    parallel_for(ids.size(), config.effective_jobs(), [&](std::size_t i) {
        reports[i] = explain_meter(build.panel, models, ids[i], {config.month}, config, 1).front().report;
    });
    std::vector<std::string> written;
    std::string combined;
    for (const auto& r : reports) {
        write_report_files(config, r, written);
        combined += report_to_text(r);
    }
    auto out = open_output(fs::path(config.output_dir) / "reports" / fmt::format("all_m{:02}.txt", config.month));
    out << combined;
    written.push_back((fs::path(config.output_dir) / "reports" / fmt::format("all_m{:02}.txt", config.month)).string());
    return written;
}

EvalReport evaluate_panel(const SeriesPanel& panel, const RunConfig& config) {
    config.validate();
    if (panel.empty()) {
        fail_input("evaluation panel is empty");
    }
    if (config.n_filt * (config.n_synthetic + 1) < 2 * kSurrogateFeatureCount) {
        fail_input("neighbourhood too small for the linear explainer: need n_filt*(n_synthetic+1) >= 10");
    }
    EvalReport report;

    Date last = panel.at(0).consumption.end_date();
    for (const auto& e : panel.entries()) {
        last = std::max(last, e.consumption.end_date());
    }
    const Date cutoff = add_days(last, 1 - static_cast<long long>(config.horizon));
    const std::size_t min_history =
        std::max<std::size_t>({config.gfm.window + 1, 2 * kSeasonalPeriod, config.gfm.window});
    PanelBuild history = truncate_panel(panel, cutoff, min_history);
    report.excluded = history.rejections;

    struct Target {
        MeterId id;
        std::array<double, 12> actual{};
    };
    std::vector<Target> targets;
    for (const auto& e : history.panel.entries()) {
        const auto& full = panel.get(e.consumption.meter_id).consumption;
        if (full.end_date() != last) {
            report.excluded.push_back({full.meter_id, "does not cover the evaluation period"});
            continue;
        }
        Target t{full.meter_id, {}};
        for (std::size_t d = 0; d < full.size(); ++d) {
            if (full.date_at(d) >= cutoff) {
                t.actual[month_of(full.date_at(d)) - 1] += full.kwh_at(d);
            }
        }
        targets.push_back(t);
    }
    if (targets.size() < 2) {
        fail_input("fewer than two meters cover the evaluation period");
    }

    const GfmModels models = train_models(history.panel, config.gfm);
    const std::vector<unsigned> months = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    const ExplainerSettings settings = config.explainer_settings();

    struct MeterOutcome {
        std::vector<EvalRecord> lr, dt, limref;
        std::vector<std::vector<double>> lr_importance, dt_importance;
        std::vector<std::array<std::vector<double>, kQuadrantCount>> usage;
        std::vector<std::array<std::size_t, kQuadrantCount>> usage_counts;
        std::vector<SurrogateInstance> origins;
    };
    std::vector<MeterOutcome> outcomes(targets.size());
    parallel_for(targets.size(), config.effective_jobs(), [&](std::size_t i) {
        const auto& target = targets[i];
        const auto explanations = explain_meter(history.panel, models, target.id, months, config, 1);
        auto& o = outcomes[i];
        for (const auto& ex : explanations) {
            const auto values = ex.table.origin_instance.feature_values();
            const double p = ex.origin_forecast.month_kwh(ex.month);
            const double actual = target.actual[ex.month - 1];
            const LinearExplainer lr = fit_linear_explainer(ex.mining_table);
            const TreeExplainer dt = fit_tree_explainer(ex.mining_table, config.tree_max_depth, config.tree_min_leaf);
            o.lr.push_back({target.id, ex.month, lr.predict(values), p, actual});
            o.dt.push_back({target.id, ex.month, dt.predict(values), p, actual});
            o.limref.push_back(
                {target.id, ex.month, limref_predict(ex.classified, values, ex.table.target_mean()), p, actual});
            o.lr_importance.push_back(feature_importance(lr));
            o.dt_importance.push_back(feature_importance(dt));
            o.usage.push_back(feature_usage(ex.classified, kSurrogateFeatureCount));
            std::array<std::size_t, kQuadrantCount> counts{};
            for (const auto& c : ex.classified) {
                ++counts[guidance_index(c.quadrant)];
            }
            o.usage_counts.push_back(counts);
            o.origins.push_back(ex.table.origin_instance);
        }
    });

    std::vector<EvalRecord> lr, dt, limref;
    std::vector<double> lr_imp(kSurrogateFeatureCount, 0.0), dt_imp(kSurrogateFeatureCount, 0.0);
    std::array<std::vector<double>, kQuadrantCount> usage;
    std::array<std::size_t, kQuadrantCount> usage_tasks{};
    for (auto& u : usage) {
        u.assign(kSurrogateFeatureCount, 0.0);
    }
    std::size_t tasks = 0;
    std::vector<SurrogateInstance> global_rows;
    std::vector<std::string> global_ids;
    std::vector<unsigned> global_months;
    std::vector<double> global_actuals;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        lr.insert(lr.end(), o.lr.begin(), o.lr.end());
        dt.insert(dt.end(), o.dt.begin(), o.dt.end());
        limref.insert(limref.end(), o.limref.begin(), o.limref.end());
        for (std::size_t t = 0; t < o.lr_importance.size(); ++t) {
            ++tasks;
            for (std::size_t f = 0; f < kSurrogateFeatureCount; ++f) {
                lr_imp[f] += o.lr_importance[t][f];
                dt_imp[f] += o.dt_importance[t][f];
            }
            for (std::size_t q = 0; q < kQuadrantCount; ++q) {
                if (o.usage_counts[t][q] == 0) {
                    continue;
                }
                ++usage_tasks[q];
                for (std::size_t f = 0; f < kSurrogateFeatureCount; ++f) {
                    usage[q][f] += o.usage[t][q][f];
                }
            }
        }
        for (std::size_t t = 0; t < o.origins.size(); ++t) {
            global_rows.push_back(o.origins[t]);
            global_ids.push_back(o.lr[t].meter_id);
            global_months.push_back(o.lr[t].month);
            global_actuals.push_back(o.lr[t].actual);
        }
    }

    const MiningTable global_table = to_mining_table(global_rows);
    const GlobalExplainers global = global_explainers(global_table, global_ids, global_months, global_actuals, settings);

    std::vector<EvalRecord> gfm_self = lr;
    for (auto& r : gfm_self) {
        r.prediction = r.gfm_forecast;
    }

    auto add_rows = [&](const std::string& name, const std::string& scope, const std::vector<EvalRecord>& records) {
        for (MetricMode mode : {MetricMode::Fidelity, MetricMode::Accuracy}) {
            report.results.push_back({name, scope, mode, metrics(records, mode)});
        }
        report.records[name + "/" + scope] = records;
    };
    add_rows("LR", "local", lr);
    add_rows("DT", "local", dt);
    add_rows("LIMREF", "local", limref);
    add_rows("LR", "global", global.lr_records);
    add_rows("DT", "global", global.dt_records);
    add_rows("LIMREF", "global", global.limref_records);
    add_rows("GFM", "model", gfm_self);

    const auto& names = surrogate_feature_names();
    for (std::size_t f = 0; f < kSurrogateFeatureCount; ++f) {
        report.importance.push_back({"LR", names[f], lr_imp[f] / static_cast<double>(tasks)});
    }
    for (std::size_t f = 0; f < kSurrogateFeatureCount; ++f) {
        report.importance.push_back({"DT", names[f], dt_imp[f] / static_cast<double>(tasks)});
    }
    for (std::size_t q = 0; q < kQuadrantCount; ++q) {
        for (std::size_t f = 0; f < kSurrogateFeatureCount; ++f) {
            const double score = usage_tasks[q] == 0 ? 0.0 : usage[q][f] / static_cast<double>(usage_tasks[q]);
            report.importance.push_back({quadrant_name(static_cast<Quadrant>(q)), names[f], score});
        }
    }
    const auto lr_g = feature_importance(global.lr);
    const auto dt_g = feature_importance(global.dt);
    for (std::size_t f = 0; f < kSurrogateFeatureCount; ++f) {
        report.importance.push_back({"LR_g", names[f], lr_g[f]});
    }
    for (std::size_t f = 0; f < kSurrogateFeatureCount; ++f) {
        report.importance.push_back({"DT_g", names[f], dt_g[f]});
    }
    return report;
}

EvalReport run_eval(const RunConfig& config) {
    config.validate();
    const PanelBuild build = load_panel(config);
    EvalReport report = evaluate_panel(build.panel, config);
    const auto dir = fs::path(config.output_dir) / "eval";
    {
        auto out = open_output(dir / "results.csv");
        write_results_csv(out, report.results);
    }
    {
        auto out = open_output(dir / "importance.csv");
        write_importance_csv(out, report.importance);
    }
    {
        auto out = open_output(dir / "excluded.tsv");
        auto all = build.rejections;
        all.insert(all.end(), report.excluded.begin(), report.excluded.end());
        write_rejection_log(out, all);
    }
    return report;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << "explainer,scope,metric_mode,rae,rmse,mae\n";
    for (const auto& r : rows) {
        out << r.explainer << ',' << r.scope << ',' << metric_mode_name(r.mode) << ',' << format_number(r.values.rae)
            << ',' << format_number(r.values.rmse) << ',' << format_number(r.values.mae) << '\n';
    }
}

void write_importance_csv(std::ostream& out, const std::vector<ImportanceRow>& rows) {
    out << "explainer_or_ruletype,feature,score\n";
    for (const auto& r : rows) {
        out << r.explainer_or_ruletype << ',' << r.feature << ',' << format_number(r.score) << '\n';
    }
}

} // namespace limref
