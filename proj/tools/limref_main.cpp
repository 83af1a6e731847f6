#include "limref/error.hpp"
#include "limref/pipeline.hpp"
#include "limref/synthetic.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::string config_file;
    std::optional<std::string> consumption, temperature, output;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_filt, n_synth, bins, k, max_rule_len, jobs;
    std::optional<double> min_coverage;
    bool verbose = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_file, "key = value configuration file");
    cmd->add_option("--consumption", o.consumption, "consumption CSV (meter_id,timestamp,kwh)");
    cmd->add_option("--temperature", o.temperature, "temperature CSV (meter_id,date,mean_temp,min_temp,max_temp)");
    cmd->add_option("--output", o.output, "output directory");
    cmd->add_option("--seed", o.seed, "global seed");
    cmd->add_option("--n-filt", o.n_filt, "number of nearest neighbours");
    cmd->add_option("--n-synth", o.n_synth, "bootstrap replicates per neighbour");
    cmd->add_option("--bins", o.bins, "quantile bins per numeric surrogate feature");
    cmd->add_option("--k", o.k, "rules kept per impact sign");
    cmd->add_option("--max-rule-len", o.max_rule_len, "maximum conditions per rule");
    cmd->add_option("--min-coverage", o.min_coverage, "minimum rule coverage (fraction)");
    cmd->add_option("--jobs", o.jobs, "worker threads (0 = all cores)");
    cmd->add_flag("--verbose", o.verbose, "log per-stage details");
}

limref::RunConfig resolve(const Overrides& o) {
    limref::RunConfig config;
    if (!o.config_file.empty()) {
        limref::apply_config_file(config, o.config_file);
    }
    if (o.consumption) config.consumption_csv = *o.consumption;
    if (o.temperature) config.temperature_csv = *o.temperature;
    if (o.output) config.output_dir = *o.output;
    if (o.seed) config.seed = *o.seed;
    if (o.n_filt) config.n_filt = *o.n_filt;
    if (o.n_synth) config.n_synthetic = *o.n_synth;
    if (o.bins) config.bins = *o.bins;
    if (o.k) config.miner.k = *o.k;
    if (o.max_rule_len) config.miner.max_len = *o.max_rule_len;
    if (o.min_coverage) config.miner.min_coverage = *o.min_coverage;
    if (o.jobs) config.jobs = *o.jobs;
    config.verbose = o.verbose;
    config.validate();
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rule-based local explanations for global forecasting models"};
    app.require_subcommand(1);

    Overrides o;
    std::string meter;
    std::optional<unsigned> month;
    std::string spec_file;
    std::string synth_out = ".";

    auto* train = app.add_subcommand("train", "fit and persist the global expectile models");
    add_common(train, o);

    auto* explain = app.add_subcommand("explain", "explain one meter's monthly forecast");
    add_common(explain, o);
    explain->add_option("--meter", meter, "meter id")->required();
    explain->add_option("--month", month, "target month 1-12")->required()->check(CLI::Range(1, 12));

    auto* explain_all = app.add_subcommand("explain-all", "explain every meter for one month");
    add_common(explain_all, o);
    explain_all->add_option("--month", month, "target month 1-12 (default from config)")->check(CLI::Range(1, 12));

    auto* eval = app.add_subcommand("eval", "fidelity/accuracy of LR, DT and rule explainers");
    add_common(eval, o);

    auto* synth = app.add_subcommand("synth", "write a synthetic consumption/temperature panel");
    synth->add_option("--spec", spec_file, "synthetic panel spec (key = value)")->required();
    synth->add_option("--output", synth_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (synth->parsed()) {
            std::ifstream in(spec_file);
            if (!in) {
                limref::fail_input("cannot open spec '" + spec_file + "'");
            }
            std::stringstream ss;
            ss << in.rdbuf();
            const auto spec = limref::parse_synthetic_spec(ss.str());
            limref::write_synthetic_panel(limref::generate_synthetic_panel(spec), synth_out);
            std::cout << "wrote " << synth_out << "/consumption.csv and " << synth_out << "/temperature.csv\n";
            return 0;
        }
        limref::RunConfig config = resolve(o);
        if (month) {
            config.month = *month;
        }
        if (train->parsed()) {
            limref::run_train(config);
        } else if (explain->parsed()) {
            for (const auto& path : limref::run_explain(config, meter, config.month)) {
                std::cout << path << '\n';
            }
        } else if (explain_all->parsed()) {
            for (const auto& path : limref::run_explain_all(config)) {
                std::cout << path << '\n';
            }
        } else if (eval->parsed()) {
            const auto report = limref::run_eval(config);
            limref::write_results_csv(std::cout, report.results);
        }
    } catch (const limref::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == limref::ErrorKind::Numerical ? kExitNumerical : kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
