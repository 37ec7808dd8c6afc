#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "prefrank/harness.hpp"
#include "prefrank/report.hpp"
#include "prefrank/service.hpp"

namespace {

std::vector<prefrank::TrajectoryRecord> read_all(const std::vector<std::string>& paths) {
    std::vector<prefrank::TrajectoryRecord> all;
    for (const auto& p : paths) {
        auto r = prefrank::read_trajectory_csv(std::filesystem::path(p));
        all.insert(all.end(), r.begin(), r.end());
    }
    return all;
}

const char* env_or(const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active preference learning: experiments, reports and the annotation service"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a seeded experiment and write its trajectory CSV");
    std::string config_path, sampler, seeds, out = "trajectory.csv";
    std::size_t budget = 0, threads = 0;
    run->add_option("-c,--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
    run->add_option("--sampler", sampler, "override the sampler");
    run->add_option("--seeds", seeds, "override the seed list, e.g. 1-50 or 1,4,9");
    run->add_option("--budget", budget, "override the budget T");
    run->add_option("--threads", threads, "override the worker count");
    run->add_option("-o,--out", out, "trajectory CSV path");

    auto* agg = app.add_subcommand("aggregate", "Per-step mean, sd and 95% CI across seeds (wide CSV)");
    std::vector<std::string> agg_inputs;
    std::string agg_out = "aggregate.csv";
    agg->add_option("inputs", agg_inputs, "trajectory CSV files")->required()->check(CLI::ExistingFile);
    agg->add_option("-o,--out", agg_out, "output CSV");

    auto* rep = app.add_subcommand("report", "Write aggregate.csv and plot-ready long.csv");
    std::vector<std::string> rep_inputs;
    std::string rep_dir = "report";
    rep->add_option("inputs", rep_inputs, "trajectory CSV files")->required()->check(CLI::ExistingFile);
    rep->add_option("-o,--out-dir", rep_dir, "output directory");

    auto* srv = app.add_subcommand("serve", "Serve the annotation HTTP API");
    prefrank::ServeOptions serve_opts;
    serve_opts.host = env_or("PREFRANK_HOST", "127.0.0.1");
    serve_opts.port = std::atoi(env_or("PREFRANK_PORT", "8080"));
    serve_opts.data_dir = env_or("PREFRANK_DATA_DIR", "sessions");
    srv->add_option("--host", serve_opts.host, "bind address (env PREFRANK_HOST)");
    srv->add_option("--port", serve_opts.port, "port (env PREFRANK_PORT)");
    srv->add_option("--data-dir", serve_opts.data_dir, "session storage (env PREFRANK_DATA_DIR)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = prefrank::read_config(config_path);
            if (!sampler.empty()) prefrank::apply_config_value(cfg, "sampler", sampler);
            if (!seeds.empty()) prefrank::apply_config_value(cfg, "seeds", seeds);
            if (budget) cfg.budget = budget;
            if (threads) cfg.threads = threads;
            prefrank::run_experiment(cfg, out);
        } else if (*agg) {
            const auto summary = prefrank::aggregate_runs(read_all(agg_inputs));
            std::ofstream f(agg_out);
            if (!f) throw prefrank::ConfigError("cannot write " + agg_out);
            prefrank::write_aggregate_csv(summary, f);
        } else if (*rep) {
            prefrank::emit_report(prefrank::aggregate_runs(read_all(rep_inputs)), rep_dir);
        } else if (*srv) {
            prefrank::serve(serve_opts);
        }
    } catch (const prefrank::Error& e) {
        std::cerr << "prefrank: " << e.code() << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "prefrank: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
