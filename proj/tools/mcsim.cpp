// mcsim: command-line front end for the crowdsourcing simulator.
//
// Errors are written to stderr as a single JSON object
//   {"error": "<code>", "message": "<text>"}
// and the process exits with 2 for usage errors, 1 for everything else.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcs/config_io.hpp"
#include "mcs/error.hpp"
#include "mcs/export.hpp"
#include "mcs/harness.hpp"

namespace {

int report_error(const std::string& code, const std::string& message, int exit_code) {
    std::cerr << mcs::Json{{"error", code}, {"message", message}}.dump() << "\n";
    return exit_code;
}

mcs::Json run_summary(const mcs::ResultSet& rs) {
    mcs::Json acc = mcs::Json::object();
    for (const auto& r : rs.reports) acc[r.method] = r.has_accuracy ? mcs::Json(r.accuracy) : mcs::Json(nullptr);
    mcs::Json j = {{"fingerprint", rs.fingerprint},
                   {"seed", rs.config.seed},
                   {"tasks", rs.tasks.size()},
                   {"answers", rs.answers.size()},
                   {"accuracy", acc},
                   {"efficiency_pairs", rs.efficiency_pairs.size()}};
    if (rs.network) j["availability"] = rs.network->av;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mobile crowdsourcing simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis_name, results_dir, out_file;
    std::vector<double> values;
    std::uint32_t reps = 1, seeds = 10;
    std::size_t k = 2, threads = 0, min_samples = 20;
    double target = 0.9;
    bool no_runs = false;

    auto* run = app.add_subcommand("run", "Run one scenario and export its results");
    run->add_option("--config", config_path, "Scenario JSON")->required();
    run->add_option("--out", out_dir, "Output directory")->required();

    auto* sw = app.add_subcommand("sweep", "Sweep one quality axis with repetitions");
    sw->add_option("--config", config_path, "Base scenario JSON")->required();
    sw->add_option("--axis", axis_name, "answers_per_question | questions_per_worker | spammer_ratio")->required();
    sw->add_option("--values", values, "Comma-separated axis values")->required()->delimiter(',');
    sw->add_option("--reps", reps, "Repetitions per value")->default_val(1);
    sw->add_option("--out", out_dir, "Output directory")->required();
    sw->add_option("--target", target, "Target accuracy")->default_val(0.9);
    sw->add_option("--threads", threads, "Worker threads, 0 = all cores")->default_val(0);
    sw->add_flag("--no-runs", no_runs, "Skip per-run directories");

    auto* hyp = app.add_subcommand("hypotheses", "Paired-seed hypothesis experiments");
    hyp->add_option("--config", config_path, "Scenario JSON")->required();
    hyp->add_option("--seeds", seeds, "Number of paired seeds")->default_val(10);
    hyp->add_option("--out", out_dir, "Output directory")->required();

    auto* learn = app.add_subcommand("learn-locations", "Learn location efficiency from exported runs");
    learn->add_option("--results", results_dir, "Run or sweep directory")->required();
    learn->add_option("--k", k, "Number of clusters")->default_val(2);
    learn->add_option("--out", out_file, "Output CSV")->required();
    learn->add_option("--min-samples", min_samples, "Minimum observations per pair")->default_val(20);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", e.what(), 2);
    }

    try {
        if (*run) {
            const auto cfg = mcs::load_scenario(config_path);
            const auto rs = mcs::run_scenario(cfg);
            mcs::export_results(rs, out_dir);
            std::cout << run_summary(rs).dump() << "\n";
        } else if (*sw) {
            const auto axis = mcs::parse_axis(axis_name);
            if (!axis) return report_error("usage", "unknown axis '" + axis_name + "'", 2);
            mcs::SweepSpec spec;
            spec.axis = *axis;
            spec.values = values;
            spec.repetitions = reps;
            spec.base = mcs::load_scenario(config_path);
            spec.target_accuracy = target;
            spec.threads = threads;
            const auto result = mcs::sweep(spec);
            mcs::export_sweep(result, out_dir, !no_runs);
            mcs::Json first = mcs::Json::object();
            for (const auto& [m, v] : result.first_reaching_target) first[m] = v ? mcs::Json(*v) : mcs::Json(nullptr);
            std::cout << mcs::Json{{"runs", result.runs.size()}, {"first_reaching_target", first}}.dump() << "\n";
        } else if (*hyp) {
            const auto cfg = mcs::load_scenario(config_path);
            const auto report = mcs::hypothesis_experiments(cfg, seeds);
            mcs::export_hypotheses(report, out_dir);
            mcs::Json arr = mcs::Json::array();
            for (const auto& c : report.comparisons) {
                arr.push_back({{"hypothesis", c.hypothesis}, {"metric", c.metric}, {"difference", c.difference},
                               {"paired_se", c.paired_se}});
            }
            std::cout << arr.dump() << "\n";
        } else if (*learn) {
            const auto loaded = mcs::load_observations(results_dir);
            mcs::GeolearnParams params;
            params.min_samples = min_samples;
            params.cluster.k = k;
            const auto learned = mcs::learn_efficiency(loaded.observations, {}, params);
            mcs::write_efficiency_pairs(learned.pairs, loaded.taxonomy, out_file);
            std::cout << mcs::Json{{"runs", loaded.runs},
                                   {"observations", loaded.observations.size()},
                                   {"pairs", learned.pairs.size()},
                                   {"iterations", learned.clusters.iterations}}
                             .dump()
                      << "\n";
        }
    } catch (const mcs::Error& e) {
        return report_error(std::string(mcs::to_string(e.code())), e.what(), 1);
    } catch (const std::exception& e) {
        return report_error("internal", e.what(), 1);
    }
    return EXIT_SUCCESS;
}
