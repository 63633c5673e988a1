#pragma once

// Result files. Every writer is deterministic: same inputs, same bytes.
//
// A run directory holds config.json, events.jsonl, aggregation.csv,
// network.csv, arst.csv, emergencies.csv, profiles.json,
// efficiency_pairs.csv and manifest.json (fingerprint plus a hash of each
// other file).

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcs/geolearn.hpp"
#include "mcs/harness.hpp"

namespace mcs {

// Shortest round-trip decimal form.
std::string format_double(double v);

// FNV-1a of the file contents as 16 hex digits. Throws IoError.
std::string file_hash(const std::filesystem::path& path);

// Creates dir if needed. Throws IoError.
void export_results(const ResultSet& rs, const std::filesystem::path& dir);

// sweep_summary.csv, sweep_runs.csv, sweep.json and one run_<value>_<rep>
// directory per run when `per_run` is set.
void export_sweep(const SweepResult& sweep, const std::filesystem::path& dir, bool per_run = true);

// hypotheses.csv and hypotheses.json.
void export_hypotheses(const HypothesisReport& report, const std::filesystem::path& dir);

void write_efficiency_pairs(std::span<const EfficiencyPair> pairs, const Taxonomy& taxonomy,
                            const std::filesystem::path& file);

struct LoadedObservations {
    Taxonomy taxonomy;
    std::vector<LocationObservation> observations;
    std::size_t runs = 0;
};

// Reads every events.jsonl under `results` (the directory itself or any
// subdirectory, in path order). The taxonomy comes from the first run's
// config.json. Throws IoError, or NoData when no run is found.
LoadedObservations load_observations(const std::filesystem::path& results);

} // namespace mcs
