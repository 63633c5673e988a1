#pragma once

// Synthetic worker population: mobility schedules, activity histories,
// derived profiles and spammer injection.

#include <cstdint>
#include <optional>
#include <vector>

#include "mcs/domain.hpp"
#include "mcs/response.hpp"

namespace mcs {

struct DwellSegment {
    double start_s = 0.0;
    PlaceId place = 0;

    friend bool operator==(const DwellSegment&, const DwellSegment&) = default;
};

// Piecewise dwell over one simulated day. Times past the day wrap around.
struct MobilitySchedule {
    std::vector<DwellSegment> segments; // first starts at 0, strictly increasing
    double day_length_s = 86'400.0;

    // Index of the segment containing t (after wrapping into the day).
    std::size_t segment_at(double t) const;
    PlaceId place_at(double t) const { return segments[segment_at(t)].place; }
    double dwell_of(std::size_t segment) const;
    // Throws InvalidArgument when empty, not starting at 0 or out of order.
    void validate() const;

    friend bool operator==(const MobilitySchedule&, const MobilitySchedule&) = default;
};

struct ActivityRecord {
    TaskId task_id = 0;
    TaskTypeId task_type = 0;
    ClassId class_id = 0;  // worker's location class when answering
    double response_s = 0; // PRS input t, > 0
    bool correct = false;
    bool multi_label = false;
    double timestamp = 0;

    friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

struct ActivityHistory {
    std::vector<ActivityRecord> records; // timestamps non-decreasing
    std::size_t multilabel_offers = 0;   // multi-label assignments delivered

    friend bool operator==(const ActivityHistory&, const ActivityHistory&) = default;
};

// Appends record; throws OutOfOrder if it predates the last record and
// InvalidArgument if response_s <= 0.
ActivityHistory record_activity(ActivityHistory history, const ActivityRecord& record);

struct WorkerProfile {
    std::vector<double> skill;          // by task type, Laplace smoothed
    std::vector<double> mean_prs;       // by task type, 0 when unsampled
    std::vector<double> class_affinity; // by location class, sums to 1
    double multilabel_willingness = 0.5;
    std::vector<std::uint32_t> sample_counts; // by task type

    friend bool operator==(const WorkerProfile&, const WorkerProfile&) = default;
};

struct ProfileParams {
    double alpha = 1.0; // pseudo-count, > 0
    PrsTable prs;
};

WorkerProfile build_profile(const ActivityHistory& history, const MobilitySchedule& schedule,
                            const LocationIndex& index, const Taxonomy& taxonomy,
                            const ProfileParams& params);

// Profile before any activity: uniform skill prior and schedule affinity.
WorkerProfile prior_profile(const MobilitySchedule& schedule, const LocationIndex& index,
                            const Taxonomy& taxonomy);

enum class StrategyKind { Honest, UniformSpammer, FixedAnswerSpammer, Sloth };

struct Strategy {
    StrategyKind kind = StrategyKind::Honest;
    std::uint32_t fixed_label_index = 0; // FixedAnswerSpammer: index into candidates
    double slowness = 1.0;               // Sloth: response multiplier >= 1

    bool is_spammer() const noexcept {
        return kind == StrategyKind::UniformSpammer || kind == StrategyKind::FixedAnswerSpammer;
    }
    friend bool operator==(const Strategy&, const Strategy&) = default;
};

const char* to_string(StrategyKind kind) noexcept;

struct Worker {
    WorkerId id = 0;
    WorkerLocation location;
    PlaceId place = 0;
    MobilitySchedule schedule;
    double reliability = 1.0;               // mean honest accuracy
    std::vector<double> type_reliability;   // honest accuracy by task type
    Strategy strategy;
    double multilabel_acceptance = 1.0;     // probability of taking a multi-label job
    WorkerProfile profile;
    ActivityHistory history;

    friend bool operator==(const Worker&, const Worker&) = default;
};

struct ReliabilityModel {
    enum class Kind { Uniform, Mixture, Cycle };
    Kind kind = Kind::Uniform;
    double lo = 0.6, hi = 0.95;          // Uniform
    double p_high = 0.5;                 // Mixture: P(high)
    double high = 0.9, low = 0.6;        // Mixture
    std::vector<double> values;          // Cycle: honest worker i gets values[i % size]
};

// Per-type accuracy: a worker's specialty type (i mod #types) answers at
// `matched`, every other type at `unmatched`.
struct Specialization {
    double matched = 0.9;
    double unmatched = 0.55;
};

struct ScheduleParams {
    std::uint32_t min_segments = 2;
    std::uint32_t max_segments = 5;
    double day_length_s = 86'400.0;
    // Workers sit within this fraction of a place's radius from its centre.
    double jitter_fraction = 0.5;
};

struct WorldConfig {
    Taxonomy taxonomy = Taxonomy::standard();
    std::vector<Place> places;
    std::uint32_t n_workers = 100;
    double spammer_ratio = 0.0;
    bool allow_high_spammer_ratio = false; // lifts the 0.4 cap
    double uniform_spammer_share = 0.5;    // remaining spammers answer a fixed label
    double sloth_fraction = 0.0;           // of honest workers
    double sloth_min = 1.5, sloth_max = 3.0;
    ReliabilityModel reliability;
    std::optional<Specialization> specialization;
    double multilabel_acceptance = 1.0;
    ScheduleParams schedule;

    void validate() const;
};

inline constexpr double kMaxDefaultSpammerRatio = 0.4;

// round(ratio * n) with halves away from zero.
std::uint32_t spammer_count(double ratio, std::uint32_t n_workers);

class World {
public:
    Taxonomy taxonomy;
    LocationIndex index;
    std::vector<Worker> workers; // ids 0..n-1 in order
    double clock = 0.0;
    std::uint64_t seed = 0;
    double jitter_fraction = 0.5;

    // Unit vectors of current worker positions, kept in step with workers.
    std::vector<double> ux, uy, uz;

    void refresh_positions();

    friend bool operator==(const World&, const World&) = default;
};

// Deterministic in (config, seed). Throws EmptyWorld without workers or
// places and InvalidConfig for out-of-range parameters.
World generate_world(const WorldConfig& config, std::uint64_t seed);

// Relocates every worker to its scheduled place at `to`. Throws
// ClockRegression if to < world.clock.
World step_mobility(World world, double to);

// Position of worker inside place for schedule segment `segment`; a pure
// function of the world seed so repeated visits land on the same spot.
GeoPoint dwell_position(const Place& place, std::uint64_t seed, WorkerId worker,
                        std::size_t segment, double jitter_fraction);

} // namespace mcs
