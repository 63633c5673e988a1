#pragma once

// Scenario orchestration: one full simulation run, parameter sweeps over the
// quality model's axes, the three hypothesis experiments and multi-round
// location learning.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcs/dispatch.hpp"
#include "mcs/domain.hpp"
#include "mcs/geolearn.hpp"
#include "mcs/quality.hpp"
#include "mcs/world.hpp"

namespace mcs {

struct TaskGenConfig {
    std::uint32_t normal_tasks = 100;
    std::uint32_t emergency_tasks = 0;
    // Normal task types, assigned cyclically; empty means every type.
    std::vector<TaskTypeId> task_types;
    std::uint32_t questions_per_task = 10;
    std::uint32_t labels_per_question = 2;
    double multi_label_fraction = 0.0;
    double normal_radius_m = std::numeric_limits<double>::infinity();
    double emergency_radius_m = 1'000.0;
    std::uint32_t payload_bytes = 512;
    // Admissible location classes per task type; absent means all.
    std::map<TaskTypeId, std::vector<ClassId>> admissible;
    // The earliest tasks are gold warm-up tasks, dispatched at random, used
    // to build profiles and excluded from accuracy.
    std::uint32_t warmup_tasks = 0;
};

enum class DispatchPolicy { Ranked, Random };
enum class EmergencyMode { Broadcast, Ranked };

struct DispatchConfig {
    ContextWeights weights;
    std::uint32_t fanout = 5;
    DispatchPolicy policy = DispatchPolicy::Ranked;
    EmergencyMode emergency = EmergencyMode::Broadcast;
};

// How the current location class changes a worker's behaviour.
struct ClassBehavior {
    double busyness = 1.0; // multiplies read delay and response time
    double focus = 1.0;    // scales accuracy above chance, in [0, 1]
};

struct BehaviorConfig {
    double response_log_mean = 2.9957322735539909; // ln 20 s
    double response_log_sd = 0.5;
    double read_log_mean = 2.3025850929940459; // ln 10 s
    double read_log_sd = 0.7;
    std::map<ClassId, ClassBehavior> by_class; // absent classes behave neutrally

    ClassBehavior for_class(ClassId c) const {
        auto it = by_class.find(c);
        return it == by_class.end() ? ClassBehavior{} : it->second;
    }
};

inline const std::vector<std::string> kAllMethods = {"majority", "weighted", "em"};

struct QualityConfig {
    PrsTable prs;
    double theta = 0.5;
    EmParams em;
    double w_min = kDefaultMinCredibility;
    double profile_alpha = 1.0;
    double gamification_half_life_s = 86'400.0;
    double gamification_w_acc = 0.5;
    std::vector<std::string> methods = kAllMethods;
    // Wall-clock timing makes outputs non-reproducible, so it is opt-in.
    bool measure_compute_time = false;
};

struct GeolearnConfig {
    bool enabled = true;
    GeolearnParams params;
};

struct ScenarioConfig {
    WorldConfig world;
    TaskGenConfig tasks;
    DispatchConfig dispatch;
    NetworkModel network;
    BehaviorConfig behavior;
    QualityConfig quality;
    GeolearnConfig geolearn;
    std::uint64_t seed = 1;
    double duration_s = 86'400.0;
    double emergency_max_radius_m = kDefaultEmergencyMaxRadiusM;

    // Throws InvalidConfig describing the first problem found.
    void validate() const;

    // Standard taxonomy, a grid of places around Warsaw, 100 workers.
    static ScenarioConfig defaults();
};

// Places on a square grid around origin, classes cycled over every
// non-default class of the taxonomy.
std::vector<Place> grid_places(const Taxonomy& taxonomy, const GeoPoint& origin, std::size_t count,
                               double spacing_m, double radius_m);

struct QuestionOutcome {
    QuestionId question_id = 0;
    TaskId task_id = 0;
    TaskTypeId task_type = 0;
    bool multi_label = false;
    bool warmup = false;
    LabelSet truth;
    std::size_t answers = 0;
    std::map<std::string, LabelSet> estimates; // by method; evaluated questions only
};

struct EmergencyOutcome {
    TaskId task_id = 0;
    std::size_t inside = 0;         // workers inside the geofence at dispatch
    std::size_t reached_inside = 0; // of those, with a delivered assignment
    double coverage = 0.0;          // reached_inside / inside, 0 when inside == 0
    bool answered = false;
    double time_to_first_answer = 0.0; // sent_at - created_at of the first answer
    bool flagged = false;              // nobody inside the geofence
};

struct WorkerSummary {
    WorkerId id = 0;
    Strategy strategy;
    double reliability = 0.0;
    WorkerProfile profile;
    std::size_t answers = 0;
    double gamification = 0.0;
    std::size_t rank = 0;
};

struct ResultSet {
    ScenarioConfig config;
    std::string fingerprint;
    std::vector<Task> tasks;
    std::vector<DeliveryEvent> deliveries;
    std::vector<Answer> answers; // each references a delivered assignment
    std::vector<QuestionOutcome> questions;
    std::vector<AggregationReport> reports; // one per configured method
    std::optional<NetworkMetrics> network;
    std::map<TaskId, NetworkMetrics> network_by_task;
    std::map<TaskId, ArstReport> arst;
    std::vector<EmergencyOutcome> emergencies;
    std::vector<WorkerSummary> workers;
    std::vector<EfficiencyPair> efficiency_pairs;
    std::string geolearn_note; // why pairs are empty, when they are
    double answers_per_question = 0.0; // configured fanout
    double questions_per_worker = 0.0; // delivered assignments per worker
    double mean_response_s = 0.0;      // evaluated answers
    double mean_prs = 0.0;             // evaluated answers

    const AggregationReport* report(std::string_view method) const;
};

// Canonical JSON of the config hashed with FNV-1a, as 16 hex digits.
std::string config_fingerprint(const ScenarioConfig& config);

// Full simulation. Bit-reproducible for a fixed config (which carries the
// seed). `prior` biases ranked dispatch when w_efficiency > 0.
ResultSet run_scenario(const ScenarioConfig& config, const EfficiencyPrior* prior = nullptr);

// Observations for the location learner: one per delivered assignment.
std::vector<LocationObservation> location_observations(const ResultSet& rs);

enum class SweepAxis { AnswersPerQuestion, QuestionsPerWorker, SpammerRatio };

const char* to_string(SweepAxis axis) noexcept;
std::optional<SweepAxis> parse_axis(std::string_view name);

struct SweepSpec {
    SweepAxis axis = SweepAxis::SpammerRatio;
    std::vector<double> values;
    std::uint32_t repetitions = 1;
    ScenarioConfig base;
    double target_accuracy = 0.9;
    std::size_t threads = 0; // 0 = hardware concurrency

    void validate() const;
};

// Config for one sweep point; repetition r runs with seed base.seed + r.
ScenarioConfig sweep_point(const SweepSpec& spec, double value, std::uint32_t repetition);

struct SweepRow {
    double axis_value = 0.0;
    std::string method;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0; // sample standard deviation, 0 for one run
    std::size_t runs = 0;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::SpammerRatio;
    std::vector<double> values;
    std::uint32_t repetitions = 0;
    std::vector<ResultSet> runs; // ordered by (value, repetition)
    std::vector<SweepRow> summary;
    // Smallest axis value whose mean accuracy reaches the target, by method.
    std::map<std::string, std::optional<double>> first_reaching_target;
};

SweepResult sweep(const SweepSpec& spec);

struct Comparison {
    std::string hypothesis; // "H1", "H2", "H3"
    std::string metric;
    std::string arm_a, arm_b;
    std::vector<double> values_a, values_b; // per seed
    double mean_a = 0.0, mean_b = 0.0;
    double difference = 0.0; // mean_a - mean_b
    double paired_se = 0.0;  // standard error of the per-seed differences
    std::size_t flagged = 0; // runs with an anomaly (e.g. empty geofence)
};

struct HypothesisReport {
    std::vector<Comparison> comparisons;
};

// Emergency broadcast vs profile-ranked dispatch on emergency tasks: time to
// first answer and geofence coverage.
std::vector<Comparison> hypothesis_emergency(const ScenarioConfig& config, std::uint32_t seeds);
// Profile-aware ranking vs random assignment: accuracy and mean PRS.
std::vector<Comparison> hypothesis_profiles(const ScenarioConfig& config, std::uint32_t seeds);
// Class-admissible geofenced dispatch vs geography-blind dispatch: mean
// response time and accuracy.
std::vector<Comparison> hypothesis_geofence(const ScenarioConfig& config, std::uint32_t seeds);

// All three, each over `seeds` paired seeds config.seed + i.
HypothesisReport hypothesis_experiments(const ScenarioConfig& config, std::uint32_t seeds);

struct LearnRound {
    std::uint32_t round = 0;
    std::vector<EfficiencyPair> pairs;
    std::size_t churn = 0; // verdict changes against the previous round
    double majority_accuracy = 0.0;
};

// Repeated run -> learn rounds; round r runs with seed config.seed + r and the
// previous round's pairs as dispatch prior.
std::vector<LearnRound> learn_rounds(const ScenarioConfig& config, std::uint32_t rounds);

} // namespace mcs
