#pragma once

// Task-to-worker matching by context distance, simulated lossy delivery,
// emergency geofenced broadcast and the Av/Tu/FailR network benchmarks.

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "mcs/domain.hpp"
#include "mcs/rng.hpp"
#include "mcs/world.hpp"

namespace mcs {

struct ContextWeights {
    double w_geo = 1.0;
    double w_class = 1.0;
    double w_skill = 1.0;
    // Penalty for a (class, task type) pair learned to be inefficient.
    double w_efficiency = 0.0;

    void validate() const;
};

// (location class, task type) -> true when learned efficient.
using EfficiencyPrior = std::map<std::pair<ClassId, TaskTypeId>, bool>;

struct NetworkModel {
    double availability_prob = 1.0;
    double delivery_failure_prob = 0.0;
    std::uint32_t per_message_overhead_bytes = 0;

    void validate() const;
};

enum class DeliveryOutcome { Delivered, Failed, Unreachable };

const char* to_string(DeliveryOutcome o) noexcept;

struct Assignment {
    TaskId task_id = 0;
    QuestionId question_id = 0;
    WorkerId worker_id = 0;
    double dispatched_at = 0.0;
    bool delivered = false;
    std::uint32_t payload_bytes = 0;
};

struct DeliveryEvent {
    TaskId task_id = 0;
    QuestionId question_id = 0;
    WorkerId worker_id = 0;
    TaskTypeId task_type = 0;
    ClassId class_id = 0; // worker's class at dispatch
    DeliveryOutcome outcome = DeliveryOutcome::Delivered;
    std::uint32_t bytes = 0; // 0 when the worker was unreachable
    double timestamp = 0.0;

    friend bool operator==(const DeliveryEvent&, const DeliveryEvent&) = default;
};

struct DispatchResult {
    std::vector<Assignment> assignments;
    std::vector<DeliveryEvent> events; // parallel to assignments
};

struct NetworkMetrics {
    std::size_t attempted = 0;
    std::size_t delivered = 0;
    std::size_t failed = 0;
    std::size_t unreachable = 0;
    double av = 0.0;     // reachable / attempted
    double tu = 0.0;     // bytes per delivered assignment
    double fail_r = 0.0; // (failed + unreachable) / attempted
};

// w_geo * min(1, d / radius) + w_class * [class not admissible]
//   + w_skill * (1 - skill[type]) + w_efficiency * [pair learned inefficient].
double context_distance(const Worker& worker, const Task& task, const ContextWeights& w,
                        const EfficiencyPrior* prior = nullptr);

// Workers by ascending context distance, smaller id first on ties, truncated
// to `limit`. Throws NoWorkers on an empty population.
std::vector<WorkerId> rank_candidates(const Task& task, std::span<const Worker> workers,
                                      const ContextWeights& w, std::size_t limit,
                                      const EfficiencyPrior* prior = nullptr);

// Same ranking over a world's population, with the geographic term computed
// in batch from the cached worker unit vectors.
std::vector<WorkerId> rank_candidates(const Task& task, const World& world, const ContextWeights& w,
                                      std::size_t limit, const EfficiencyPrior* prior = nullptr);

// One assignment per question for each of the top-`fanout` workers.
DispatchResult dispatch_task(const Task& task, const World& world, const ContextWeights& w,
                             const NetworkModel& net, std::size_t fanout, Rng& rng,
                             const EfficiencyPrior* prior = nullptr);

// Uniformly random `fanout` workers (no profile information).
DispatchResult dispatch_random(const Task& task, const World& world, const NetworkModel& net,
                               std::size_t fanout, Rng& rng);

// Ids of workers within task.context.radius_m of the task centre.
std::vector<WorkerId> workers_in_geofence(const Task& task, const World& world);

// Attempts delivery to every worker inside the geofence, ignoring profiles.
// Throws NotEmergency for normal tasks.
DispatchResult emergency_broadcast(const Task& task, const World& world, const NetworkModel& net,
                                   Rng& rng);

// Throws NoEvents on empty input.
NetworkMetrics network_metrics(std::span<const DeliveryEvent> events);

// Same metrics grouped by task id.
std::map<TaskId, NetworkMetrics> network_metrics_by_task(std::span<const DeliveryEvent> events);

} // namespace mcs
