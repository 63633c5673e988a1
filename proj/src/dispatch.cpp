#include "mcs/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcs/error.hpp"
#include "mcs/kernels.hpp"

namespace mcs {

void ContextWeights::validate() const {
    if (!(w_geo >= 0.0 && w_class >= 0.0 && w_skill >= 0.0 && w_efficiency >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "context weights must be non-negative");
    }
    if (!(w_geo + w_class + w_skill > 0.0)) {
        fail(ErrorCode::InvalidArgument, "w_geo + w_class + w_skill must be positive");
    }
}

void NetworkModel::validate() const {
    auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in01(availability_prob) || !in01(delivery_failure_prob)) {
        fail(ErrorCode::InvalidArgument, "network probabilities must be in [0, 1]");
    }
}

const char* to_string(DeliveryOutcome o) noexcept {
    switch (o) {
    case DeliveryOutcome::Delivered: return "delivered";
    case DeliveryOutcome::Failed: return "failed";
    case DeliveryOutcome::Unreachable: return "unreachable";
    }
    return "unknown";
}

namespace {

double geo_term(const UnitVec& worker, const UnitVec& centre, double radius_m) {
    if (std::isinf(radius_m)) return 0.0;
    return std::min(1.0, chord_sq_to_meters(chord_sq(worker, centre)) / radius_m);
}

double combine(const Worker& worker, const Task& task, const ContextWeights& w, double geo,
               const EfficiencyPrior* prior) {
    const double class_miss = task.admits(worker.location.class_id) ? 0.0 : 1.0;
    const auto& skill = worker.profile.skill;
    const double s = task.task_type < skill.size() ? skill[task.task_type] : 0.5;
    double d = w.w_geo * geo + w.w_class * class_miss + w.w_skill * (1.0 - s);
    if (prior != nullptr && w.w_efficiency > 0.0) {
        auto it = prior->find({worker.location.class_id, task.task_type});
        if (it != prior->end() && !it->second) d += w.w_efficiency;
    }
    return d;
}

std::vector<WorkerId> take_best(std::vector<std::pair<double, WorkerId>> scored, std::size_t limit) {
    const std::size_t keep = std::min(limit, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end());
    std::vector<WorkerId> ranked;
    ranked.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) ranked.push_back(scored[i].second);
    return ranked;
}

void attempt_delivery(const Task& task, const Worker& worker, const NetworkModel& net,
                      double now, Rng& rng, DispatchResult& out) {
    const std::uint32_t bytes = task.payload_bytes + net.per_message_overhead_bytes;
    for (const auto& q : task.questions) {
        DeliveryOutcome outcome = DeliveryOutcome::Unreachable;
        if (rng.uniform() < net.availability_prob) {
            outcome = rng.uniform() < net.delivery_failure_prob ? DeliveryOutcome::Failed
                                                                : DeliveryOutcome::Delivered;
        }
        const bool delivered = outcome == DeliveryOutcome::Delivered;
        out.assignments.push_back({task.id, q.id, worker.id, now, delivered, bytes});
        out.events.push_back({task.id, q.id, worker.id, task.task_type, worker.location.class_id, outcome,
                              outcome == DeliveryOutcome::Unreachable ? 0u : bytes, now});
    }
}

} // namespace

double context_distance(const Worker& worker, const Task& task, const ContextWeights& w,
                        const EfficiencyPrior* prior) {
    const double geo =
        geo_term(to_unit(worker.location.point), to_unit(task.context.center), task.context.radius_m);
    return combine(worker, task, w, geo, prior);
}

std::vector<WorkerId> rank_candidates(const Task& task, std::span<const Worker> workers,
                                      const ContextWeights& w, std::size_t limit,
                                      const EfficiencyPrior* prior) {
    if (workers.empty()) fail(ErrorCode::NoWorkers, "no workers to rank for task " + std::to_string(task.id));
    w.validate();
    std::vector<std::pair<double, WorkerId>> scored;
    scored.reserve(workers.size());
    for (const auto& worker : workers) scored.emplace_back(context_distance(worker, task, w, prior), worker.id);
    return take_best(std::move(scored), limit);
}

std::vector<WorkerId> rank_candidates(const Task& task, const World& world, const ContextWeights& w,
                                      std::size_t limit, const EfficiencyPrior* prior) {
    const std::size_t n = world.workers.size();
    if (n == 0) fail(ErrorCode::NoWorkers, "no workers to rank for task " + std::to_string(task.id));
    w.validate();
    // Batch chord lengths through the active kernel; the per-worker terms
    // match context_distance exactly.
    std::vector<double> c2(n, 0.0);
    const bool bounded = !std::isinf(task.context.radius_m);
    if (bounded) {
        const UnitVec c = to_unit(task.context.center);
        kernels::active().chord_sq(kernels::UnitVecsView{world.ux, world.uy, world.uz}, c.x, c.y, c.z, c2);
    }
    std::vector<std::pair<double, WorkerId>> scored;
    scored.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double geo = bounded ? std::min(1.0, chord_sq_to_meters(c2[i]) / task.context.radius_m) : 0.0;
        scored.emplace_back(combine(world.workers[i], task, w, geo, prior), world.workers[i].id);
    }
    return take_best(std::move(scored), limit);
}

DispatchResult dispatch_task(const Task& task, const World& world, const ContextWeights& w,
                             const NetworkModel& net, std::size_t fanout, Rng& rng,
                             const EfficiencyPrior* prior) {
    if (fanout < 1) fail(ErrorCode::InvalidArgument, "fanout must be >= 1");
    net.validate();
    const auto ranked = rank_candidates(task, world, w, fanout, prior);
    DispatchResult out;
    for (WorkerId id : ranked) attempt_delivery(task, world.workers[id], net, world.clock, rng, out);
    return out;
}

DispatchResult dispatch_random(const Task& task, const World& world, const NetworkModel& net,
                               std::size_t fanout, Rng& rng) {
    if (world.workers.empty()) fail(ErrorCode::NoWorkers, "no workers to dispatch to");
    if (fanout < 1) fail(ErrorCode::InvalidArgument, "fanout must be >= 1");
    net.validate();
    std::vector<WorkerId> ids(world.workers.size());
    std::iota(ids.begin(), ids.end(), 0);
    // Partial Fisher-Yates: the first `keep` slots are a uniform sample.
    const std::size_t keep = std::min(fanout, ids.size());
    for (std::size_t i = 0; i < keep; ++i) std::swap(ids[i], ids[i + rng.index(ids.size() - i)]);
    ids.resize(keep);
    std::sort(ids.begin(), ids.end());
    DispatchResult out;
    for (WorkerId id : ids) attempt_delivery(task, world.workers[id], net, world.clock, rng, out);
    return out;
}

std::vector<WorkerId> workers_in_geofence(const Task& task, const World& world) {
    const std::size_t n = world.workers.size();
    std::vector<std::uint8_t> mask(n);
    const UnitVec c = to_unit(task.context.center);
    const kernels::UnitVecsView view{world.ux, world.uy, world.uz};
    kernels::active().within(view, c.x, c.y, c.z, meters_to_chord_sq(task.context.radius_m), mask);
    std::vector<WorkerId> inside;
    for (std::size_t i = 0; i < n; ++i) {
        if (mask[i]) inside.push_back(world.workers[i].id);
    }
    return inside;
}

DispatchResult emergency_broadcast(const Task& task, const World& world, const NetworkModel& net,
                                   Rng& rng) {
    if (task.kind != TaskKind::Emergency) {
        fail(ErrorCode::NotEmergency, "task " + std::to_string(task.id) + " is not an emergency task");
    }
    net.validate();
    DispatchResult out;
    for (WorkerId id : workers_in_geofence(task, world)) {
        attempt_delivery(task, world.workers[id], net, world.clock, rng, out);
    }
    return out;
}

namespace {

NetworkMetrics finish(NetworkMetrics m, std::uint64_t delivered_bytes) {
    const double attempted = static_cast<double>(m.attempted);
    m.av = static_cast<double>(m.attempted - m.unreachable) / attempted;
    m.fail_r = static_cast<double>(m.failed + m.unreachable) / attempted;
    m.tu = m.delivered > 0 ? static_cast<double>(delivered_bytes) / static_cast<double>(m.delivered) : 0.0;
    return m;
}

void count(NetworkMetrics& m, std::uint64_t& bytes, const DeliveryEvent& e) {
    ++m.attempted;
    switch (e.outcome) {
    case DeliveryOutcome::Delivered:
        ++m.delivered;
        bytes += e.bytes;
        break;
    case DeliveryOutcome::Failed: ++m.failed; break;
    case DeliveryOutcome::Unreachable: ++m.unreachable; break;
    }
}

} // namespace

NetworkMetrics network_metrics(std::span<const DeliveryEvent> events) {
    if (events.empty()) fail(ErrorCode::NoEvents, "no delivery events");
    NetworkMetrics m;
    std::uint64_t bytes = 0;
    for (const auto& e : events) count(m, bytes, e);
    return finish(m, bytes);
}

std::map<TaskId, NetworkMetrics> network_metrics_by_task(std::span<const DeliveryEvent> events) {
    std::map<TaskId, std::pair<NetworkMetrics, std::uint64_t>> acc;
    for (const auto& e : events) {
        auto& [m, bytes] = acc[e.task_id];
        count(m, bytes, e);
    }
    std::map<TaskId, NetworkMetrics> out;
    for (const auto& [id, mb] : acc) out.emplace(id, finish(mb.first, mb.second));
    return out;
}

} // namespace mcs
