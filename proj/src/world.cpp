#include "mcs/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mcs/error.hpp"
#include "mcs/rng.hpp"

namespace mcs {

std::size_t MobilitySchedule::segment_at(double t) const {
    double within = std::fmod(std::max(t, 0.0), day_length_s);
    auto it = std::upper_bound(segments.begin(), segments.end(), within,
                               [](double v, const DwellSegment& s) { return v < s.start_s; });
    return static_cast<std::size_t>(std::distance(segments.begin(), it)) - 1;
}

double MobilitySchedule::dwell_of(std::size_t segment) const {
    const double end = segment + 1 < segments.size() ? segments[segment + 1].start_s : day_length_s;
    return end - segments[segment].start_s;
}

void MobilitySchedule::validate() const {
    if (segments.empty()) fail(ErrorCode::InvalidArgument, "schedule has no segments");
    if (!(day_length_s > 0.0)) fail(ErrorCode::InvalidArgument, "schedule day length must be positive");
    if (segments.front().start_s != 0.0) fail(ErrorCode::InvalidArgument, "schedule must start at 0");
    for (std::size_t i = 1; i < segments.size(); ++i) {
        if (!(segments[i].start_s > segments[i - 1].start_s)) {
            fail(ErrorCode::InvalidArgument, "schedule segments overlap or are out of order");
        }
    }
    if (!(segments.back().start_s < day_length_s)) {
        fail(ErrorCode::InvalidArgument, "schedule segment starts after the end of the day");
    }
}

ActivityHistory record_activity(ActivityHistory history, const ActivityRecord& record) {
    if (!(record.response_s > 0.0)) {
        fail(ErrorCode::InvalidArgument, "activity record response time must be positive");
    }
    if (!history.records.empty() && record.timestamp < history.records.back().timestamp) {
        fail(ErrorCode::OutOfOrder, "activity record at t=" + std::to_string(record.timestamp) +
                                        " predates last record at t=" +
                                        std::to_string(history.records.back().timestamp));
    }
    history.records.push_back(record);
    return history;
}

namespace {

std::vector<double> schedule_affinity(const MobilitySchedule& schedule, const LocationIndex& index,
                                      const Taxonomy& taxonomy) {
    std::vector<double> affinity(taxonomy.class_count(), 0.0);
    double total = 0.0;
    for (std::size_t s = 0; s < schedule.segments.size(); ++s) {
        const Place* place = index.find(schedule.segments[s].place);
        const ClassId c = place ? place->class_id : index.default_class();
        const double dwell = schedule.dwell_of(s);
        affinity[c] += dwell;
        total += dwell;
    }
    if (total > 0.0) {
        for (double& a : affinity) a /= total;
    } else {
        affinity[taxonomy.default_class] = 1.0;
    }
    return affinity;
}

} // namespace

WorkerProfile prior_profile(const MobilitySchedule& schedule, const LocationIndex& index,
                            const Taxonomy& taxonomy) {
    WorkerProfile p;
    const std::size_t types = taxonomy.task_type_count();
    p.skill.assign(types, 0.5);
    p.mean_prs.assign(types, 0.0);
    p.sample_counts.assign(types, 0);
    p.class_affinity = schedule_affinity(schedule, index, taxonomy);
    p.multilabel_willingness = 0.5;
    return p;
}

WorkerProfile build_profile(const ActivityHistory& history, const MobilitySchedule& schedule,
                            const LocationIndex& index, const Taxonomy& taxonomy,
                            const ProfileParams& params) {
    if (!(params.alpha > 0.0)) fail(ErrorCode::InvalidArgument, "profile smoothing alpha must be positive");
    const std::size_t types = taxonomy.task_type_count();
    std::vector<std::uint32_t> answered(types, 0), correct(types, 0);
    std::vector<double> prs_sum(types, 0.0);
    std::size_t multilabel_taken = 0;

    for (const auto& r : history.records) {
        if (r.task_type >= types) fail(ErrorCode::InvalidArgument, "activity record has unknown task type");
        ++answered[r.task_type];
        correct[r.task_type] += r.correct ? 1 : 0;
        prs_sum[r.task_type] += personal_response_time(params.prs.for_type(r.task_type), r.response_s);
        multilabel_taken += r.multi_label ? 1 : 0;
    }

    WorkerProfile p;
    const double a = params.alpha;
    p.skill.resize(types);
    p.mean_prs.resize(types);
    p.sample_counts = answered;
    for (std::size_t t = 0; t < types; ++t) {
        p.skill[t] = (correct[t] + a) / (answered[t] + 2.0 * a);
        p.mean_prs[t] = answered[t] > 0 ? prs_sum[t] / answered[t] : 0.0;
    }
    p.multilabel_willingness = std::clamp(
        (static_cast<double>(multilabel_taken) + a) / (static_cast<double>(history.multilabel_offers) + 2.0 * a),
        0.0, 1.0);
    p.class_affinity = schedule_affinity(schedule, index, taxonomy);
    return p;
}

const char* to_string(StrategyKind kind) noexcept {
    switch (kind) {
    case StrategyKind::Honest: return "honest";
    case StrategyKind::UniformSpammer: return "uniform_spammer";
    case StrategyKind::FixedAnswerSpammer: return "fixed_answer_spammer";
    case StrategyKind::Sloth: return "sloth";
    }
    return "unknown";
}

std::uint32_t spammer_count(double ratio, std::uint32_t n_workers) {
    return static_cast<std::uint32_t>(std::lround(ratio * static_cast<double>(n_workers)));
}

namespace {

bool unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

} // namespace

void WorldConfig::validate() const {
    taxonomy.validate();
    if (!unit_interval(spammer_ratio)) fail(ErrorCode::InvalidConfig, "spammer_ratio must be in [0, 1]");
    if (spammer_ratio > kMaxDefaultSpammerRatio && !allow_high_spammer_ratio) {
        fail(ErrorCode::InvalidConfig,
             "spammer_ratio above 0.4 requires allow_high_spammer_ratio");
    }
    if (!unit_interval(uniform_spammer_share)) fail(ErrorCode::InvalidConfig, "uniform_spammer_share must be in [0, 1]");
    if (!unit_interval(sloth_fraction)) fail(ErrorCode::InvalidConfig, "sloth_fraction must be in [0, 1]");
    if (!(sloth_min >= 1.0 && sloth_max >= sloth_min)) {
        fail(ErrorCode::InvalidConfig, "sloth multiplier range must satisfy 1 <= min <= max");
    }
    if (!unit_interval(multilabel_acceptance)) fail(ErrorCode::InvalidConfig, "multilabel_acceptance must be in [0, 1]");
    switch (reliability.kind) {
    case ReliabilityModel::Kind::Uniform:
        if (!(unit_interval(reliability.lo) && unit_interval(reliability.hi) && reliability.lo <= reliability.hi)) {
            fail(ErrorCode::InvalidConfig, "uniform reliability range must satisfy 0 <= lo <= hi <= 1");
        }
        break;
    case ReliabilityModel::Kind::Mixture:
        if (!(unit_interval(reliability.p_high) && unit_interval(reliability.high) && unit_interval(reliability.low))) {
            fail(ErrorCode::InvalidConfig, "mixture reliability parameters must be in [0, 1]");
        }
        break;
    case ReliabilityModel::Kind::Cycle:
        if (reliability.values.empty()) fail(ErrorCode::InvalidConfig, "cycle reliability needs values");
        for (double v : reliability.values) {
            if (!unit_interval(v)) fail(ErrorCode::InvalidConfig, "cycle reliability values must be in [0, 1]");
        }
        break;
    }
    if (specialization && !(unit_interval(specialization->matched) && unit_interval(specialization->unmatched))) {
        fail(ErrorCode::InvalidConfig, "specialization reliabilities must be in [0, 1]");
    }
    if (schedule.min_segments < 1 || schedule.max_segments < schedule.min_segments) {
        fail(ErrorCode::InvalidConfig, "schedule segment range must satisfy 1 <= min <= max");
    }
    if (!(schedule.day_length_s > 0.0)) fail(ErrorCode::InvalidConfig, "day_length_s must be positive");
    if (!unit_interval(schedule.jitter_fraction)) fail(ErrorCode::InvalidConfig, "jitter_fraction must be in [0, 1]");
    for (const auto& p : places) {
        if (!taxonomy.has_class(p.class_id)) {
            fail(ErrorCode::InvalidConfig, "place " + std::to_string(p.id) + " has unknown class");
        }
    }
}

void World::refresh_positions() {
    const std::size_t n = workers.size();
    ux.resize(n);
    uy.resize(n);
    uz.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const UnitVec u = to_unit(workers[i].location.point);
        ux[i] = u.x;
        uy[i] = u.y;
        uz[i] = u.z;
    }
}

GeoPoint dwell_position(const Place& place, std::uint64_t seed, WorkerId worker,
                        std::size_t segment, double jitter_fraction) {
    Rng rng(mix_seed(mix_seed(seed ^ (static_cast<std::uint64_t>(worker) << 20)) + segment));
    const double bearing = 2.0 * std::numbers::pi * rng.uniform();
    const double dist = jitter_fraction * place.radius_m * std::sqrt(rng.uniform());
    const double lat0 = place.center.lat();
    const double dlat = dist * std::cos(bearing) / kEarthRadiusM * 180.0 / std::numbers::pi;
    const double coslat = std::max(std::cos(lat0 * std::numbers::pi / 180.0), 1e-6);
    const double dlon = dist * std::sin(bearing) / (kEarthRadiusM * coslat) * 180.0 / std::numbers::pi;
    const double lat = std::clamp(lat0 + dlat, -90.0, 90.0);
    double lon = place.center.lon() + dlon;
    if (lon >= 180.0) lon -= 360.0;
    if (lon < -180.0) lon += 360.0;
    return GeoPoint(lat, lon);
}

namespace {

void relocate(World& world, double t) {
    for (auto& w : world.workers) {
        const std::size_t seg = w.schedule.segment_at(t);
        const PlaceId pid = w.schedule.segments[seg].place;
        const Place* place = world.index.find(pid);
        if (place == nullptr) fail(ErrorCode::InvalidConfig, "schedule references unknown place");
        w.place = pid;
        w.location.point = dwell_position(*place, world.seed, w.id, seg, world.jitter_fraction);
        w.location.class_id = classify_location(w.location.point, world.index);
    }
    world.clock = t;
    world.refresh_positions();
}

MobilitySchedule make_schedule(Rng& rng, const ScheduleParams& sp, std::size_t n_places,
                               std::span<const Place> places) {
    const std::uint32_t span = sp.max_segments - sp.min_segments + 1;
    const std::uint32_t count = sp.min_segments + static_cast<std::uint32_t>(rng.index(span));
    std::vector<double> starts{0.0};
    for (std::uint32_t i = 1; i < count; ++i) starts.push_back(rng.uniform(0.0, sp.day_length_s));
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());

    MobilitySchedule s;
    s.day_length_s = sp.day_length_s;
    for (double start : starts) s.segments.push_back({start, places[rng.index(n_places)].id});
    return s;
}

} // namespace

World generate_world(const WorldConfig& config, std::uint64_t seed) {
    if (config.n_workers == 0) fail(ErrorCode::EmptyWorld, "world has zero workers");
    if (config.places.empty()) fail(ErrorCode::EmptyWorld, "world has zero places");
    config.validate();

    World world;
    world.taxonomy = config.taxonomy;
    world.index = LocationIndex(config.places, config.taxonomy.default_class);
    world.seed = seed;
    world.jitter_fraction = config.schedule.jitter_fraction;

    Rng rng(derive_seed(seed, "world"));
    const std::uint32_t n = config.n_workers;
    const std::size_t types = config.taxonomy.task_type_count();

    // Strategy assignment: a seeded permutation picks exactly round(ratio*n)
    // spammers, then the sloth subset from the remaining honest workers.
    std::vector<WorkerId> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<WorkerId>(order));
    const std::uint32_t n_spam = spammer_count(config.spammer_ratio, n);
    const auto n_uniform = static_cast<std::uint32_t>(std::lround(config.uniform_spammer_share * n_spam));
    const auto n_sloth = static_cast<std::uint32_t>(std::lround(config.sloth_fraction * (n - n_spam)));
    std::vector<StrategyKind> kinds(n, StrategyKind::Honest);
    for (std::uint32_t i = 0; i < n_spam; ++i) {
        kinds[order[i]] = i < n_uniform ? StrategyKind::UniformSpammer : StrategyKind::FixedAnswerSpammer;
    }
    for (std::uint32_t i = n_spam; i < n_spam + n_sloth; ++i) kinds[order[i]] = StrategyKind::Sloth;

    const auto places = world.index.places();
    std::size_t honest_seen = 0;
    world.workers.reserve(n);
    for (WorkerId id = 0; id < n; ++id) {
        Worker w;
        w.id = id;
        w.schedule = make_schedule(rng, config.schedule, places.size(), places);
        w.strategy.kind = kinds[id];

        const auto& rm = config.reliability;
        double rel = 0.0;
        switch (rm.kind) {
        case ReliabilityModel::Kind::Uniform: rel = rng.uniform(rm.lo, rm.hi); break;
        case ReliabilityModel::Kind::Mixture: rel = rng.bernoulli(rm.p_high) ? rm.high : rm.low; break;
        case ReliabilityModel::Kind::Cycle:
            rel = rm.values[honest_seen % rm.values.size()];
            break;
        }
        if (!w.strategy.is_spammer()) ++honest_seen;

        if (config.specialization) {
            const auto specialty = static_cast<std::size_t>(id % types);
            w.type_reliability.assign(types, config.specialization->unmatched);
            w.type_reliability[specialty] = config.specialization->matched;
            rel = std::accumulate(w.type_reliability.begin(), w.type_reliability.end(), 0.0) /
                  static_cast<double>(types);
        } else {
            w.type_reliability.assign(types, rel);
        }
        w.reliability = rel;

        if (w.strategy.kind == StrategyKind::Sloth) {
            w.strategy.slowness = rng.uniform(config.sloth_min, config.sloth_max);
        }
        w.multilabel_acceptance = config.multilabel_acceptance;
        w.profile = prior_profile(w.schedule, world.index, world.taxonomy);
        world.workers.push_back(std::move(w));
    }
    relocate(world, 0.0);
    return world;
}

World step_mobility(World world, double to) {
    if (to < world.clock) {
        fail(ErrorCode::ClockRegression, "cannot step world from t=" + std::to_string(world.clock) +
                                             " back to t=" + std::to_string(to));
    }
    relocate(world, to);
    return world;
}

} // namespace mcs
