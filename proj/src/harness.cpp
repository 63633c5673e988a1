#include "mcs/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <set>
#include <thread>

#include "mcs/config_io.hpp"
#include "mcs/error.hpp"
#include "mcs/rng.hpp"

namespace mcs {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) fail(ErrorCode::InvalidConfig, message);
}

} // namespace

void ScenarioConfig::validate() const {
    world.validate();
    require(tasks.normal_tasks + tasks.emergency_tasks > 0, "scenario has no tasks");
    require(tasks.warmup_tasks < tasks.normal_tasks || tasks.warmup_tasks == 0,
            "warmup_tasks must be smaller than normal_tasks");
    require(tasks.questions_per_task >= 1, "questions_per_task must be >= 1");
    require(tasks.labels_per_question >= 2, "labels_per_question must be >= 2");
    require(tasks.multi_label_fraction >= 0.0 && tasks.multi_label_fraction <= 1.0,
            "multi_label_fraction must be in [0, 1]");
    require(tasks.normal_radius_m > 0.0, "normal_radius_m must be positive");
    require(std::isfinite(tasks.emergency_radius_m) && tasks.emergency_radius_m > 0.0 &&
                tasks.emergency_radius_m <= emergency_max_radius_m,
            "emergency_radius_m must be finite, positive and <= emergency_max_radius_m");
    for (TaskTypeId t : tasks.task_types) {
        require(world.taxonomy.has_task_type(t), "task generator references unknown task type");
    }
    for (const auto& [type, classes] : tasks.admissible) {
        require(world.taxonomy.has_task_type(type), "admissible map references unknown task type");
        for (ClassId c : classes) require(world.taxonomy.has_class(c), "admissible map references unknown class");
    }
    require(dispatch.fanout >= 1, "fanout must be >= 1");
    try {
        dispatch.weights.validate();
        network.validate();
        quality.prs.validate();
    } catch (const Error& e) {
        fail(ErrorCode::InvalidConfig, e.what());
    }
    require(behavior.response_log_sd >= 0.0 && behavior.read_log_sd >= 0.0, "log-normal spreads must be >= 0");
    for (const auto& [c, b] : behavior.by_class) {
        require(world.taxonomy.has_class(c), "behaviour references unknown class");
        require(b.busyness > 0.0, "busyness must be positive");
        require(b.focus >= 0.0 && b.focus <= 1.0, "focus must be in [0, 1]");
    }
    require(quality.theta > 0.0 && quality.theta <= 1.0, "theta must be in (0, 1]");
    require(quality.em.max_iters >= 1 && quality.em.tol > 0.0 && quality.em.alpha > 0.0, "invalid EM parameters");
    require(quality.w_min > 0.0 && quality.w_min < 1.0, "w_min must be in (0, 1)");
    require(quality.profile_alpha > 0.0, "profile_alpha must be positive");
    require(quality.gamification_half_life_s > 0.0, "gamification half-life must be positive");
    require(quality.gamification_w_acc >= 0.0 && quality.gamification_w_acc <= 1.0,
            "gamification_w_acc must be in [0, 1]");
    for (const auto& m : quality.methods) {
        require(std::find(kAllMethods.begin(), kAllMethods.end(), m) != kAllMethods.end(),
                "unknown aggregation method '" + m + "'");
    }
    require(geolearn.params.cluster.k >= 2, "geolearn k must be >= 2");
    require(duration_s > 0.0, "duration_s must be positive");
}

std::vector<Place> grid_places(const Taxonomy& taxonomy, const GeoPoint& origin, std::size_t count,
                               double spacing_m, double radius_m) {
    std::vector<ClassId> classes;
    for (const auto& c : taxonomy.classes) {
        if (c.id != taxonomy.default_class) classes.push_back(c.id);
    }
    if (classes.empty()) classes.push_back(taxonomy.default_class);
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(count))));
    const double m_per_deg = kEarthRadiusM * std::numbers::pi / 180.0;
    const double coslat = std::cos(origin.lat() * std::numbers::pi / 180.0);
    std::vector<Place> places;
    for (std::size_t i = 0; i < count; ++i) {
        const double north = (static_cast<double>(i / side) - static_cast<double>(side - 1) / 2.0) * spacing_m;
        const double east = (static_cast<double>(i % side) - static_cast<double>(side - 1) / 2.0) * spacing_m;
        const ClassId cls = classes[i % classes.size()];
        places.push_back({static_cast<PlaceId>(i),
                          taxonomy.classes[cls].name + " " + std::to_string(i),
                          GeoPoint(origin.lat() + north / m_per_deg, origin.lon() + east / (m_per_deg * coslat)),
                          cls, radius_m});
    }
    return places;
}

ScenarioConfig ScenarioConfig::defaults() {
    ScenarioConfig c;
    c.world.places = grid_places(c.world.taxonomy, GeoPoint(52.2297, 21.0122), 44, 600.0, 150.0);
    return c;
}

const AggregationReport* ResultSet::report(std::string_view method) const {
    for (const auto& r : reports) {
        if (r.method == method) return &r;
    }
    return nullptr;
}

std::string config_fingerprint(const ScenarioConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(scenario_to_json(config).dump())));
    return buf;
}

namespace {

struct GeneratedTask {
    Task task;
    bool warmup = false;
};

std::vector<GeneratedTask> generate_tasks(const ScenarioConfig& cfg, const World& world, Rng& rng) {
    const auto& tg = cfg.tasks;
    const std::uint32_t total = tg.normal_tasks + tg.emergency_tasks;
    std::vector<double> times(total);
    for (double& t : times) t = rng.uniform(0.0, cfg.duration_s);
    std::sort(times.begin(), times.end());

    std::vector<TaskTypeId> types = tg.task_types;
    if (types.empty()) {
        for (const auto& t : world.taxonomy.task_types) types.push_back(t.id);
    }

    // Warm-up tasks take the earliest slots; emergency tasks are spread over
    // the remaining ones.
    std::vector<bool> is_emergency(total, false);
    {
        std::vector<std::uint32_t> slots(total - tg.warmup_tasks);
        std::iota(slots.begin(), slots.end(), tg.warmup_tasks);
        rng.shuffle(std::span<std::uint32_t>(slots));
        for (std::uint32_t i = 0; i < tg.emergency_tasks; ++i) is_emergency[slots[i]] = true;
    }

    const auto places = world.index.places();
    std::vector<GeneratedTask> out;
    out.reserve(total);
    QuestionId next_q = 0;
    std::uint32_t normal_seen = 0;
    for (std::uint32_t i = 0; i < total; ++i) {
        GeneratedTask g;
        Task& t = g.task;
        t.id = i;
        t.created_at = times[i];
        t.payload_bytes = tg.payload_bytes;
        t.context.center = places[rng.index(places.size())].center;
        if (is_emergency[i]) {
            t.kind = TaskKind::Emergency;
            t.task_type = world.taxonomy.task_type_by_name("crisis mapping").value_or(types.front());
            t.context.radius_m = tg.emergency_radius_m;
        } else {
            t.kind = TaskKind::Normal;
            t.task_type = types[normal_seen % types.size()];
            t.context.radius_m = tg.normal_radius_m;
            g.warmup = normal_seen < tg.warmup_tasks;
            ++normal_seen;
            auto adm = tg.admissible.find(t.task_type);
            if (adm != tg.admissible.end()) {
                t.context.admissible_classes = adm->second;
                std::sort(t.context.admissible_classes.begin(), t.context.admissible_classes.end());
            }
        }
        for (std::uint32_t q = 0; q < tg.questions_per_task; ++q) {
            Question question;
            question.id = next_q++;
            for (std::uint32_t l = 0; l < tg.labels_per_question; ++l) question.candidates.push_back(static_cast<Label>(l));
            question.multi_label = tg.multi_label_fraction > 0.0 && rng.bernoulli(tg.multi_label_fraction);
            if (question.multi_label) {
                for (Label l : question.candidates) {
                    if (rng.bernoulli(0.5)) question.ground_truth.push_back(l);
                }
                if (question.ground_truth.empty()) {
                    question.ground_truth.push_back(question.candidates[rng.index(question.candidates.size())]);
                }
            } else {
                question.ground_truth.push_back(question.candidates[rng.index(question.candidates.size())]);
            }
            t.questions.push_back(std::move(question));
        }
        const auto report = validate_task(t, world.taxonomy, cfg.emergency_max_radius_m);
        if (!report.ok()) fail(ErrorCode::InvalidConfig, report.violations.front());
        out.push_back(std::move(g));
    }
    return out;
}

LabelSet draw_labels(const Worker& w, const Question& q, double p, Rng& rng) {
    const auto& cands = q.candidates;
    const std::size_t k = cands.size();
    const auto& kind = w.strategy.kind;
    if (kind == StrategyKind::FixedAnswerSpammer) return {cands[w.strategy.fixed_label_index % k]};

    if (!q.multi_label) {
        if (kind == StrategyKind::UniformSpammer) return {cands[rng.index(k)]};
        const Label truth = q.ground_truth.front();
        if (rng.bernoulli(p)) return {truth};
        const std::size_t pick = rng.index(k - 1);
        std::size_t seen = 0;
        for (Label l : cands) {
            if (l == truth) continue;
            if (seen++ == pick) return {l};
        }
        return {truth};
    }

    LabelSet out;
    for (Label l : cands) {
        bool include;
        if (kind == StrategyKind::UniformSpammer) {
            include = rng.bernoulli(0.5);
        } else {
            const bool in_truth = std::binary_search(q.ground_truth.begin(), q.ground_truth.end(), l);
            include = rng.bernoulli(p) ? in_truth : !in_truth;
        }
        if (include) out.push_back(l);
    }
    if (out.empty()) out.push_back(cands[rng.index(k)]);
    return out;
}

struct RunState {
    const ScenarioConfig& cfg;
    World world;
    Rng dispatch_rng;
    Rng answer_rng;
    std::vector<std::vector<ActivityRecord>> pending;
    ResultSet rs;

    RunState(const ScenarioConfig& c, World w)
        : cfg(c), world(std::move(w)), dispatch_rng(derive_seed(c.seed, "dispatch")),
          answer_rng(derive_seed(c.seed, "answers")), pending(world.workers.size()) {}

    // Moves records sent by `now` into the histories; later ones stay pending.
    void flush_histories(double now = std::numeric_limits<double>::infinity()) {
        for (auto& worker : world.workers) {
            auto& recs = pending[worker.id];
            std::stable_sort(recs.begin(), recs.end(), [](const ActivityRecord& a, const ActivityRecord& b) {
                return a.timestamp < b.timestamp;
            });
            const auto split = std::find_if(recs.begin(), recs.end(), [&](const ActivityRecord& r) { return r.timestamp > now; });
            for (auto it = recs.begin(); it != split; ++it) worker.history = record_activity(std::move(worker.history), *it);
            recs.erase(recs.begin(), split);
        }
    }

    void rebuild_profiles() {
        ProfileParams pp{cfg.quality.profile_alpha, cfg.quality.prs};
        for (auto& worker : world.workers) {
            worker.profile = build_profile(worker.history, worker.schedule, world.index, world.taxonomy, pp);
        }
    }

    void simulate_answers(const Task& task, const DispatchResult& d) {
        for (std::size_t i = 0; i < d.assignments.size(); ++i) {
            rs.deliveries.push_back(d.events[i]);
            const Assignment& a = d.assignments[i];
            if (!a.delivered) continue;
            Worker& w = world.workers[a.worker_id];
            const Question& q = *std::find_if(task.questions.begin(), task.questions.end(),
                                              [&](const Question& x) { return x.id == a.question_id; });
            if (q.multi_label) {
                ++w.history.multilabel_offers;
                if (!answer_rng.bernoulli(w.multilabel_acceptance)) continue;
            }
            const ClassBehavior b = cfg.behavior.for_class(w.location.class_id);
            const double chance = q.multi_label ? 0.5 : 1.0 / static_cast<double>(q.candidates.size());
            const double reliability = w.type_reliability.at(task.task_type);
            const double p = chance + (reliability - chance) * b.focus;
            const double read_delay = answer_rng.lognormal(cfg.behavior.read_log_mean, cfg.behavior.read_log_sd) * b.busyness;
            const double t = answer_rng.lognormal(cfg.behavior.response_log_mean, cfg.behavior.response_log_sd) *
                             b.busyness * w.strategy.slowness;
            Answer ans;
            ans.task_id = task.id;
            ans.question_id = q.id;
            ans.worker_id = w.id;
            ans.labels = draw_labels(w, q, p, answer_rng);
            ans.read_at = a.dispatched_at + read_delay;
            ans.sent_at = ans.read_at + t;
            const bool correct = ans.labels == q.ground_truth;
            pending[w.id].push_back({task.id, task.task_type, w.location.class_id, ans.response_time(), correct,
                                     q.multi_label, ans.sent_at});
            rs.answers.push_back(std::move(ans));
        }
    }
};

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void aggregate(RunState& st, const std::vector<GeneratedTask>& tasks) {
    const auto& cfg = st.cfg;
    ResultSet& rs = st.rs;

    std::map<QuestionId, std::vector<Answer>> by_question;
    for (const auto& a : rs.answers) by_question[a.question_id].push_back(a);

    // Credibility is measured against the class of the task's location.
    std::map<TaskId, ClassId> task_class;
    for (const auto& g : tasks) task_class[g.task.id] = classify_location(g.task.context.center, st.world.index);

    LabelMap truth;
    for (const auto& g : tasks) {
        for (const auto& q : g.task.questions) {
            QuestionOutcome o;
            o.question_id = q.id;
            o.task_id = g.task.id;
            o.task_type = g.task.task_type;
            o.multi_label = q.multi_label;
            o.warmup = g.warmup;
            o.truth = q.ground_truth;
            auto it = by_question.find(q.id);
            o.answers = it == by_question.end() ? 0 : it->second.size();
            rs.questions.push_back(std::move(o));
            if (!g.warmup) truth[q.id] = q.ground_truth;
        }
    }

    for (const auto& method : cfg.quality.methods) {
        AggregationReport report;
        report.method = method;
        const auto start = std::chrono::steady_clock::now();
        std::vector<EmItem> em_items;
        for (const auto& o : rs.questions) {
            if (o.warmup) continue;
            auto it = by_question.find(o.question_id);
            LabelSet estimate;
            if (it != by_question.end()) {
                const auto& answers = it->second;
                if (method == "weighted") {
                    WeightMap weights;
                    const ClassId tc = task_class[o.task_id];
                    for (const auto& a : answers) {
                        weights[a.worker_id] =
                            credibility_weight(a.worker_id, st.world.workers[a.worker_id].profile, tc, cfg.quality.w_min).weight;
                    }
                    estimate = o.multi_label ? multilabel_aggregate_weighted(answers, weights, cfg.quality.theta)
                                             : LabelSet{weighted_majority(answers, weights)};
                } else if (o.multi_label) {
                    estimate = multilabel_aggregate(answers, cfg.quality.theta);
                } else if (method == "em") {
                    EmItem item;
                    item.question_id = o.question_id;
                    const Task& task = tasks[o.task_id].task;
                    item.candidates = std::find_if(task.questions.begin(), task.questions.end(), [&](const Question& q) {
                                          return q.id == o.question_id;
                                      })->candidates;
                    for (const auto& a : answers) item.votes.emplace_back(a.worker_id, a.labels.front());
                    em_items.push_back(std::move(item));
                } else {
                    estimate = {majority_vote(answers)};
                }
            }
            report.estimates[o.question_id] = std::move(estimate);
        }
        if (!em_items.empty()) {
            const EmResult em = em_aggregate(em_items, cfg.quality.em);
            for (const auto& [qid, label] : em.labels) report.estimates[qid] = {label};
            report.iterations = em.iterations;
        }
        if (cfg.quality.measure_compute_time) {
            report.compute_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        if (!truth.empty()) {
            report.accuracy = accuracy(report.estimates, truth);
            report.has_accuracy = true;
        }
        for (auto& o : rs.questions) {
            auto e = report.estimates.find(o.question_id);
            if (e != report.estimates.end()) o.estimates[method] = e->second;
        }
        rs.reports.push_back(std::move(report));
    }
}

} // namespace

std::vector<LocationObservation> location_observations(const ResultSet& rs) {
    std::set<std::pair<QuestionId, WorkerId>> answered;
    std::map<std::pair<QuestionId, WorkerId>, bool> correct;
    std::map<std::pair<QuestionId, WorkerId>, double> prs;
    std::map<QuestionId, const LabelSet*> truth;
    for (const auto& t : rs.tasks) {
        for (const auto& q : t.questions) truth[q.id] = &q.ground_truth;
    }
    std::map<QuestionId, TaskTypeId> types;
    for (const auto& t : rs.tasks) {
        for (const auto& q : t.questions) types[q.id] = t.task_type;
    }
    for (const auto& a : rs.answers) {
        const std::pair key{a.question_id, a.worker_id};
        answered.insert(key);
        correct[key] = a.labels == *truth.at(a.question_id);
        prs[key] = personal_response_time(rs.config.quality.prs.for_type(types.at(a.question_id)), a.response_time());
    }
    std::vector<LocationObservation> out;
    for (const auto& e : rs.deliveries) {
        if (e.outcome != DeliveryOutcome::Delivered) continue;
        const std::pair key{e.question_id, e.worker_id};
        LocationObservation o{e.class_id, e.task_type, false, false, 0.0};
        if (answered.contains(key)) {
            o.answered = true;
            o.correct = correct[key];
            o.prs = prs[key];
        }
        out.push_back(o);
    }
    return out;
}

ResultSet run_scenario(const ScenarioConfig& config, const EfficiencyPrior* prior) {
    if (config.world.n_workers == 0) fail(ErrorCode::EmptyWorld, "world has zero workers");
    if (config.world.places.empty()) fail(ErrorCode::EmptyWorld, "world has zero places");
    config.validate();

    RunState st(config, generate_world(config.world, config.seed));
    ResultSet& rs = st.rs;
    rs.config = config;
    rs.fingerprint = config_fingerprint(config);

    Rng task_rng(derive_seed(config.seed, "tasks"));
    const auto tasks = generate_tasks(config, st.world, task_rng);
    const std::size_t fanout = config.dispatch.fanout;
    bool profiles_ready = config.tasks.warmup_tasks == 0;

    for (const auto& g : tasks) {
        const Task& task = g.task;
        if (!g.warmup && !profiles_ready) {
            st.flush_histories(task.created_at);
            st.rebuild_profiles();
            profiles_ready = true;
        }
        st.world = step_mobility(std::move(st.world), task.created_at);

        DispatchResult d;
        if (g.warmup) {
            d = dispatch_random(task, st.world, config.network, fanout, st.dispatch_rng);
        } else if (task.kind == TaskKind::Emergency) {
            d = config.dispatch.emergency == EmergencyMode::Broadcast
                    ? emergency_broadcast(task, st.world, config.network, st.dispatch_rng)
                    : dispatch_task(task, st.world, config.dispatch.weights, config.network, fanout,
                                    st.dispatch_rng, prior);
        } else if (config.dispatch.policy == DispatchPolicy::Random) {
            d = dispatch_random(task, st.world, config.network, fanout, st.dispatch_rng);
        } else {
            d = dispatch_task(task, st.world, config.dispatch.weights, config.network, fanout, st.dispatch_rng, prior);
        }

        const std::size_t first_answer = rs.answers.size();
        st.simulate_answers(task, d);

        if (task.kind == TaskKind::Emergency) {
            EmergencyOutcome eo;
            eo.task_id = task.id;
            const auto inside = workers_in_geofence(task, st.world);
            eo.inside = inside.size();
            std::set<WorkerId> reached;
            for (const auto& a : d.assignments) {
                if (a.delivered && std::binary_search(inside.begin(), inside.end(), a.worker_id)) reached.insert(a.worker_id);
            }
            eo.reached_inside = reached.size();
            eo.coverage = eo.inside > 0 ? static_cast<double>(eo.reached_inside) / static_cast<double>(eo.inside) : 0.0;
            eo.flagged = eo.inside == 0;
            for (std::size_t i = first_answer; i < rs.answers.size(); ++i) {
                const double tta = rs.answers[i].sent_at - task.created_at;
                if (!eo.answered || tta < eo.time_to_first_answer) eo.time_to_first_answer = tta;
                eo.answered = true;
            }
            rs.emergencies.push_back(eo);
        }
    }
    st.flush_histories();
    st.rebuild_profiles();

    for (const auto& g : tasks) rs.tasks.push_back(g.task);
    aggregate(st, tasks);

    if (!rs.deliveries.empty()) {
        rs.network = network_metrics(rs.deliveries);
        rs.network_by_task = network_metrics_by_task(rs.deliveries);
    }
    {
        std::map<TaskId, std::vector<Answer>> by_task;
        for (const auto& a : rs.answers) by_task[a.task_id].push_back(a);
        for (const auto& [id, answers] : by_task) rs.arst[id] = aggregated_response_time(answers);
    }

    std::vector<double> resp, prs;
    std::set<TaskId> warm;
    for (const auto& g : tasks) {
        if (g.warmup) warm.insert(g.task.id);
    }
    for (const auto& a : rs.answers) {
        if (warm.contains(a.task_id)) continue;
        resp.push_back(a.response_time());
        prs.push_back(personal_response_time(config.quality.prs.for_type(tasks[a.task_id].task.task_type),
                                             a.response_time()));
    }
    rs.mean_response_s = mean_of(resp);
    rs.mean_prs = mean_of(prs);
    rs.answers_per_question = static_cast<double>(fanout);
    std::size_t delivered = 0;
    for (const auto& e : rs.deliveries) delivered += e.outcome == DeliveryOutcome::Delivered;
    rs.questions_per_worker = static_cast<double>(delivered) / static_cast<double>(st.world.workers.size());

    GamificationParams gp;
    gp.prs = config.quality.prs.global;
    gp.half_life_s = config.quality.gamification_half_life_s;
    gp.w_acc = config.quality.gamification_w_acc;
    gp.w_eff = 1.0 - gp.w_acc;
    double now = config.duration_s;
    for (const auto& a : rs.answers) now = std::max(now, a.sent_at);
    std::vector<std::pair<WorkerId, double>> scores;
    for (const auto& w : st.world.workers) scores.emplace_back(w.id, gamification_score(w.history, gp, now));
    const auto ranked = rank_gamification(scores);
    std::vector<std::size_t> rank_of(st.world.workers.size());
    for (const auto& g : ranked) rank_of[g.worker_id] = g.rank;
    for (const auto& w : st.world.workers) {
        rs.workers.push_back({w.id, w.strategy, w.reliability, w.profile, w.history.records.size(),
                              scores[w.id].second, rank_of[w.id]});
    }

    if (config.geolearn.enabled) {
        const auto obs = location_observations(rs);
        try {
            rs.efficiency_pairs = learn_efficiency(obs, {}, config.geolearn.params).pairs;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoData && e.code() != ErrorCode::TooFewPoints &&
                e.code() != ErrorCode::InvalidArgument) {
                throw;
            }
            rs.geolearn_note = std::string(to_string(e.code())) + ": " + e.what();
        }
    } else {
        rs.geolearn_note = "disabled";
    }
    return rs;
}

const char* to_string(SweepAxis axis) noexcept {
    switch (axis) {
    case SweepAxis::AnswersPerQuestion: return "answers_per_question";
    case SweepAxis::QuestionsPerWorker: return "questions_per_worker";
    case SweepAxis::SpammerRatio: return "spammer_ratio";
    }
    return "unknown";
}

std::optional<SweepAxis> parse_axis(std::string_view name) {
    for (auto axis : {SweepAxis::AnswersPerQuestion, SweepAxis::QuestionsPerWorker, SweepAxis::SpammerRatio}) {
        if (name == to_string(axis)) return axis;
    }
    return std::nullopt;
}

void SweepSpec::validate() const {
    if (values.empty()) fail(ErrorCode::InvalidSpec, "sweep needs at least one value");
    if (repetitions < 1) fail(ErrorCode::InvalidSpec, "sweep repetitions must be >= 1");
    for (double v : values) {
        switch (axis) {
        case SweepAxis::AnswersPerQuestion:
        case SweepAxis::QuestionsPerWorker:
            if (!(v >= 1.0) || v != std::floor(v)) fail(ErrorCode::InvalidSpec, to_string(axis) + std::string(" values must be positive integers"));
            break;
        case SweepAxis::SpammerRatio:
            if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::InvalidSpec, "spammer_ratio values must be in [0, 1]");
            break;
        }
    }
}

ScenarioConfig sweep_point(const SweepSpec& spec, double value, std::uint32_t repetition) {
    ScenarioConfig c = spec.base;
    c.seed = spec.base.seed + repetition;
    switch (spec.axis) {
    case SweepAxis::AnswersPerQuestion:
        c.dispatch.fanout = static_cast<std::uint32_t>(value);
        break;
    case SweepAxis::QuestionsPerWorker: {
        const double questions = static_cast<double>(c.tasks.normal_tasks + c.tasks.emergency_tasks) *
                                 c.tasks.questions_per_task;
        c.world.n_workers = static_cast<std::uint32_t>(
            std::max(1.0, std::ceil(questions * c.dispatch.fanout / value)));
        break;
    }
    case SweepAxis::SpammerRatio:
        c.world.spammer_ratio = value;
        if (value > kMaxDefaultSpammerRatio) c.world.allow_high_spammer_ratio = true;
        break;
    }
    return c;
}

SweepResult sweep(const SweepSpec& spec) {
    spec.validate();
    SweepResult out;
    out.axis = spec.axis;
    out.values = spec.values;
    out.repetitions = spec.repetitions;

    const std::size_t total = spec.values.size() * spec.repetitions;
    std::vector<ScenarioConfig> configs;
    configs.reserve(total);
    for (double v : spec.values) {
        for (std::uint32_t r = 0; r < spec.repetitions; ++r) configs.push_back(sweep_point(spec, v, r));
    }
    out.runs.resize(total);

    // Each run owns its state; results land in their (value, repetition) slot.
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            try {
                out.runs[i] = run_scenario(configs[i]);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::size_t threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, total);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    const auto& methods = spec.base.quality.methods;
    for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
        for (const auto& m : methods) {
            std::vector<double> acc;
            for (std::uint32_t r = 0; r < spec.repetitions; ++r) {
                const auto* rep = out.runs[vi * spec.repetitions + r].report(m);
                if (rep && rep->has_accuracy) acc.push_back(rep->accuracy);
            }
            out.summary.push_back({spec.values[vi], m, mean_of(acc), sample_sd(acc), acc.size()});
        }
    }
    for (const auto& m : methods) {
        std::optional<double> best;
        for (const auto& row : out.summary) {
            if (row.method == m && row.runs > 0 && row.mean_accuracy >= spec.target_accuracy &&
                (!best || row.axis_value < *best)) {
                best = row.axis_value;
            }
        }
        out.first_reaching_target[m] = best;
    }
    return out;
}

namespace {

Comparison compare(std::string hypothesis, std::string metric, std::string arm_a, std::string arm_b,
                   std::vector<double> a, std::vector<double> b, std::size_t flagged = 0) {
    Comparison c;
    c.hypothesis = std::move(hypothesis);
    c.metric = std::move(metric);
    c.arm_a = std::move(arm_a);
    c.arm_b = std::move(arm_b);
    c.mean_a = mean_of(a);
    c.mean_b = mean_of(b);
    c.difference = c.mean_a - c.mean_b;
    std::vector<double> diffs(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
    c.paired_se = diffs.empty() ? 0.0 : sample_sd(diffs) / std::sqrt(static_cast<double>(diffs.size()));
    c.values_a = std::move(a);
    c.values_b = std::move(b);
    c.flagged = flagged;
    return c;
}

double majority_accuracy(const ResultSet& rs) {
    const auto* r = rs.report("majority");
    if (r == nullptr) r = rs.reports.empty() ? nullptr : &rs.reports.front();
    return r && r->has_accuracy ? r->accuracy : 0.0;
}

void ensure_majority(ScenarioConfig& c) {
    auto& m = c.quality.methods;
    if (std::find(m.begin(), m.end(), "majority") == m.end()) m.push_back("majority");
}

} // namespace

std::vector<Comparison> hypothesis_emergency(const ScenarioConfig& config, std::uint32_t seeds) {
    if (seeds < 1) fail(ErrorCode::InvalidConfig, "hypothesis experiments need at least one seed");
    ScenarioConfig base = config;
    if (base.tasks.emergency_tasks == 0) base.tasks.emergency_tasks = 20;
    std::vector<double> tta_a, tta_b, cov_a, cov_b;
    std::size_t flagged = 0;
    for (std::uint32_t i = 0; i < seeds; ++i) {
        ScenarioConfig a = base, b = base;
        a.seed = b.seed = base.seed + i;
        a.dispatch.emergency = EmergencyMode::Broadcast;
        b.dispatch.emergency = EmergencyMode::Ranked;
        const ResultSet ra = run_scenario(a);
        const ResultSet rb = run_scenario(b);
        auto summarize = [](const ResultSet& rs, std::vector<double>& tta, std::vector<double>& cov) {
            std::vector<double> t, c;
            std::size_t flags = 0;
            for (const auto& e : rs.emergencies) {
                if (e.answered) t.push_back(e.time_to_first_answer);
                c.push_back(e.coverage);
                flags += e.flagged;
            }
            tta.push_back(mean_of(t));
            cov.push_back(mean_of(c));
            return flags;
        };
        flagged += summarize(ra, tta_a, cov_a);
        summarize(rb, tta_b, cov_b);
    }
    return {compare("H1", "time_to_first_answer_s", "broadcast", "ranked", tta_a, tta_b, flagged),
            compare("H1", "geofence_coverage", "broadcast", "ranked", cov_a, cov_b, flagged)};
}

std::vector<Comparison> hypothesis_profiles(const ScenarioConfig& config, std::uint32_t seeds) {
    if (seeds < 1) fail(ErrorCode::InvalidConfig, "hypothesis experiments need at least one seed");
    std::vector<double> acc_a, acc_b, prs_a, prs_b;
    for (std::uint32_t i = 0; i < seeds; ++i) {
        ScenarioConfig a = config, b = config;
        a.seed = b.seed = config.seed + i;
        ensure_majority(a);
        ensure_majority(b);
        a.dispatch.policy = DispatchPolicy::Ranked;
        b.dispatch.policy = DispatchPolicy::Random;
        const ResultSet ra = run_scenario(a);
        const ResultSet rb = run_scenario(b);
        acc_a.push_back(majority_accuracy(ra));
        acc_b.push_back(majority_accuracy(rb));
        prs_a.push_back(ra.mean_prs);
        prs_b.push_back(rb.mean_prs);
    }
    return {compare("H2", "majority_accuracy", "profile_ranked", "random", acc_a, acc_b),
            compare("H2", "mean_prs", "profile_ranked", "random", prs_a, prs_b)};
}

std::vector<Comparison> hypothesis_geofence(const ScenarioConfig& config, std::uint32_t seeds) {
    if (seeds < 1) fail(ErrorCode::InvalidConfig, "hypothesis experiments need at least one seed");
    std::vector<double> t_a, t_b, acc_a, acc_b;
    for (std::uint32_t i = 0; i < seeds; ++i) {
        ScenarioConfig a = config, b = config;
        a.seed = b.seed = config.seed + i;
        ensure_majority(a);
        ensure_majority(b);
        a.dispatch.policy = b.dispatch.policy = DispatchPolicy::Ranked;
        if (a.dispatch.weights.w_class == 0.0) a.dispatch.weights.w_class = 1.0;
        b.dispatch.weights.w_geo = 0.0;
        b.dispatch.weights.w_class = 0.0;
        if (b.dispatch.weights.w_skill == 0.0) b.dispatch.weights.w_skill = 1.0;
        const ResultSet ra = run_scenario(a);
        const ResultSet rb = run_scenario(b);
        t_a.push_back(ra.mean_response_s);
        t_b.push_back(rb.mean_response_s);
        acc_a.push_back(majority_accuracy(ra));
        acc_b.push_back(majority_accuracy(rb));
    }
    return {compare("H3", "mean_response_s", "geofenced", "geography_blind", t_a, t_b),
            compare("H3", "majority_accuracy", "geofenced", "geography_blind", acc_a, acc_b)};
}

HypothesisReport hypothesis_experiments(const ScenarioConfig& config, std::uint32_t seeds) {
    config.validate();
    HypothesisReport report;
    for (auto part : {hypothesis_emergency(config, seeds), hypothesis_profiles(config, seeds),
                      hypothesis_geofence(config, seeds)}) {
        for (auto& c : part) report.comparisons.push_back(std::move(c));
    }
    return report;
}

std::vector<LearnRound> learn_rounds(const ScenarioConfig& config, std::uint32_t rounds) {
    if (rounds < 1) fail(ErrorCode::InvalidConfig, "learning needs at least one round");
    std::vector<LearnRound> out;
    EfficiencyPrior prior;
    for (std::uint32_t r = 0; r < rounds; ++r) {
        ScenarioConfig c = config;
        c.seed = config.seed + r;
        c.geolearn.enabled = true;
        const ResultSet rs = run_scenario(c, r == 0 ? nullptr : &prior);
        LearnRound lr;
        lr.round = r;
        lr.pairs = rs.efficiency_pairs;
        lr.churn = r == 0 ? lr.pairs.size() : verdict_churn(out.back().pairs, lr.pairs);
        lr.majority_accuracy = majority_accuracy(rs);
        prior = to_prior(lr.pairs);
        out.push_back(std::move(lr));
    }
    return out;
}

} // namespace mcs
