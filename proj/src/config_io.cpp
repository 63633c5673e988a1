#include "mcs/config_io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <string>

#include "mcs/error.hpp"

namespace mcs {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) fail(ErrorCode::InvalidConfig, where + " must be a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.contains(key)) fail(ErrorCode::InvalidConfig, "unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const Json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("bad value for '") + key + "': " + e.what());
    }
}

// null encodes an unbounded radius.
Json radius_to_json(double r) { return std::isinf(r) ? Json(nullptr) : Json(r); }

void read_radius(const Json& j, const char* key, double& out) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out = std::numeric_limits<double>::infinity();
    } else {
        read(j, key, out);
    }
}

ClassId class_ref(const Json& v, const Taxonomy& t) {
    if (v.is_string()) {
        auto id = t.class_by_name(v.get<std::string>());
        if (!id) fail(ErrorCode::InvalidConfig, "unknown location class '" + v.get<std::string>() + "'");
        return *id;
    }
    if (!v.is_number_unsigned()) fail(ErrorCode::InvalidConfig, "location class must be an id or a name");
    const auto id = v.get<std::uint64_t>();
    if (id >= t.class_count()) fail(ErrorCode::InvalidConfig, "unknown location class id " + std::to_string(id));
    return static_cast<ClassId>(id);
}

TaskTypeId type_ref(const Json& v, const Taxonomy& t) {
    if (v.is_string()) {
        auto id = t.task_type_by_name(v.get<std::string>());
        if (!id) fail(ErrorCode::InvalidConfig, "unknown task type '" + v.get<std::string>() + "'");
        return *id;
    }
    if (!v.is_number_unsigned()) fail(ErrorCode::InvalidConfig, "task type must be an id or a name");
    const auto id = v.get<std::uint64_t>();
    if (id >= t.task_type_count()) fail(ErrorCode::InvalidConfig, "unknown task type id " + std::to_string(id));
    return static_cast<TaskTypeId>(id);
}

// Object keys are strings; accept numeric ids written as strings too.
Json key_ref(const std::string& key) {
    if (!key.empty() && key.find_first_not_of("0123456789") == std::string::npos) {
        return Json(static_cast<std::uint64_t>(std::stoull(key)));
    }
    return Json(key);
}

} // namespace

Json taxonomy_to_json(const Taxonomy& t) {
    Json j;
    j["classes"] = Json::array();
    for (const auto& c : t.classes) j["classes"].push_back({{"id", c.id}, {"name", c.name}});
    j["variants"] = Json::array();
    for (const auto& v : t.variants) j["variants"].push_back({{"id", v.id}, {"parent", v.parent}, {"name", v.name}});
    j["task_types"] = Json::array();
    for (const auto& tt : t.task_types) j["task_types"].push_back({{"id", tt.id}, {"name", tt.name}});
    j["default_class"] = t.default_class;
    return j;
}

Taxonomy taxonomy_from_json(const Json& j) {
    check_keys(j, {"classes", "variants", "task_types", "default_class"}, "taxonomy");
    Taxonomy t;
    try {
        for (const auto& c : j.at("classes")) {
            check_keys(c, {"id", "name"}, "taxonomy class");
            t.classes.push_back({c.at("id").get<ClassId>(), c.at("name").get<std::string>()});
        }
        if (j.contains("variants")) {
            for (const auto& v : j.at("variants")) {
                check_keys(v, {"id", "parent", "name"}, "taxonomy variant");
                t.variants.push_back({v.at("id").get<std::uint16_t>(), v.at("parent").get<ClassId>(),
                                      v.at("name").get<std::string>()});
            }
        }
        for (const auto& tt : j.at("task_types")) {
            check_keys(tt, {"id", "name"}, "task type");
            t.task_types.push_back({tt.at("id").get<TaskTypeId>(), tt.at("name").get<std::string>()});
        }
        read(j, "default_class", t.default_class);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidConfig, std::string("malformed taxonomy: ") + e.what());
    }
    t.validate();
    return t;
}

Json places_to_json(const std::vector<Place>& places) {
    Json arr = Json::array();
    for (const auto& p : places) {
        arr.push_back({{"id", p.id},
                       {"name", p.name},
                       {"lat", p.center.lat()},
                       {"lon", p.center.lon()},
                       {"class", p.class_id},
                       {"radius_m", p.radius_m}});
    }
    return arr;
}

std::vector<Place> places_from_json(const Json& j, const Taxonomy& taxonomy) {
    if (!j.is_array()) fail(ErrorCode::InvalidConfig, "places must be an array");
    std::vector<Place> out;
    for (const auto& p : j) {
        check_keys(p, {"id", "name", "lat", "lon", "class", "radius_m"}, "place");
        Place place;
        try {
            place.id = p.at("id").get<PlaceId>();
            place.name = p.value("name", std::string{});
            place.center = GeoPoint(p.at("lat").get<double>(), p.at("lon").get<double>());
            place.class_id = class_ref(p.at("class"), taxonomy);
            place.radius_m = p.value("radius_m", 100.0);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::InvalidConfig, std::string("malformed place: ") + e.what());
        } catch (const Error& e) {
            fail(ErrorCode::InvalidConfig, std::string("invalid place: ") + e.what());
        }
        out.push_back(std::move(place));
    }
    return out;
}

LocationIndex location_index_from_json(const Json& j, Taxonomy* taxonomy_out) {
    check_keys(j, {"taxonomy", "places"}, "location index");
    Taxonomy t = j.contains("taxonomy") ? taxonomy_from_json(j.at("taxonomy")) : Taxonomy::standard();
    if (!j.contains("places")) fail(ErrorCode::InvalidConfig, "location index needs places");
    LocationIndex index(places_from_json(j.at("places"), t), t.default_class);
    if (taxonomy_out) *taxonomy_out = std::move(t);
    return index;
}

Json world_config_to_json(const WorldConfig& c) {
    Json j;
    j["taxonomy"] = taxonomy_to_json(c.taxonomy);
    j["places"] = places_to_json(c.places);
    j["n_workers"] = c.n_workers;
    j["spammer_ratio"] = c.spammer_ratio;
    j["allow_high_spammer_ratio"] = c.allow_high_spammer_ratio;
    j["uniform_spammer_share"] = c.uniform_spammer_share;
    j["sloth_fraction"] = c.sloth_fraction;
    j["sloth_range"] = {c.sloth_min, c.sloth_max};
    Json r;
    switch (c.reliability.kind) {
    case ReliabilityModel::Kind::Uniform:
        r = {{"kind", "uniform"}, {"lo", c.reliability.lo}, {"hi", c.reliability.hi}};
        break;
    case ReliabilityModel::Kind::Mixture:
        r = {{"kind", "mixture"}, {"p_high", c.reliability.p_high}, {"high", c.reliability.high}, {"low", c.reliability.low}};
        break;
    case ReliabilityModel::Kind::Cycle:
        r = {{"kind", "cycle"}, {"values", c.reliability.values}};
        break;
    }
    j["reliability"] = r;
    j["specialization"] = c.specialization
                              ? Json{{"matched", c.specialization->matched}, {"unmatched", c.specialization->unmatched}}
                              : Json(nullptr);
    j["multilabel_acceptance"] = c.multilabel_acceptance;
    j["schedule"] = {{"min_segments", c.schedule.min_segments},
                     {"max_segments", c.schedule.max_segments},
                     {"day_length_s", c.schedule.day_length_s},
                     {"jitter_fraction", c.schedule.jitter_fraction}};
    return j;
}

WorldConfig world_config_from_json(const Json& j, WorldConfig c) {
    check_keys(j, {"taxonomy", "places", "n_workers", "spammer_ratio", "allow_high_spammer_ratio",
                   "uniform_spammer_share", "sloth_fraction", "sloth_range", "reliability", "specialization",
                   "multilabel_acceptance", "schedule"},
               "world");
    if (j.contains("taxonomy")) {
        c.taxonomy = taxonomy_from_json(j.at("taxonomy"));
        if (!j.contains("places")) {
            c.places = grid_places(c.taxonomy, GeoPoint(52.2297, 21.0122), 44, 600.0, 150.0);
        }
    }
    if (j.contains("places")) c.places = places_from_json(j.at("places"), c.taxonomy);
    read(j, "n_workers", c.n_workers);
    read(j, "spammer_ratio", c.spammer_ratio);
    read(j, "allow_high_spammer_ratio", c.allow_high_spammer_ratio);
    read(j, "uniform_spammer_share", c.uniform_spammer_share);
    read(j, "sloth_fraction", c.sloth_fraction);
    if (j.contains("sloth_range")) {
        std::vector<double> range;
        read(j, "sloth_range", range);
        if (range.size() != 2) fail(ErrorCode::InvalidConfig, "sloth_range must be [min, max]");
        c.sloth_min = range[0];
        c.sloth_max = range[1];
    }
    if (j.contains("reliability")) {
        const Json& r = j.at("reliability");
        check_keys(r, {"kind", "lo", "hi", "p_high", "high", "low", "values"}, "reliability");
        std::string kind = "uniform";
        read(r, "kind", kind);
        if (kind == "uniform") {
            c.reliability.kind = ReliabilityModel::Kind::Uniform;
        } else if (kind == "mixture") {
            c.reliability.kind = ReliabilityModel::Kind::Mixture;
        } else if (kind == "cycle") {
            c.reliability.kind = ReliabilityModel::Kind::Cycle;
        } else {
            fail(ErrorCode::InvalidConfig, "unknown reliability kind '" + kind + "'");
        }
        read(r, "lo", c.reliability.lo);
        read(r, "hi", c.reliability.hi);
        read(r, "p_high", c.reliability.p_high);
        read(r, "high", c.reliability.high);
        read(r, "low", c.reliability.low);
        read(r, "values", c.reliability.values);
    }
    if (j.contains("specialization")) {
        const Json& s = j.at("specialization");
        if (s.is_null()) {
            c.specialization.reset();
        } else {
            check_keys(s, {"matched", "unmatched"}, "specialization");
            Specialization sp;
            read(s, "matched", sp.matched);
            read(s, "unmatched", sp.unmatched);
            c.specialization = sp;
        }
    }
    read(j, "multilabel_acceptance", c.multilabel_acceptance);
    if (j.contains("schedule")) {
        const Json& s = j.at("schedule");
        check_keys(s, {"min_segments", "max_segments", "day_length_s", "jitter_fraction"}, "schedule");
        read(s, "min_segments", c.schedule.min_segments);
        read(s, "max_segments", c.schedule.max_segments);
        read(s, "day_length_s", c.schedule.day_length_s);
        read(s, "jitter_fraction", c.schedule.jitter_fraction);
    }
    return c;
}

Json scenario_to_json(const ScenarioConfig& c) {
    Json j;
    j["seed"] = c.seed;
    j["duration_s"] = c.duration_s;
    j["emergency_max_radius_m"] = c.emergency_max_radius_m;
    j["world"] = world_config_to_json(c.world);

    Json admissible = Json::object();
    for (const auto& [type, classes] : c.tasks.admissible) admissible[std::to_string(type)] = classes;
    j["tasks"] = {{"normal_tasks", c.tasks.normal_tasks},
                  {"emergency_tasks", c.tasks.emergency_tasks},
                  {"task_types", c.tasks.task_types},
                  {"questions_per_task", c.tasks.questions_per_task},
                  {"labels_per_question", c.tasks.labels_per_question},
                  {"multi_label_fraction", c.tasks.multi_label_fraction},
                  {"normal_radius_m", radius_to_json(c.tasks.normal_radius_m)},
                  {"emergency_radius_m", c.tasks.emergency_radius_m},
                  {"payload_bytes", c.tasks.payload_bytes},
                  {"admissible", admissible},
                  {"warmup_tasks", c.tasks.warmup_tasks}};

    const auto& w = c.dispatch.weights;
    j["dispatch"] = {{"weights", {{"geo", w.w_geo}, {"class", w.w_class}, {"skill", w.w_skill}, {"efficiency", w.w_efficiency}}},
                     {"fanout", c.dispatch.fanout},
                     {"policy", c.dispatch.policy == DispatchPolicy::Ranked ? "ranked" : "random"},
                     {"emergency", c.dispatch.emergency == EmergencyMode::Broadcast ? "broadcast" : "ranked"}};
    j["network"] = {{"availability_prob", c.network.availability_prob},
                    {"delivery_failure_prob", c.network.delivery_failure_prob},
                    {"per_message_overhead_bytes", c.network.per_message_overhead_bytes}};

    Json by_class = Json::object();
    for (const auto& [cls, b] : c.behavior.by_class) {
        by_class[std::to_string(cls)] = {{"busyness", b.busyness}, {"focus", b.focus}};
    }
    j["behavior"] = {{"response_log_mean", c.behavior.response_log_mean},
                     {"response_log_sd", c.behavior.response_log_sd},
                     {"read_log_mean", c.behavior.read_log_mean},
                     {"read_log_sd", c.behavior.read_log_sd},
                     {"by_class", by_class}};

    Json by_type = Json::object();
    for (const auto& [type, p] : c.quality.prs.by_type) {
        by_type[std::to_string(type)] = {{"beta", p.beta}, {"t_min", p.t_min}};
    }
    j["quality"] = {{"prs", {{"beta", c.quality.prs.global.beta}, {"t_min", c.quality.prs.global.t_min}, {"by_type", by_type}}},
                    {"theta", c.quality.theta},
                    {"em", {{"max_iters", c.quality.em.max_iters}, {"tol", c.quality.em.tol}, {"alpha", c.quality.em.alpha}}},
                    {"w_min", c.quality.w_min},
                    {"profile_alpha", c.quality.profile_alpha},
                    {"gamification_half_life_s", c.quality.gamification_half_life_s},
                    {"gamification_w_acc", c.quality.gamification_w_acc},
                    {"methods", c.quality.methods},
                    {"measure_compute_time", c.quality.measure_compute_time}};

    const auto& g = c.geolearn.params;
    j["geolearn"] = {{"enabled", c.geolearn.enabled},
                     {"min_samples", g.min_samples},
                     {"k", g.cluster.k},
                     {"max_iters", g.cluster.max_iters},
                     {"tol", g.cluster.tol},
                     {"seed", g.cluster.seed},
                     {"accuracy_threshold", g.thresholds.accuracy},
                     {"prs_threshold", g.thresholds.prs}};
    return j;
}

ScenarioConfig scenario_from_json(const Json& j) {
    check_keys(j, {"seed", "duration_s", "emergency_max_radius_m", "world", "tasks", "dispatch", "network", "behavior",
                   "quality", "geolearn"},
               "scenario");
    ScenarioConfig c = ScenarioConfig::defaults();
    read(j, "seed", c.seed);
    read(j, "duration_s", c.duration_s);
    read(j, "emergency_max_radius_m", c.emergency_max_radius_m);
    if (j.contains("world")) c.world = world_config_from_json(j.at("world"), c.world);
    const Taxonomy& tax = c.world.taxonomy;

    if (j.contains("tasks")) {
        const Json& t = j.at("tasks");
        check_keys(t, {"normal_tasks", "emergency_tasks", "task_types", "questions_per_task", "labels_per_question",
                       "multi_label_fraction", "normal_radius_m", "emergency_radius_m", "payload_bytes", "admissible",
                       "warmup_tasks"},
                   "tasks");
        read(t, "normal_tasks", c.tasks.normal_tasks);
        read(t, "emergency_tasks", c.tasks.emergency_tasks);
        if (t.contains("task_types")) {
            c.tasks.task_types.clear();
            for (const auto& v : t.at("task_types")) c.tasks.task_types.push_back(type_ref(v, tax));
        }
        read(t, "questions_per_task", c.tasks.questions_per_task);
        read(t, "labels_per_question", c.tasks.labels_per_question);
        read(t, "multi_label_fraction", c.tasks.multi_label_fraction);
        read_radius(t, "normal_radius_m", c.tasks.normal_radius_m);
        read(t, "emergency_radius_m", c.tasks.emergency_radius_m);
        read(t, "payload_bytes", c.tasks.payload_bytes);
        if (t.contains("admissible")) {
            c.tasks.admissible.clear();
            if (!t.at("admissible").is_object()) fail(ErrorCode::InvalidConfig, "admissible must be an object");
            for (const auto& [key, classes] : t.at("admissible").items()) {
                auto& list = c.tasks.admissible[type_ref(key_ref(key), tax)];
                for (const auto& cls : classes) list.push_back(class_ref(cls, tax));
            }
        }
        read(t, "warmup_tasks", c.tasks.warmup_tasks);
    }

    if (j.contains("dispatch")) {
        const Json& d = j.at("dispatch");
        check_keys(d, {"weights", "fanout", "policy", "emergency"}, "dispatch");
        if (d.contains("weights")) {
            const Json& w = d.at("weights");
            check_keys(w, {"geo", "class", "skill", "efficiency"}, "dispatch weights");
            read(w, "geo", c.dispatch.weights.w_geo);
            read(w, "class", c.dispatch.weights.w_class);
            read(w, "skill", c.dispatch.weights.w_skill);
            read(w, "efficiency", c.dispatch.weights.w_efficiency);
        }
        read(d, "fanout", c.dispatch.fanout);
        std::string policy = c.dispatch.policy == DispatchPolicy::Ranked ? "ranked" : "random";
        read(d, "policy", policy);
        if (policy != "ranked" && policy != "random") fail(ErrorCode::InvalidConfig, "policy must be ranked or random");
        c.dispatch.policy = policy == "ranked" ? DispatchPolicy::Ranked : DispatchPolicy::Random;
        std::string emergency = c.dispatch.emergency == EmergencyMode::Broadcast ? "broadcast" : "ranked";
        read(d, "emergency", emergency);
        if (emergency != "broadcast" && emergency != "ranked") {
            fail(ErrorCode::InvalidConfig, "emergency must be broadcast or ranked");
        }
        c.dispatch.emergency = emergency == "broadcast" ? EmergencyMode::Broadcast : EmergencyMode::Ranked;
    }

    if (j.contains("network")) {
        const Json& n = j.at("network");
        check_keys(n, {"availability_prob", "delivery_failure_prob", "per_message_overhead_bytes"}, "network");
        read(n, "availability_prob", c.network.availability_prob);
        read(n, "delivery_failure_prob", c.network.delivery_failure_prob);
        read(n, "per_message_overhead_bytes", c.network.per_message_overhead_bytes);
    }

    if (j.contains("behavior")) {
        const Json& b = j.at("behavior");
        check_keys(b, {"response_log_mean", "response_log_sd", "read_log_mean", "read_log_sd", "by_class"}, "behavior");
        read(b, "response_log_mean", c.behavior.response_log_mean);
        read(b, "response_log_sd", c.behavior.response_log_sd);
        read(b, "read_log_mean", c.behavior.read_log_mean);
        read(b, "read_log_sd", c.behavior.read_log_sd);
        if (b.contains("by_class")) {
            c.behavior.by_class.clear();
            for (const auto& [key, v] : b.at("by_class").items()) {
                check_keys(v, {"busyness", "focus"}, "class behaviour");
                ClassBehavior cb;
                read(v, "busyness", cb.busyness);
                read(v, "focus", cb.focus);
                c.behavior.by_class[class_ref(key_ref(key), tax)] = cb;
            }
        }
    }

    if (j.contains("quality")) {
        const Json& q = j.at("quality");
        check_keys(q, {"prs", "theta", "em", "w_min", "profile_alpha", "gamification_half_life_s", "gamification_w_acc",
                       "methods", "measure_compute_time"},
                   "quality");
        if (q.contains("prs")) {
            const Json& p = q.at("prs");
            check_keys(p, {"beta", "t_min", "by_type"}, "prs");
            read(p, "beta", c.quality.prs.global.beta);
            read(p, "t_min", c.quality.prs.global.t_min);
            if (p.contains("by_type")) {
                c.quality.prs.by_type.clear();
                for (const auto& [key, v] : p.at("by_type").items()) {
                    check_keys(v, {"beta", "t_min"}, "prs by_type");
                    PrsParams pp = c.quality.prs.global;
                    read(v, "beta", pp.beta);
                    read(v, "t_min", pp.t_min);
                    c.quality.prs.by_type[type_ref(key_ref(key), tax)] = pp;
                }
            }
        }
        read(q, "theta", c.quality.theta);
        if (q.contains("em")) {
            const Json& e = q.at("em");
            check_keys(e, {"max_iters", "tol", "alpha"}, "em");
            read(e, "max_iters", c.quality.em.max_iters);
            read(e, "tol", c.quality.em.tol);
            read(e, "alpha", c.quality.em.alpha);
        }
        read(q, "w_min", c.quality.w_min);
        read(q, "profile_alpha", c.quality.profile_alpha);
        read(q, "gamification_half_life_s", c.quality.gamification_half_life_s);
        read(q, "gamification_w_acc", c.quality.gamification_w_acc);
        read(q, "methods", c.quality.methods);
        read(q, "measure_compute_time", c.quality.measure_compute_time);
    }

    if (j.contains("geolearn")) {
        const Json& g = j.at("geolearn");
        check_keys(g, {"enabled", "min_samples", "k", "max_iters", "tol", "seed", "accuracy_threshold", "prs_threshold"},
                   "geolearn");
        read(g, "enabled", c.geolearn.enabled);
        read(g, "min_samples", c.geolearn.params.min_samples);
        read(g, "k", c.geolearn.params.cluster.k);
        read(g, "max_iters", c.geolearn.params.cluster.max_iters);
        read(g, "tol", c.geolearn.params.cluster.tol);
        read(g, "seed", c.geolearn.params.cluster.seed);
        read(g, "accuracy_threshold", c.geolearn.params.thresholds.accuracy);
        read(g, "prs_threshold", c.geolearn.params.thresholds.prs);
    }
    c.validate();
    return c;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    return scenario_from_json(read_json_file(path));
}

} // namespace mcs
