#include <doctest.h>

#include "mcs/config_io.hpp"
#include "mcs/error.hpp"
#include "mcs/harness.hpp"

using namespace mcs;

TEST_SUITE("config_io") {

TEST_CASE("scenario JSON round-trips") {
    auto c = ScenarioConfig::defaults();
    c.seed = 99;
    c.tasks.admissible[1] = {2, 3};
    c.behavior.by_class[4] = {2.0, 0.5};
    c.world.specialization = Specialization{0.8, 0.6};
    c.quality.prs.by_type[2] = {45.0, 1.0};
    const auto j = scenario_to_json(c);
    const auto back = scenario_from_json(j);
    CHECK(scenario_to_json(back) == j);
    CHECK(config_fingerprint(back) == config_fingerprint(c));
    CHECK(std::isinf(back.tasks.normal_radius_m));
}

TEST_CASE("partial JSON keeps defaults and accepts names") {
    const Json j = Json::parse(R"({
        "seed": 5,
        "world": {"n_workers": 12, "reliability": {"kind": "mixture", "p_high": 0.3}},
        "tasks": {"task_types": ["census"], "admissible": {"census": ["park", 2]}},
        "behavior": {"by_class": {"park": {"busyness": 3.0}}}
    })");
    const auto c = scenario_from_json(j);
    const auto tax = Taxonomy::standard();
    CHECK(c.seed == 5);
    CHECK(c.world.n_workers == 12);
    CHECK(c.world.reliability.kind == ReliabilityModel::Kind::Mixture);
    CHECK(c.world.reliability.p_high == 0.3);
    CHECK(c.tasks.task_types == std::vector<TaskTypeId>{*tax.task_type_by_name("census")});
    const auto& adm = c.tasks.admissible.at(*tax.task_type_by_name("census"));
    CHECK(adm == std::vector<ClassId>{*tax.class_by_name("park"), 2});
    CHECK(c.behavior.for_class(*tax.class_by_name("park")).busyness == 3.0);
    CHECK(c.tasks.questions_per_task == ScenarioConfig::defaults().tasks.questions_per_task);
}

TEST_CASE("invalid JSON is rejected with InvalidConfig") {
    for (const char* text : {R"({"sede": 1})", R"({"world": {"n_workers": "many"}})",
                             R"({"dispatch": {"policy": "psychic"}})", R"({"tasks": {"task_types": ["nope"]}})",
                             R"({"world": {"spammer_ratio": 0.9}})"}) {
        CAPTURE(text);
        try {
            scenario_from_json(Json::parse(text));
            FAIL("expected InvalidConfig");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidConfig);
        }
    }
}

TEST_CASE("location index loads custom taxonomies") {
    const Json j = Json::parse(R"({
        "taxonomy": {"classes": [{"id": 0, "name": "outside"}, {"id": 1, "name": "lab"}],
                     "task_types": [{"id": 0, "name": "survey"}]},
        "places": [{"id": 3, "lat": 10.0, "lon": 20.0, "class": "lab", "radius_m": 50}]
    })");
    Taxonomy t;
    const auto idx = location_index_from_json(j, &t);
    CHECK(t.class_count() == 2);
    CHECK(idx.places().size() == 1);
    CHECK(idx.places()[0].class_id == 1);
    CHECK(classify_location(GeoPoint(10.0, 20.0), idx) == 1);
    CHECK(classify_location(GeoPoint(11.0, 20.0), idx) == 0);
}

}
