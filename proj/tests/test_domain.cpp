#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcs/domain.hpp"
#include "mcs/error.hpp"
#include "mcs/rng.hpp"

using namespace mcs;

namespace {

Task simple_task() {
    Task t;
    t.id = 7;
    t.task_type = 0;
    t.context.center = GeoPoint(52.0, 21.0);
    t.context.radius_m = 500.0;
    t.questions.push_back({1, {0, 1}, false, {0}});
    return t;
}

} // namespace

TEST_SUITE("domain") {

TEST_CASE("haversine matches independently computed distances") {
    const GeoPoint warsaw(52.2297, 21.0122), poznan(52.4064, 16.9252);
    const double oracle = 278453.9226888849; // spherical atan2 form, R = 6371 km
    CHECK(std::abs(haversine_distance(warsaw, poznan) - oracle) <= oracle * 1e-3);
    CHECK(haversine_distance(warsaw, poznan) == doctest::Approx(haversine_distance(poznan, warsaw)));
    CHECK(haversine_distance(warsaw, warsaw) == 0.0);
    CHECK(std::abs(haversine_distance(GeoPoint(0, 0), GeoPoint(0, -180)) - 20015086.79602057) < 1.0);
}

TEST_CASE("GeoPoint validates ranges and folds the antimeridian") {
    CHECK_THROWS_AS(GeoPoint(91, 0), Error);
    CHECK_THROWS_AS(GeoPoint(0, 180.5), Error);
    CHECK_THROWS_AS(GeoPoint(std::nan(""), 0), Error);
    CHECK(GeoPoint(10, 180).lon() == -180.0);
    CHECK(GeoPoint(10, 180) == GeoPoint(10, -180));
}

TEST_CASE("chord conversions agree with the arc distance") {
    const GeoPoint a(52.2297, 21.0122), b(52.2397, 21.0222);
    const double d = haversine_distance(a, b);
    const double c2 = chord_sq(to_unit(a), to_unit(b));
    CHECK(chord_sq_to_meters(c2) == doctest::Approx(d).epsilon(1e-9));
    CHECK(meters_to_chord_sq(d) == doctest::Approx(c2).epsilon(1e-9));
    CHECK(meters_to_chord_sq(std::numbers::pi * kEarthRadiusM) == 4.0);
    CHECK(meters_to_chord_sq(std::numeric_limits<double>::infinity()) == 4.0);
}

TEST_CASE("standard taxonomy is dense and searchable") {
    const auto t = Taxonomy::standard();
    CHECK_NOTHROW(t.validate());
    CHECK(t.class_count() == 12);
    CHECK(t.task_type_count() == 6);
    CHECK(t.class_by_name("open area") == ClassId{0});
    CHECK(t.default_class == 0);
    CHECK(t.task_type_by_name("crisis mapping").has_value());
    CHECK_FALSE(t.class_by_name("moon base").has_value());
}

TEST_CASE("taxonomy rejects sparse ids") {
    Taxonomy t = Taxonomy::standard();
    t.classes[3].id = 40;
    CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("location index rejects duplicate ids and bad radii") {
    Place p{1, "a", GeoPoint(0, 0), 1, 100.0};
    CHECK_THROWS_AS(LocationIndex({p, p}, 0), Error);
    Place bad = p;
    bad.radius_m = 0.0;
    CHECK_THROWS_AS(LocationIndex({bad}, 0), Error);
}

TEST_CASE("classify_location picks the nearest containing place") {
    const GeoPoint origin(52.0, 21.0);
    // Two overlapping places; the point sits 10 m from place 5 and ~60 m from place 2.
    Place near{5, "near", GeoPoint(52.0 + 10.0 / 111195.0, 21.0), 3, 200.0};
    Place far{2, "far", GeoPoint(52.0 + 60.0 / 111195.0, 21.0), 4, 200.0};
    LocationIndex idx({near, far}, 0);
    CHECK(classify_location(origin, idx) == 3);
    CHECK(classify_location(GeoPoint(10, 10), idx) == 0);
}

TEST_CASE("classify_location breaks distance ties by smaller place id") {
    Place a{9, "a", GeoPoint(0.001, 0.0), 3, 500.0};
    Place b{4, "b", GeoPoint(-0.001, 0.0), 6, 500.0};
    LocationIndex idx({a, b}, 0);
    CHECK(classify_location(GeoPoint(0, 0), idx) == 6);
}

TEST_CASE("validate_task accepts a well-formed task") {
    CHECK(validate_task(simple_task(), Taxonomy::standard()).ok());
}

TEST_CASE("validate_task reports each violation") {
    const auto tax = Taxonomy::standard();
    Task t = simple_task();
    t.context.radius_m = 0;
    CHECK(validate_task(t, tax).mentions("radius must be positive"));

    t = simple_task();
    t.kind = TaskKind::Emergency;
    t.context.radius_m = std::numeric_limits<double>::infinity();
    CHECK(validate_task(t, tax).mentions("emergency radius"));
    t.context.radius_m = 6000;
    CHECK(validate_task(t, tax).mentions("emergency radius"));
    t.context.radius_m = 4000;
    CHECK(validate_task(t, tax).ok());

    t = simple_task();
    t.task_type = 99;
    CHECK(validate_task(t, tax).mentions("unknown task type"));

    t = simple_task();
    t.questions[0].candidates = {0};
    CHECK(validate_task(t, tax).mentions("too few labels"));

    t = simple_task();
    t.questions[0].ground_truth = {5};
    CHECK(validate_task(t, tax).mentions("ground truth not a subset"));

    t = simple_task();
    t.questions[0].ground_truth = {0, 1};
    CHECK(validate_task(t, tax).mentions("single-label"));
    t.questions[0].multi_label = true;
    CHECK(validate_task(t, tax).ok());

    t = simple_task();
    t.questions.clear();
    CHECK(validate_task(t, tax).mentions("no questions"));

    t = simple_task();
    t.context.admissible_classes = {4, 2};
    CHECK(validate_task(t, tax).mentions("sorted"));
}

TEST_CASE("task admits every class when the admissible list is empty") {
    Task t = simple_task();
    CHECK(t.admits(5));
    t.context.admissible_classes = {2, 4};
    CHECK(t.admits(4));
    CHECK_FALSE(t.admits(5));
}

}

TEST_SUITE("domain") {

TEST_CASE("identity distance is zero") {
    CHECK(haversine_distance(GeoPoint(10, 20), GeoPoint(10, 20)) == 0.0);
}

TEST_CASE("distance is symmetric and obeys the triangle inequality") {
    Rng rng(31);
    auto pt = [&] { return GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 180)); };
    for (int i = 0; i < 2000; ++i) {
        const auto a = pt(), b = pt(), c = pt();
        CHECK(haversine_distance(a, b) == haversine_distance(b, a));
        const double ab = haversine_distance(a, b), bc = haversine_distance(b, c), ac = haversine_distance(a, c);
        CHECK(ac <= (ab + bc) * (1 + 1e-6) + 1e-6);
    }
}

TEST_CASE("classify_location agrees with a brute-force scan") {
    Rng rng(77);
    std::vector<Place> places;
    for (PlaceId id = 0; id < 40; ++id) {
        places.push_back({id, "", GeoPoint(52.0 + rng.uniform(0, 0.05), 21.0 + rng.uniform(0, 0.05)),
                          static_cast<ClassId>(1 + id % 11), rng.uniform(200, 1500)});
    }
    const LocationIndex idx(places, 0);
    for (int i = 0; i < 2000; ++i) {
        const GeoPoint p(52.0 + rng.uniform(-0.01, 0.06), 21.0 + rng.uniform(-0.01, 0.06));
        ClassId expected = 0;
        double best = std::numeric_limits<double>::infinity();
        PlaceId best_id = 0;
        for (const auto& pl : places) {
            const double d = haversine_distance(p, pl.center);
            if (d <= pl.radius_m && (d < best || (d == best && pl.id < best_id))) {
                best = d;
                best_id = pl.id;
                expected = pl.class_id;
            }
        }
        CHECK(classify_location(p, idx) == expected);
    }
}

TEST_CASE("a point at a place centre takes that place's class") {
    const auto tax = Taxonomy::standard();
    const ClassId school = *tax.class_by_name("school");
    const LocationIndex idx({{1, "s", GeoPoint(50, 19), school, 80.0}}, tax.default_class);
    CHECK(classify_location(GeoPoint(50, 19), idx) == school);
    CHECK(classify_location(GeoPoint(51, 19), idx) == *tax.class_by_name("open area"));
}

}
