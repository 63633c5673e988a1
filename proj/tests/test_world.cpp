#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "mcs/error.hpp"
#include "mcs/harness.hpp"
#include "mcs/world.hpp"
#include "mcs/rng.hpp"
#include <cmath>

using namespace mcs;

namespace {

WorldConfig small_config(std::uint32_t n = 50) {
    WorldConfig c;
    c.places = grid_places(c.taxonomy, GeoPoint(52.2297, 21.0122), 20, 600.0, 150.0);
    c.n_workers = n;
    return c;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an mcs::Error");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_SUITE("world") {

TEST_CASE("schedules wrap around the day") {
    MobilitySchedule s{{{0.0, 1}, {3600.0, 2}, {7200.0, 3}}, 86400.0};
    CHECK_NOTHROW(s.validate());
    CHECK(s.place_at(0.0) == 1);
    CHECK(s.place_at(3599.0) == 1);
    CHECK(s.place_at(3600.0) == 2);
    CHECK(s.place_at(80000.0) == 3);
    CHECK(s.place_at(86400.0 + 4000.0) == 2);
    CHECK(s.dwell_of(0) == 3600.0);
    CHECK(s.dwell_of(2) == 86400.0 - 7200.0);
    MobilitySchedule bad{{{5.0, 1}}, 86400.0};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("record_activity enforces ordering and positive times") {
    ActivityHistory h;
    h = record_activity(h, {1, 0, 0, 10.0, true, false, 100.0});
    h = record_activity(h, {2, 0, 0, 10.0, true, false, 100.0});
    CHECK(h.records.size() == 2);
    CHECK(code_of([&] { record_activity(h, {3, 0, 0, 10.0, true, false, 50.0}); }) == ErrorCode::OutOfOrder);
    CHECK(code_of([&] { record_activity(h, {3, 0, 0, 0.0, true, false, 200.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("build_profile applies Laplace smoothing") {
    const auto tax = Taxonomy::standard();
    std::vector<Place> places{{1, "home", GeoPoint(0, 0), 1, 100.0}, {2, "work", GeoPoint(0, 0.1), 2, 100.0}};
    LocationIndex idx(places, 0);
    MobilitySchedule s{{{0.0, 1}, {21600.0, 2}}, 86400.0};

    ActivityHistory h;
    for (int i = 0; i < 4; ++i) h = record_activity(h, {1, 0, 1, 30.0, i < 3, false, double(i)});
    h = record_activity(h, {1, 1, 1, 15.0, false, true, 10.0});
    h.multilabel_offers = 3;

    ProfileParams pp;
    pp.alpha = 1.0;
    const auto p = build_profile(h, s, idx, tax, pp);
    CHECK(p.skill[0] == doctest::Approx(4.0 / 6.0));
    CHECK(p.skill[1] == doctest::Approx(1.0 / 3.0));
    CHECK(p.skill[2] == doctest::Approx(0.5));
    CHECK(p.mean_prs[0] == doctest::Approx(1.0));
    CHECK(p.mean_prs[1] == doctest::Approx(2.0));
    CHECK(p.mean_prs[2] == 0.0);
    CHECK(p.sample_counts[0] == 4);
    CHECK(p.multilabel_willingness == doctest::Approx(2.0 / 5.0));
    CHECK(p.class_affinity[1] == doctest::Approx(0.25));
    CHECK(p.class_affinity[2] == doctest::Approx(0.75));
    CHECK(std::accumulate(p.class_affinity.begin(), p.class_affinity.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("spammer_count rounds halves away from zero") {
    CHECK(spammer_count(0.4, 100) == 40);
    CHECK(spammer_count(0.25, 10) == 3);
    CHECK(spammer_count(0.0, 10) == 0);
}

TEST_CASE("generate_world injects exactly the requested strategies") {
    auto c = small_config(100);
    c.spammer_ratio = 0.3;
    c.uniform_spammer_share = 0.5;
    c.sloth_fraction = 0.1;
    const World w = generate_world(c, 42);
    std::size_t uni = 0, fixed = 0, sloth = 0;
    for (const auto& wk : w.workers) {
        uni += wk.strategy.kind == StrategyKind::UniformSpammer;
        fixed += wk.strategy.kind == StrategyKind::FixedAnswerSpammer;
        if (wk.strategy.kind == StrategyKind::Sloth) {
            ++sloth;
            CHECK(wk.strategy.slowness >= c.sloth_min);
            CHECK(wk.strategy.slowness <= c.sloth_max);
        }
    }
    CHECK(uni == 15);
    CHECK(fixed == 15);
    CHECK(sloth == 7);
    CHECK(w.ux.size() == 100);
}

TEST_CASE("generate_world is deterministic and seed-sensitive") {
    const auto c = small_config();
    CHECK(generate_world(c, 7) == generate_world(c, 7));
    CHECK_FALSE(generate_world(c, 7) == generate_world(c, 8));
}

TEST_CASE("generate_world validates its input") {
    auto c = small_config(0);
    CHECK(code_of([&] { generate_world(c, 1); }) == ErrorCode::EmptyWorld);
    c = small_config();
    c.places.clear();
    CHECK(code_of([&] { generate_world(c, 1); }) == ErrorCode::EmptyWorld);
    c = small_config();
    c.spammer_ratio = 0.5;
    CHECK(code_of([&] { generate_world(c, 1); }) == ErrorCode::InvalidConfig);
    c.allow_high_spammer_ratio = true;
    CHECK_NOTHROW(generate_world(c, 1));
}

TEST_CASE("cycle reliability hands values to honest workers in order") {
    auto c = small_config(10);
    c.reliability.kind = ReliabilityModel::Kind::Cycle;
    c.reliability.values = {0.95, 0.6};
    const World w = generate_world(c, 3);
    for (const auto& wk : w.workers) CHECK(wk.reliability == (wk.id % 2 == 0 ? 0.95 : 0.6));
}

TEST_CASE("specialization concentrates skill on one task type") {
    auto c = small_config(12);
    c.specialization = Specialization{0.9, 0.55};
    const World w = generate_world(c, 3);
    for (const auto& wk : w.workers) {
        const auto specialty = wk.id % c.taxonomy.task_type_count();
        for (std::size_t t = 0; t < wk.type_reliability.size(); ++t) {
            CHECK(wk.type_reliability[t] == (t == specialty ? 0.9 : 0.55));
        }
    }
}

TEST_CASE("step_mobility follows schedules and rejects going back") {
    const World w0 = generate_world(small_config(), 5);
    const World w1 = step_mobility(w0, 50000.0);
    CHECK(w1.clock == 50000.0);
    for (const auto& wk : w1.workers) {
        const PlaceId p = wk.schedule.place_at(50000.0);
        CHECK(wk.place == p);
        const Place* place = w1.index.find(p);
        REQUIRE(place != nullptr);
        CHECK(haversine_distance(wk.location.point, place->center) <= place->radius_m * w1.jitter_fraction + 1e-6);
        CHECK(wk.location.class_id == classify_location(wk.location.point, w1.index));
    }
    CHECK(code_of([&] { step_mobility(w1, 10.0); }) == ErrorCode::ClockRegression);
}

TEST_CASE("dwell_position is a pure function of its inputs") {
    const Place p{1, "x", GeoPoint(52.0, 21.0), 1, 200.0};
    CHECK(dwell_position(p, 9, 3, 1, 0.5) == dwell_position(p, 9, 3, 1, 0.5));
    CHECK_FALSE(dwell_position(p, 9, 3, 1, 0.5) == dwell_position(p, 9, 4, 1, 0.5));
    CHECK(dwell_position(p, 9, 3, 1, 0.0) == p.center);
}

}

TEST_SUITE("world") {

TEST_CASE("profile examples") {
    const auto tax = Taxonomy::standard();
    const ClassId school = *tax.class_by_name("school");
    const TaskTypeId translation = *tax.task_type_by_name("translation");
    const LocationIndex idx({{1, "s", GeoPoint(50, 19), school, 80.0}}, tax.default_class);
    const MobilitySchedule s{{{0.0, 1}}, 86400.0};

    const auto empty = build_profile({}, s, idx, tax, {});
    for (double v : empty.skill) CHECK(v == 0.5);
    CHECK(empty.class_affinity[school] == 1.0);

    ActivityHistory h;
    for (int i = 0; i < 10; ++i) h = record_activity(h, {1, translation, school, 20.0, i != 4, false, double(i)});
    const auto p = build_profile(h, s, idx, tax, {});
    CHECK(p.skill[translation] == doctest::Approx(10.0 / 12.0));
}

TEST_CASE("profile invariants hold on generated worlds") {
    WorldConfig c;
    c.places = grid_places(c.taxonomy, GeoPoint(52.2297, 21.0122), 30, 600.0, 150.0);
    c.n_workers = 40;
    const World w = generate_world(c, 8);
    Rng rng(8);
    for (const auto& wk : w.workers) {
        ActivityHistory h;
        for (int i = 0; i < 30; ++i) {
            h = record_activity(h, {1, static_cast<TaskTypeId>(rng.index(6)), 0, rng.uniform(1, 100), rng.bernoulli(0.7),
                                    false, double(i)});
        }
        const auto p = build_profile(h, wk.schedule, w.index, w.taxonomy, {});
        double sum = 0;
        for (double a : p.class_affinity) {
            CHECK(a >= 0.0);
            CHECK(a <= 1.0);
            sum += a;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        for (double s : p.skill) {
            CHECK(s > 0.0);
            CHECK(s < 1.0);
        }
    }
}

TEST_CASE("spammer count matches round(ratio * n) across sizes") {
    Rng rng(5);
    for (int i = 0; i < 5000; ++i) {
        const auto n = static_cast<std::uint32_t>(1 + rng.index(10000));
        const double ratio = rng.uniform();
        CHECK(spammer_count(ratio, n) == static_cast<std::uint32_t>(std::llround(ratio * n)));
    }
    WorldConfig c;
    c.places = grid_places(c.taxonomy, GeoPoint(52.2297, 21.0122), 10, 600.0, 150.0);
    c.n_workers = 100;
    c.spammer_ratio = 0.4;
    std::size_t spam = 0;
    for (const auto& w : generate_world(c, 1).workers) spam += w.strategy.is_spammer();
    CHECK(spam == 40);
    c.spammer_ratio = 0.0;
    for (const auto& w : generate_world(c, 1).workers) CHECK(w.strategy.kind == StrategyKind::Honest);
}

TEST_CASE("stepping to the current clock changes nothing") {
    const World w0 = step_mobility(generate_world(small_config(), 5), 1234.0);
    CHECK(step_mobility(w0, 1234.0) == w0);
}

TEST_CASE("a worker scheduled at a transport place is classified as transport") {
    const auto tax = Taxonomy::standard();
    const ClassId transport = *tax.class_by_name("transport");
    World w;
    w.taxonomy = tax;
    w.index = LocationIndex({{1, "home", GeoPoint(52.0, 21.0), *tax.class_by_name("home"), 100.0},
                             {2, "train", GeoPoint(52.1, 21.1), transport, 100.0}},
                            tax.default_class);
    Worker wk;
    wk.schedule = MobilitySchedule{{{0.0, 1}, {3600.0, 2}, {7200.0, 1}}, 86400.0};
    w.workers.push_back(wk);
    w.seed = 3;
    const World moved = step_mobility(w, 4000.0);
    CHECK(moved.workers[0].location.class_id == transport);
    CHECK(moved.workers[0].place == 2);
}

TEST_CASE("end-of-day positions follow a brute-force segment scan") {
    const World w = step_mobility(generate_world(small_config(80), 13), 86399.0);
    for (const auto& wk : w.workers) {
        std::size_t seg = 0;
        for (std::size_t s = 0; s < wk.schedule.segments.size(); ++s) {
            if (wk.schedule.segments[s].start_s <= 86399.0) seg = s;
        }
        CHECK(seg == wk.schedule.segments.size() - 1);
        CHECK(wk.place == wk.schedule.segments[seg].place);
    }
}

}
