#include <doctest.h>

#include <cmath>
#include <set>

#include "mcs/error.hpp"
#include "mcs/harness.hpp"

using namespace mcs;

namespace {

ScenarioConfig small() {
    auto c = ScenarioConfig::defaults();
    c.world.n_workers = 40;
    c.tasks.normal_tasks = 20;
    c.tasks.questions_per_task = 5;
    return c;
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("defaults validate") {
    CHECK_NOTHROW(ScenarioConfig::defaults().validate());
    CHECK(ScenarioConfig::defaults().world.places.size() == 44);
}

TEST_CASE("run produces consistent records") {
    auto c = small();
    c.tasks.emergency_tasks = 2;
    c.network = {0.9, 0.05, 32};
    const auto rs = run_scenario(c);
    CHECK(rs.tasks.size() == 22);
    CHECK(rs.fingerprint.size() == 16);
    REQUIRE(rs.network.has_value());
    CHECK(rs.network->delivered + rs.network->failed + rs.network->unreachable == rs.network->attempted);
    CHECK(rs.network->attempted == rs.deliveries.size());

    std::set<std::pair<QuestionId, WorkerId>> delivered;
    for (const auto& e : rs.deliveries) {
        if (e.outcome == DeliveryOutcome::Delivered) delivered.insert({e.question_id, e.worker_id});
    }
    for (const auto& a : rs.answers) {
        CHECK(delivered.contains({a.question_id, a.worker_id}));
        CHECK(a.sent_at > a.read_at);
    }
    CHECK(rs.reports.size() == 3);
    for (const auto& r : rs.reports) {
        CHECK(r.has_accuracy);
        CHECK(r.accuracy >= 0.0);
        CHECK(r.accuracy <= 1.0);
    }
    CHECK(rs.report("em") != nullptr);
    CHECK(rs.report("nope") == nullptr);
    CHECK(rs.emergencies.size() == 2);
    CHECK(rs.workers.size() == 40);
}

TEST_CASE("run is deterministic") {
    const auto a = run_scenario(small());
    const auto b = run_scenario(small());
    CHECK(a.fingerprint == b.fingerprint);
    CHECK(a.answers == b.answers);
    CHECK(a.deliveries == b.deliveries);
    auto c = small();
    c.seed = 2;
    CHECK(run_scenario(c).fingerprint != a.fingerprint);
}

TEST_CASE("run validates the world") {
    auto c = small();
    c.world.n_workers = 0;
    try {
        run_scenario(c);
        FAIL("expected EmptyWorld");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyWorld);
    }
}

TEST_CASE("multi-label questions aggregate into label sets") {
    auto c = small();
    c.tasks.multi_label_fraction = 1.0;
    c.tasks.labels_per_question = 4;
    const auto rs = run_scenario(c);
    bool saw_multi = false;
    for (const auto& q : rs.questions) saw_multi |= q.multi_label;
    CHECK(saw_multi);
    CHECK(rs.report("majority")->has_accuracy);
}

TEST_CASE("sweep axis names round-trip") {
    for (auto a : {SweepAxis::AnswersPerQuestion, SweepAxis::QuestionsPerWorker, SweepAxis::SpammerRatio}) {
        CHECK(parse_axis(to_string(a)) == a);
    }
    CHECK_FALSE(parse_axis("bogus").has_value());
}

TEST_CASE("sweep points set the axis and seed") {
    SweepSpec s;
    s.base = small();
    s.axis = SweepAxis::AnswersPerQuestion;
    s.values = {3, 7};
    s.repetitions = 2;
    const auto p = sweep_point(s, 7, 1);
    CHECK(p.dispatch.fanout == 7);
    CHECK(p.seed == s.base.seed + 1);
    s.values = {};
    CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("sweep results are independent of thread count") {
    SweepSpec s;
    s.base = small();
    s.axis = SweepAxis::SpammerRatio;
    s.values = {0.0, 0.2};
    s.repetitions = 2;
    s.threads = 1;
    const auto a = sweep(s);
    s.threads = 4;
    const auto b = sweep(s);
    REQUIRE(a.runs.size() == 4);
    REQUIRE(b.runs.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.runs[i].fingerprint == b.runs[i].fingerprint);
    CHECK(a.summary.size() == 6);
    for (std::size_t i = 0; i < a.summary.size(); ++i) CHECK(a.summary[i].mean_accuracy == b.summary[i].mean_accuracy);
}

TEST_CASE("learn rounds report churn") {
    auto c = small();
    c.tasks.normal_tasks = 60;
    c.geolearn.params.min_samples = 5;
    const auto rounds = learn_rounds(c, 2);
    REQUIRE(rounds.size() == 2);
    CHECK(rounds[0].round == 0);
}

}

TEST_SUITE("harness") {

namespace {

ScenarioConfig binary(std::uint32_t tasks) {
    auto c = ScenarioConfig::defaults();
    c.world.n_workers = 60;
    c.world.reliability.kind = ReliabilityModel::Kind::Uniform;
    c.world.reliability.lo = c.world.reliability.hi = 0.8;
    c.tasks.normal_tasks = tasks;
    c.tasks.questions_per_task = 10;
    c.tasks.labels_per_question = 2;
    c.dispatch.policy = DispatchPolicy::Random;
    c.quality.methods = {"majority"};
    c.geolearn.enabled = false;
    return c;
}

} // namespace

TEST_CASE("perfect honest workers give perfect accuracy for every method") {
    auto c = small();
    c.world.reliability.kind = ReliabilityModel::Kind::Uniform;
    c.world.reliability.lo = c.world.reliability.hi = 1.0;
    c.world.spammer_ratio = 0.0;
    const auto rs = run_scenario(c);
    for (const auto& r : rs.reports) CHECK(r.accuracy == 1.0);
}

TEST_CASE("majority accuracy follows the binomial closed form") {
    const std::vector<std::pair<std::uint32_t, double>> oracle{
        {1, 0.8}, {3, 0.896}, {5, 0.94208}, {7, 0.966656}, {9, 0.98041856}};
    for (const auto& [k, expected] : oracle) {
        auto c = binary(400);
        c.dispatch.fanout = k;
        const auto rs = run_scenario(c);
        CHECK(std::abs(rs.report("majority")->accuracy - expected) <= 0.03);
    }
}

TEST_CASE("sweep summary is the mean over runs") {
    SweepSpec spec;
    spec.axis = SweepAxis::SpammerRatio;
    spec.values = {0.0, 0.2};
    spec.repetitions = 3;
    spec.base = binary(20);
    spec.threads = 2;
    const auto r = sweep(spec);
    REQUIRE(r.runs.size() == 6);
    for (const auto& row : r.summary) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& run : r.runs) {
            if (run.config.world.spammer_ratio == row.axis_value) {
                sum += run.report(row.method)->accuracy;
                ++n;
            }
        }
        CHECK(n == row.runs);
        CHECK(row.mean_accuracy == doctest::Approx(sum / n));
    }
}

TEST_CASE("an emergency with nobody in range is flagged") {
    auto c = small();
    c.tasks.emergency_tasks = 3;
    c.tasks.emergency_radius_m = 0.01;
    const auto rs = run_scenario(c);
    REQUIRE(rs.emergencies.size() == 3);
    for (const auto& e : rs.emergencies) {
        CHECK(e.flagged);
        CHECK(e.inside == 0);
        CHECK(e.coverage == 0.0);
    }
}

}

TEST_SUITE("harness") {

TEST_CASE("answers still in flight at the end of warm-up are recorded in order") {
    auto c = small();
    c.tasks.normal_tasks = 60;
    c.tasks.warmup_tasks = 20;
    c.duration_s = 600.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        c.seed = seed;
        ResultSet rs;
        CHECK_NOTHROW(rs = run_scenario(c));
        std::size_t recorded = 0;
        for (const auto& w : rs.workers) recorded += w.answers;
        CHECK(recorded == rs.answers.size());
    }
}

}
