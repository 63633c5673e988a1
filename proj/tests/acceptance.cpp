// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mcs/export.hpp"
#include "mcs/harness.hpp"
#include "mcs/quality.hpp"
#include "mcs/rng.hpp"
#include "planted.hpp"

using namespace mcs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ReliabilityModel uniform_reliability(double lo, double hi) {
    ReliabilityModel r;
    r.kind = ReliabilityModel::Kind::Uniform;
    r.lo = lo;
    r.hi = hi;
    return r;
}

// Binary questions, fixed-reliability honest crowd, random assignment,
// lossless network.
ScenarioConfig binary_base(std::uint32_t tasks, std::uint32_t workers) {
    auto c = ScenarioConfig::defaults();
    c.world.n_workers = workers;
    c.world.reliability = uniform_reliability(0.8, 0.8);
    c.tasks.normal_tasks = tasks;
    c.tasks.questions_per_task = 10;
    c.tasks.labels_per_question = 2;
    c.dispatch.fanout = 5;
    c.dispatch.policy = DispatchPolicy::Random;
    c.quality.methods = {"majority"};
    c.geolearn.enabled = false;
    return c;
}

// Closed-form probability that a majority of 5 independent answers at p is right.
double majority_of_five(double p) {
    double s = 0;
    const double binom[6] = {1, 5, 10, 10, 5, 1};
    for (int k = 3; k <= 5; ++k) s += binom[k] * std::pow(p, k) * std::pow(1 - p, 5 - k);
    return s;
}

Outcome ac1_binomial_oracle() {
    const double oracle = 0.94208; // frozen value of the closed form at p = 0.8
    if (std::abs(majority_of_five(0.8) - oracle) > 1e-12) return {false, "closed form disagrees with frozen oracle"};
    const auto t0 = std::chrono::steady_clock::now();
    const auto rs = run_scenario(binary_base(1000, 100));
    const double secs = seconds_since(t0);
    std::size_t evaluated = 0;
    for (const auto& q : rs.questions) evaluated += q.answers == 5 && !q.warmup;
    const double acc = rs.report("majority")->accuracy;
    const bool ok = evaluated == 10000 && std::abs(acc - oracle) <= 0.01 && secs < 10.0;
    return {ok, fmt("questions=%zu accuracy=%.5f oracle=%.5f time=%.2fs", evaluated, acc, oracle, secs)};
}

Outcome ac2_spammer_sweep() {
    SweepSpec s;
    s.base = binary_base(100, 100);
    s.base.world.reliability = uniform_reliability(0.6, 0.95);
    s.axis = SweepAxis::SpammerRatio;
    s.values = {0.0, 0.1, 0.2, 0.3, 0.4};
    s.repetitions = 10;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = sweep(s);
    const double secs = seconds_since(t0);
    std::vector<double> mean;
    for (const auto& row : r.summary) mean.push_back(row.mean_accuracy);
    bool monotone = true;
    for (std::size_t i = 1; i < mean.size(); ++i) monotone &= mean[i] <= mean[i - 1] + 0.02;
    const bool drop = mean.back() <= mean.front() - 0.05;
    std::string curve;
    for (double m : mean) curve += fmt("%.4f ", m);
    return {monotone && drop && secs < 60.0, fmt("means=[ %s] time=%.2fs", curve.c_str(), secs)};
}

Outcome ac3_em_vs_majority() {
    auto c = binary_base(100, 25);
    c.world.reliability.kind = ReliabilityModel::Kind::Cycle;
    c.world.reliability.values = {0.95, 0.9, 0.85, 0.6, 0.55};
    c.world.spammer_ratio = 0.4;
    c.world.uniform_spammer_share = 1.0;
    c.quality.methods = {"majority", "em"};
    double sum_mv = 0, sum_em = 0, worst = 1;
    bool per_seed = true;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        c.seed = seed;
        const auto rs = run_scenario(c);
        const double mv = rs.report("majority")->accuracy, em = rs.report("em")->accuracy;
        per_seed &= em >= mv - 0.005;
        worst = std::min(worst, em - mv);
        sum_mv += mv;
        sum_em += em;
    }
    const bool ok = per_seed && sum_em / 10 >= sum_mv / 10 + 0.01;
    return {ok, fmt("mean_mv=%.4f mean_em=%.4f worst_seed_gap=%.4f", sum_mv / 10, sum_em / 10, worst)};
}

Outcome ac4_prs_exactness() {
    bool ok = true;
    for (double beta : {1.5, 7.0, 30.0, 120.0}) {
        const PrsParams p{beta, 1.0};
        ok &= personal_response_time(p, beta) == 1.0;
        ok &= personal_response_time(p, 2 * beta) == 0.5;
    }
    const PrsParams p{30.0, 1.0};
    double prev = personal_response_time(p, p.t_min);
    std::size_t violations = 0;
    for (int i = 1; i < 10000; ++i) {
        const double t = p.t_min + i * 0.05;
        const double v = personal_response_time(p, t);
        violations += v > prev;
        prev = v;
    }
    ok &= violations == 0;
    return {ok, fmt("monotonicity violations=%zu over 10000 grid points", violations)};
}

Outcome ac5_network_conservation() {
    auto c = binary_base(400, 100);
    c.network = {0.8, 0.1, 64};
    bool conserved = true;
    std::size_t attempted = 0;
    double worst = 0, av = 0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        c.seed = seed;
        const auto rs = run_scenario(c);
        const auto& m = *rs.network;
        conserved &= m.delivered + m.failed + m.unreachable == m.attempted;
        for (const auto& [id, tm] : rs.network_by_task) conserved &= tm.delivered + tm.failed + tm.unreachable == tm.attempted;
        attempted = m.attempted;
        av = m.av;
        worst = std::max(worst, std::abs(m.av - 0.8));
    }
    const bool ok = conserved && attempted >= 10000 && worst <= 0.03;
    return {ok, fmt("conserved=%d attempted=%zu last_av=%.4f worst_av_error=%.4f", conserved, attempted, av, worst)};
}

Outcome ac6_geolearn_recovery() {
    const auto ps = planted::pairs(9);
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t worst = ps.size();
    std::string per_seed;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto obs = planted::observations(ps, 50, 0.9, 0.5, seed);
        const std::vector<SeedLabel> seeds{{ps[0].class_id, ps[0].task_type, Verdict::Efficient},
                                           {ps[9].class_id, ps[9].task_type, Verdict::Inefficient}};
        GeolearnParams gp;
        const auto learned = learn_efficiency(obs, seeds, gp);
        std::size_t right = 0;
        for (const auto& p : learned.pairs) {
            for (const auto& truth : ps) {
                if (truth.class_id == p.class_id && truth.task_type == p.task_type) {
                    right += (p.verdict == Verdict::Efficient) == truth.efficient;
                }
            }
        }
        worst = std::min(worst, right);
        per_seed += fmt("%zu ", right);
    }
    const double secs = seconds_since(t0);
    return {worst >= 16 && secs < 30.0, fmt("correct per data seed=[ %s] of 18, time=%.2fs", per_seed.c_str(), secs)};
}

ScenarioConfig profile_world(bool informative) {
    auto c = ScenarioConfig::defaults();
    c.world.n_workers = 100;
    if (informative) {
        c.world.specialization = Specialization{0.9, 0.55};
    } else {
        c.world.reliability = uniform_reliability(0.8, 0.8);
    }
    c.tasks.normal_tasks = 160;
    c.tasks.warmup_tasks = 60;
    c.tasks.questions_per_task = 10;
    c.dispatch.weights = {0.0, 0.0, 1.0, 0.0};
    c.dispatch.fanout = 5;
    c.quality.methods = {"majority"};
    c.geolearn.enabled = false;
    return c;
}

Outcome ac7_profile_ranking() {
    const auto skilled = hypothesis_profiles(profile_world(true), 10).front();
    const auto flat = hypothesis_profiles(profile_world(false), 10).front();
    const bool ok = skilled.difference >= 0.05 && std::abs(flat.difference) <= 0.02;
    return {ok, fmt("concentrated: ranked=%.4f random=%.4f diff=%.4f; uninformative diff=%.4f", skilled.mean_a,
                    skilled.mean_b, skilled.difference, flat.difference)};
}

Outcome ac8_geofence() {
    auto c = ScenarioConfig::defaults();
    c.world.n_workers = 100;
    c.tasks.normal_tasks = 120;
    c.tasks.warmup_tasks = 20;
    c.quality.methods = {"majority"};
    c.geolearn.enabled = false;
    c.dispatch.weights = {1.0, 1.0, 1.0, 0.0};
    // Calm classes answer fast and attentively; busy classes slowly and distracted.
    std::vector<ClassId> calm;
    for (ClassId cls = 1; cls < c.world.taxonomy.class_count(); ++cls) {
        const bool is_calm = cls <= 5;
        c.behavior.by_class[cls] = is_calm ? ClassBehavior{0.5, 1.0} : ClassBehavior{3.0, 0.4};
        if (is_calm) calm.push_back(cls);
    }
    for (const auto& t : c.world.taxonomy.task_types) c.tasks.admissible[t.id] = calm;
    const auto cmp = hypothesis_geofence(c, 10);
    const auto& t = cmp[0];
    const auto& acc = cmp[1];
    const bool ok = -t.difference > t.paired_se && acc.difference > acc.paired_se;
    return {ok, fmt("mean t geofenced=%.2f blind=%.2f (se %.3f); accuracy geofenced=%.4f blind=%.4f (se %.4f)",
                    t.mean_a, t.mean_b, t.paired_se, acc.mean_a, acc.mean_b, acc.paired_se)};
}

Outcome ac9_determinism() {
    auto c = ScenarioConfig::defaults();
    c.tasks.emergency_tasks = 5;
    c.network = {0.9, 0.05, 32};
    c.tasks.multi_label_fraction = 0.2;
    c.tasks.labels_per_question = 3;
    const auto base = fs::temp_directory_path() / "mcs_acceptance_determinism";
    fs::remove_all(base);
    export_results(run_scenario(c), base / "a");
    export_results(run_scenario(c), base / "b");
    std::size_t files = 0, same = 0;
    for (const auto& e : fs::directory_iterator(base / "a")) {
        ++files;
        const auto other = base / "b" / e.path().filename();
        same += fs::exists(other) && file_hash(e.path()) == file_hash(other);
    }
    fs::remove_all(base);
    return {files >= 9 && same == files, fmt("identical files %zu/%zu", same, files)};
}

Outcome ac10_weighted_reduction() {
    Rng rng(2024);
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto n = 1 + rng.index(15);
        const auto labels = 2 + rng.index(5);
        const double w = rng.uniform(0.01, 10.0);
        std::vector<Answer> answers;
        WeightMap weights;
        for (std::size_t k = 0; k < n; ++k) {
            const auto id = static_cast<WorkerId>(rng.index(1000) * 16 + k);
            answers.push_back({1, 1, id, {static_cast<Label>(rng.index(labels))}, 0.0, 1.0});
            weights[id] = w;
        }
        mismatches += weighted_majority(answers, weights) != majority_vote(answers);
    }
    return {mismatches == 0, fmt("mismatches=%zu of 1000", mismatches)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"AC1 majority binomial oracle", ac1_binomial_oracle},
        {"AC2 spammer robustness sweep", ac2_spammer_sweep},
        {"AC3 iterative vs non-iterative aggregation", ac3_em_vs_majority},
        {"AC4 PRS exactness", ac4_prs_exactness},
        {"AC5 network metric conservation", ac5_network_conservation},
        {"AC6 geolearn planted recovery", ac6_geolearn_recovery},
        {"AC7 profile-aware ranking", ac7_profile_ranking},
        {"AC8 geofenced dispatch", ac8_geofence},
        {"AC9 determinism", ac9_determinism},
        {"AC10 weighted reduction", ac10_weighted_reduction},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
