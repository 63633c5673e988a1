#include "mcs/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "mcs/config_io.hpp"
#include "mcs/error.hpp"
#include "mcs/rng.hpp"

namespace fs = std::filesystem;

namespace mcs {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) fail(ErrorCode::IoError, "cannot create directory " + dir.string());
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << content;
    out.close();
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Joins fields with commas; fields never contain commas or quotes except
// taxonomy names, which are quoted when needed.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

template <typename... Ts>
std::string csv_row(const Ts&... fields) {
    std::string out;
    bool first = true;
    auto add = [&](const std::string& f) {
        if (!first) out += ',';
        out += f;
        first = false;
    };
    (add(fields), ...);
    return out + "\n";
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::string class_name(const Taxonomy& t, ClassId id) {
    return t.has_class(id) ? t.classes[id].name : std::to_string(id);
}

std::string type_name(const Taxonomy& t, TaskTypeId id) {
    return t.has_task_type(id) ? t.task_types[id].name : std::to_string(id);
}

std::string efficiency_csv(std::span<const EfficiencyPair> pairs, const Taxonomy& tax) {
    std::string s = "location_class,task_type,verdict,confidence,samples\n";
    for (const auto& p : pairs) {
        s += csv_row(csv_field(class_name(tax, p.class_id)), csv_field(type_name(tax, p.task_type)),
                     std::string(to_string(p.verdict)), num(p.confidence), num(p.samples));
    }
    return s;
}

std::string events_jsonl(const ResultSet& rs) {
    std::map<QuestionId, const LabelSet*> truth;
    std::map<QuestionId, TaskTypeId> types;
    for (const auto& t : rs.tasks) {
        for (const auto& q : t.questions) {
            truth[q.id] = &q.ground_truth;
            types[q.id] = t.task_type;
        }
    }
    // (timestamp, kind, question, worker) -> line; deliveries sort before
    // answers at equal timestamps.
    std::vector<std::pair<std::tuple<double, int, QuestionId, WorkerId>, std::string>> lines;
    lines.reserve(rs.deliveries.size() + rs.answers.size());
    for (const auto& e : rs.deliveries) {
        Json j = {{"event", "delivery"},
                  {"t", e.timestamp},
                  {"task", e.task_id},
                  {"question", e.question_id},
                  {"worker", e.worker_id},
                  {"task_type", e.task_type},
                  {"class", e.class_id},
                  {"outcome", to_string(e.outcome)},
                  {"bytes", e.bytes}};
        lines.push_back({{e.timestamp, 0, e.question_id, e.worker_id}, j.dump()});
    }
    for (const auto& a : rs.answers) {
        const TaskTypeId type = types.at(a.question_id);
        Json j = {{"event", "answer"},
                  {"t", a.sent_at},
                  {"task", a.task_id},
                  {"question", a.question_id},
                  {"worker", a.worker_id},
                  {"labels", a.labels},
                  {"read_at", a.read_at},
                  {"sent_at", a.sent_at},
                  {"correct", a.labels == *truth.at(a.question_id)},
                  {"prs", personal_response_time(rs.config.quality.prs.for_type(type), a.response_time())}};
        lines.push_back({{a.sent_at, 1, a.question_id, a.worker_id}, j.dump()});
    }
    std::sort(lines.begin(), lines.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::string s;
    for (const auto& [key, line] : lines) {
        s += line;
        s += '\n';
    }
    return s;
}

std::string aggregation_csv(const ResultSet& rs) {
    std::string s = "method,answers_per_question,questions_per_worker,spammer_ratio,accuracy,iterations,compute_seconds\n";
    for (const auto& r : rs.reports) {
        s += csv_row(r.method, num(rs.answers_per_question), num(rs.questions_per_worker),
                     num(rs.config.world.spammer_ratio), r.has_accuracy ? num(r.accuracy) : std::string{},
                     std::to_string(r.iterations), num(r.compute_seconds));
    }
    return s;
}

std::string network_row(const std::string& scope, const NetworkMetrics& m) {
    return csv_row(scope, num(m.attempted), num(m.delivered), num(m.failed), num(m.unreachable), num(m.av),
                   num(m.tu), num(m.fail_r));
}

std::string network_csv(const ResultSet& rs) {
    std::string s = "scope,attempted,delivered,failed,unreachable,av,tu,fail_r\n";
    if (rs.network) s += network_row("run", *rs.network);
    for (const auto& [task, m] : rs.network_by_task) s += network_row("task:" + std::to_string(task), m);
    return s;
}

std::string arst_csv(const ResultSet& rs) {
    std::string s = "task,arst,mean,max,count\n";
    for (const auto& [task, a] : rs.arst) {
        s += csv_row(std::to_string(task), num(a.sum), num(a.mean), num(a.max), num(a.count));
    }
    return s;
}

std::string emergencies_csv(const ResultSet& rs) {
    std::string s = "task,inside,reached_inside,coverage,answered,time_to_first_answer,flagged\n";
    for (const auto& e : rs.emergencies) {
        s += csv_row(std::to_string(e.task_id), num(e.inside), num(e.reached_inside), num(e.coverage),
                     std::string(e.answered ? "1" : "0"), num(e.time_to_first_answer),
                     std::string(e.flagged ? "1" : "0"));
    }
    return s;
}

std::string profiles_json(const ResultSet& rs) {
    Json arr = Json::array();
    for (const auto& w : rs.workers) {
        arr.push_back({{"worker", w.id},
                       {"strategy", to_string(w.strategy.kind)},
                       {"reliability", w.reliability},
                       {"skill", w.profile.skill},
                       {"mean_prs", w.profile.mean_prs},
                       {"class_affinity", w.profile.class_affinity},
                       {"multilabel_willingness", w.profile.multilabel_willingness},
                       {"sample_counts", w.profile.sample_counts},
                       {"answers", w.answers},
                       {"gamification", w.gamification},
                       {"rank", w.rank}});
    }
    return dump(Json{{"workers", arr}});
}

void write_manifest(const fs::path& dir, const std::vector<std::string>& files, Json extra) {
    Json hashes = Json::object();
    for (const auto& f : files) hashes[f] = file_hash(dir / f);
    extra["files"] = hashes;
    write_file(dir / "manifest.json", dump(extra));
}

std::string value_tag(double v) {
    std::string s = format_double(v);
    std::replace(s.begin(), s.end(), '.', 'p');
    std::replace(s.begin(), s.end(), '-', 'm');
    return s;
}

} // namespace

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex16(fnv1a(ss.str()));
}

void export_results(const ResultSet& rs, const fs::path& dir) {
    ensure_dir(dir);
    const std::vector<std::pair<std::string, std::string>> files = {
        {"config.json", dump(scenario_to_json(rs.config))},
        {"events.jsonl", events_jsonl(rs)},
        {"aggregation.csv", aggregation_csv(rs)},
        {"network.csv", network_csv(rs)},
        {"arst.csv", arst_csv(rs)},
        {"emergencies.csv", emergencies_csv(rs)},
        {"profiles.json", profiles_json(rs)},
        {"efficiency_pairs.csv", efficiency_csv(rs.efficiency_pairs, rs.config.world.taxonomy)},
    };
    std::vector<std::string> names;
    for (const auto& [name, content] : files) {
        write_file(dir / name, content);
        names.push_back(name);
    }
    write_manifest(dir, names,
                   Json{{"fingerprint", rs.fingerprint},
                        {"seed", rs.config.seed},
                        {"geolearn_note", rs.geolearn_note}});
}

void export_sweep(const SweepResult& sw, const fs::path& dir, bool per_run) {
    ensure_dir(dir);
    const std::string axis = to_string(sw.axis);

    std::string summary = "axis,value,method,mean_accuracy,std_accuracy,runs\n";
    for (const auto& r : sw.summary) {
        summary += csv_row(axis, num(r.axis_value), r.method, num(r.mean_accuracy), num(r.std_accuracy), num(r.runs));
    }
    std::string runs = "axis,value,repetition,seed,fingerprint,method,accuracy\n";
    for (std::size_t i = 0; i < sw.runs.size(); ++i) {
        const auto& rs = sw.runs[i];
        const double value = sw.values[i / sw.repetitions];
        const std::size_t rep = i % sw.repetitions;
        for (const auto& r : rs.reports) {
            runs += csv_row(axis, num(value), num(rep), std::to_string(rs.config.seed), rs.fingerprint, r.method,
                            r.has_accuracy ? num(r.accuracy) : std::string{});
        }
        if (per_run) export_results(rs, dir / ("run_" + value_tag(value) + "_" + std::to_string(rep)));
    }
    Json first = Json::object();
    for (const auto& [m, v] : sw.first_reaching_target) first[m] = v ? Json(*v) : Json(nullptr);
    const Json meta = {{"axis", axis}, {"values", sw.values}, {"repetitions", sw.repetitions}, {"first_reaching_target", first}};

    write_file(dir / "sweep_summary.csv", summary);
    write_file(dir / "sweep_runs.csv", runs);
    write_file(dir / "sweep.json", dump(meta));
}

void export_hypotheses(const HypothesisReport& report, const fs::path& dir) {
    ensure_dir(dir);
    std::string csv = "hypothesis,metric,arm_a,arm_b,mean_a,mean_b,difference,paired_se,seeds,flagged\n";
    Json arr = Json::array();
    for (const auto& c : report.comparisons) {
        csv += csv_row(c.hypothesis, c.metric, c.arm_a, c.arm_b, num(c.mean_a), num(c.mean_b), num(c.difference),
                       num(c.paired_se), num(c.values_a.size()), num(c.flagged));
        arr.push_back({{"hypothesis", c.hypothesis},
                       {"metric", c.metric},
                       {"arm_a", c.arm_a},
                       {"arm_b", c.arm_b},
                       {"values_a", c.values_a},
                       {"values_b", c.values_b},
                       {"mean_a", c.mean_a},
                       {"mean_b", c.mean_b},
                       {"difference", c.difference},
                       {"paired_se", c.paired_se},
                       {"flagged", c.flagged}});
    }
    write_file(dir / "hypotheses.csv", csv);
    write_file(dir / "hypotheses.json", dump(Json{{"comparisons", arr}}));
}

void write_efficiency_pairs(std::span<const EfficiencyPair> pairs, const Taxonomy& taxonomy, const fs::path& file) {
    if (file.has_parent_path()) ensure_dir(file.parent_path());
    write_file(file, efficiency_csv(pairs, taxonomy));
}

LoadedObservations load_observations(const fs::path& results) {
    std::error_code ec;
    if (!fs::exists(results, ec)) fail(ErrorCode::IoError, "no such path " + results.string());
    std::vector<fs::path> runs;
    if (fs::is_regular_file(results / "events.jsonl")) runs.push_back(results);
    if (fs::is_directory(results)) {
        for (const auto& entry : fs::recursive_directory_iterator(results)) {
            if (entry.is_regular_file() && entry.path().filename() == "events.jsonl" &&
                entry.path().parent_path() != results) {
                runs.push_back(entry.path().parent_path());
            }
        }
    }
    std::sort(runs.begin(), runs.end());
    if (runs.empty()) fail(ErrorCode::NoData, "no events.jsonl under " + results.string());

    LoadedObservations out;
    out.runs = runs.size();
    const fs::path cfg = runs.front() / "config.json";
    out.taxonomy = fs::exists(cfg) ? load_scenario(cfg).world.taxonomy : Taxonomy::standard();

    for (const auto& run : runs) {
        std::ifstream in(run / "events.jsonl", std::ios::binary);
        if (!in) fail(ErrorCode::IoError, "cannot read " + (run / "events.jsonl").string());
        // Deliveries keyed by (question, worker); answers fill them in.
        std::map<std::pair<QuestionId, WorkerId>, LocationObservation> obs;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                const Json j = Json::parse(line);
                const std::pair key{j.at("question").get<QuestionId>(), j.at("worker").get<WorkerId>()};
                const auto kind = j.at("event").get<std::string>();
                if (kind == "delivery") {
                    if (j.at("outcome").get<std::string>() != "delivered") continue;
                    obs[key] = {j.at("class").get<ClassId>(), j.at("task_type").get<TaskTypeId>(), false, false, 0.0};
                } else if (kind == "answer") {
                    auto it = obs.find(key);
                    if (it == obs.end()) continue;
                    it->second.answered = true;
                    it->second.correct = j.at("correct").get<bool>();
                    it->second.prs = j.at("prs").get<double>();
                }
            } catch (const nlohmann::json::exception& e) {
                fail(ErrorCode::InvalidConfig,
                     (run / "events.jsonl").string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        for (const auto& [key, o] : obs) out.observations.push_back(o);
    }
    return out;
}

} // namespace mcs
