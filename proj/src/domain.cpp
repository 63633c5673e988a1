#include "mcs/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "mcs/error.hpp"

namespace mcs {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

} // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyWorld: return "EmptyWorld";
    case ErrorCode::ClockRegression: return "ClockRegression";
    case ErrorCode::OutOfOrder: return "OutOfOrder";
    case ErrorCode::NoWorkers: return "NoWorkers";
    case ErrorCode::NotEmergency: return "NotEmergency";
    case ErrorCode::NoEvents: return "NoEvents";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::NoAnswers: return "NoAnswers";
    case ErrorCode::MissingWeight: return "MissingWeight";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::NoData: return "NoData";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

GeoPoint::GeoPoint(double lat_deg, double lon_deg) {
    if (!(lat_deg >= -90.0 && lat_deg <= 90.0)) {
        fail(ErrorCode::InvalidArgument, "latitude out of range: " + std::to_string(lat_deg));
    }
    if (!(lon_deg >= -180.0 && lon_deg <= 180.0)) {
        fail(ErrorCode::InvalidArgument, "longitude out of range: " + std::to_string(lon_deg));
    }
    lat_ = lat_deg;
    lon_ = lon_deg == 180.0 ? -180.0 : lon_deg;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept {
    const double lat1 = a.lat() * kDegToRad;
    const double lat2 = b.lat() * kDegToRad;
    const double s_lat = std::sin((lat2 - lat1) / 2.0);
    const double s_lon = std::sin((b.lon() - a.lon()) * kDegToRad / 2.0);
    double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

UnitVec to_unit(const GeoPoint& p) noexcept {
    const double lat = p.lat() * kDegToRad;
    const double lon = p.lon() * kDegToRad;
    return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

double chord_sq(const UnitVec& a, const UnitVec& b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

double chord_sq_to_meters(double c2) noexcept {
    const double half_chord = std::clamp(std::sqrt(std::max(c2, 0.0)) / 2.0, 0.0, 1.0);
    return 2.0 * kEarthRadiusM * std::asin(half_chord);
}

double meters_to_chord_sq(double radius_m) noexcept {
    const double angle = radius_m / kEarthRadiusM;
    if (!(angle < std::numbers::pi)) return 4.0;
    const double chord = 2.0 * std::sin(angle / 2.0);
    return chord * chord;
}

std::optional<ClassId> Taxonomy::class_by_name(std::string_view name) const {
    for (const auto& c : classes) {
        if (c.name == name) return c.id;
    }
    return std::nullopt;
}

std::optional<TaskTypeId> Taxonomy::task_type_by_name(std::string_view name) const {
    for (const auto& t : task_types) {
        if (t.name == name) return t.id;
    }
    return std::nullopt;
}

void Taxonomy::validate() const {
    if (classes.empty()) fail(ErrorCode::InvalidConfig, "taxonomy has no location classes");
    if (task_types.empty()) fail(ErrorCode::InvalidConfig, "taxonomy has no task types");
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i].id != i) {
            fail(ErrorCode::InvalidConfig, "location class ids must be dense and ordered 0..n-1");
        }
        if (classes[i].name.empty()) fail(ErrorCode::InvalidConfig, "location class name is empty");
    }
    for (std::size_t i = 0; i < task_types.size(); ++i) {
        if (task_types[i].id != i) {
            fail(ErrorCode::InvalidConfig, "task type ids must be dense and ordered 0..n-1");
        }
        if (task_types[i].name.empty()) fail(ErrorCode::InvalidConfig, "task type name is empty");
    }
    std::set<std::uint16_t> variant_ids;
    for (const auto& v : variants) {
        if (!variant_ids.insert(v.id).second) {
            fail(ErrorCode::InvalidConfig, "duplicate location variant id " + std::to_string(v.id));
        }
        if (!has_class(v.parent)) {
            fail(ErrorCode::InvalidConfig, "variant '" + v.name + "' has unknown parent class");
        }
        if (v.name.empty()) fail(ErrorCode::InvalidConfig, "location variant name is empty");
    }
    if (!has_class(default_class)) fail(ErrorCode::InvalidConfig, "default class not in taxonomy");
}

Taxonomy Taxonomy::standard() {
    Taxonomy t;
    const char* class_names[] = {"open area",     "home",       "work place", "school",
                                 "shopping mall", "transport",  "sport object", "hospital",
                                 "restaurant",    "park",       "cultural venue",
                                 "government office"};
    for (ClassId i = 0; i < 12; ++i) t.classes.push_back({i, class_names[i]});

    struct V {
        ClassId parent;
        const char* name;
    };
    const V variants[] = {{5, "train"},         {5, "bus"},          {5, "station"},
                          {6, "hall"},          {6, "amusement park"}, {6, "public soccer field"},
                          {3, "university"},    {3, "primary school"}, {4, "department store"},
                          {2, "office"},        {2, "factory"}};
    std::uint16_t vid = 0;
    for (const auto& v : variants) t.variants.push_back({vid++, v.parent, v.name});

    const char* type_names[] = {"translation",   "image description", "census",
                                "crisis mapping", "citizen science",  "proofreading"};
    for (TaskTypeId i = 0; i < 6; ++i) t.task_types.push_back({i, type_names[i]});
    t.default_class = 0;
    return t;
}

LocationIndex::LocationIndex(std::vector<Place> places, ClassId default_class)
    : places_(std::move(places)), default_class_(default_class) {
    std::sort(places_.begin(), places_.end(),
              [](const Place& a, const Place& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < places_.size(); ++i) {
        if (places_[i].id == places_[i - 1].id) {
            fail(ErrorCode::InvalidConfig, "duplicate place id " + std::to_string(places_[i].id));
        }
    }
    for (const auto& p : places_) {
        if (!(p.radius_m > 0.0)) {
            fail(ErrorCode::InvalidConfig, "place " + std::to_string(p.id) + " has non-positive radius");
        }
    }
}

const Place* LocationIndex::find(PlaceId id) const noexcept {
    auto it = std::lower_bound(places_.begin(), places_.end(), id,
                               [](const Place& p, PlaceId v) { return p.id < v; });
    return (it != places_.end() && it->id == id) ? &*it : nullptr;
}

ClassId classify_location(const GeoPoint& p, const LocationIndex& index) {
    const Place* best = nullptr;
    double best_dist = 0.0;
    // Places are sorted by id, so a strict comparison keeps the smaller id on ties.
    for (const auto& place : index.places()) {
        const double d = haversine_distance(p, place.center);
        if (d > place.radius_m) continue;
        if (best == nullptr || d < best_dist) {
            best = &place;
            best_dist = d;
        }
    }
    return best ? best->class_id : index.default_class();
}

bool Task::admits(ClassId c) const noexcept {
    const auto& adm = context.admissible_classes;
    return adm.empty() || std::binary_search(adm.begin(), adm.end(), c);
}

bool ValidationReport::mentions(std::string_view fragment) const {
    return std::any_of(violations.begin(), violations.end(), [&](const std::string& v) {
        return v.find(fragment) != std::string::npos;
    });
}

ValidationReport validate_task(const Task& task, const Taxonomy& taxonomy,
                               double emergency_max_radius_m) {
    ValidationReport report;
    auto add = [&](std::string msg) { report.violations.push_back(std::move(msg)); };
    const std::string where = "task " + std::to_string(task.id) + ": ";

    if (!(task.context.radius_m > 0.0)) add(where + "radius must be positive");
    if (task.kind == TaskKind::Emergency &&
        !(std::isfinite(task.context.radius_m) && task.context.radius_m <= emergency_max_radius_m)) {
        add(where + "emergency radius must be finite and <= " +
            std::to_string(emergency_max_radius_m) + " m");
    }
    if (!taxonomy.has_task_type(task.task_type)) add(where + "unknown task type");
    if (!std::is_sorted(task.context.admissible_classes.begin(), task.context.admissible_classes.end())) {
        add(where + "admissible classes must be sorted");
    }
    for (ClassId c : task.context.admissible_classes) {
        if (!taxonomy.has_class(c)) add(where + "unknown location class " + std::to_string(c));
    }
    if (task.questions.empty()) add(where + "task has no questions");

    std::set<QuestionId> seen;
    for (const auto& q : task.questions) {
        const std::string qwhere = where + "question " + std::to_string(q.id) + ": ";
        if (!seen.insert(q.id).second) add(qwhere + "duplicate question id");
        std::set<Label> cands(q.candidates.begin(), q.candidates.end());
        if (cands.size() != q.candidates.size()) add(qwhere + "duplicate candidate labels");
        if (cands.size() < 2) add(qwhere + "too few labels (need >= 2 candidates)");
        if (q.ground_truth.empty()) add(qwhere + "ground truth is empty");
        if (!q.multi_label && q.ground_truth.size() > 1) {
            add(qwhere + "single-label question has several ground-truth labels");
        }
        for (Label l : q.ground_truth) {
            if (!cands.contains(l)) {
                add(qwhere + "ground truth not a subset of candidate labels");
                break;
            }
        }
    }
    return report;
}

const char* to_string(TaskKind kind) noexcept {
    return kind == TaskKind::Emergency ? "emergency" : "normal";
}

} // namespace mcs
