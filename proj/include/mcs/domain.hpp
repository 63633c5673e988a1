#pragma once

// Core vocabulary: geographic points, the location/task taxonomy, tasks and
// their questions.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcs {

inline constexpr double kEarthRadiusM = 6'371'000.0;

using WorkerId = std::uint32_t;
using TaskId = std::uint32_t;
using QuestionId = std::uint32_t;
using ClassId = std::uint16_t;
using TaskTypeId = std::uint16_t;
using PlaceId = std::uint32_t;
using Label = std::int32_t;
using LabelSet = std::vector<Label>; // sorted, unique

class GeoPoint {
public:
    GeoPoint() = default;
    // Throws InvalidArgument outside [-90, 90] x [-180, 180]; lon 180 maps to -180.
    GeoPoint(double lat_deg, double lon_deg);

    double lat() const noexcept { return lat_; }
    double lon() const noexcept { return lon_; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    double lat_ = 0.0;
    double lon_ = 0.0;
};

// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept;

// Unit vector on the sphere; chord length between two unit vectors is
// 2 sin(theta / 2), which lets geofence tests run on plain arithmetic.
struct UnitVec {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;
};

UnitVec to_unit(const GeoPoint& p) noexcept;
double chord_sq(const UnitVec& a, const UnitVec& b) noexcept;
double chord_sq_to_meters(double chord_sq) noexcept;
// Largest squared chord whose arc length is <= radius_m (4 when the radius
// covers the whole sphere).
double meters_to_chord_sq(double radius_m) noexcept;

struct LocationClass {
    ClassId id = 0;
    std::string name;

    friend bool operator==(const LocationClass&, const LocationClass&) = default;
};

struct LocationVariant {
    std::uint16_t id = 0;
    ClassId parent = 0;
    std::string name;

    friend bool operator==(const LocationVariant&, const LocationVariant&) = default;
};

struct TaskType {
    TaskTypeId id = 0;
    std::string name;

    friend bool operator==(const TaskType&, const TaskType&) = default;
};

// Location classes {SL}, their variants {SLV} and the task types TT.
// Class and task-type ids are dense (0..n-1) so profiles can index by id.
struct Taxonomy {
    std::vector<LocationClass> classes;
    std::vector<LocationVariant> variants;
    std::vector<TaskType> task_types;
    ClassId default_class = 0; // "open area"

    std::size_t class_count() const noexcept { return classes.size(); }
    std::size_t task_type_count() const noexcept { return task_types.size(); }
    bool has_class(ClassId id) const noexcept { return id < classes.size(); }
    bool has_task_type(TaskTypeId id) const noexcept { return id < task_types.size(); }
    std::optional<ClassId> class_by_name(std::string_view name) const;
    std::optional<TaskTypeId> task_type_by_name(std::string_view name) const;

    // Throws InvalidConfig on duplicate/non-dense ids, empty names or
    // dangling variant parents.
    void validate() const;

    // Twelve stand-in classes (id 0 is "open area") and six task types.
    static Taxonomy standard();

    friend bool operator==(const Taxonomy&, const Taxonomy&) = default;
};

struct Place {
    PlaceId id = 0;
    std::string name;
    GeoPoint center;
    ClassId class_id = 0;
    double radius_m = 100.0;

    friend bool operator==(const Place&, const Place&) = default;
};

class LocationIndex {
public:
    LocationIndex() = default;
    LocationIndex(std::vector<Place> places, ClassId default_class);

    std::span<const Place> places() const noexcept { return places_; }
    ClassId default_class() const noexcept { return default_class_; }
    const Place* find(PlaceId id) const noexcept;
    bool empty() const noexcept { return places_.empty(); }

    friend bool operator==(const LocationIndex&, const LocationIndex&) = default;

private:
    std::vector<Place> places_; // sorted by id
    ClassId default_class_ = 0;
};

// Class of the nearest place whose radius contains p (smaller place id on
// ties); the index's default class when no place contains p.
ClassId classify_location(const GeoPoint& p, const LocationIndex& index);

struct WorkerLocation {
    GeoPoint point;
    ClassId class_id = 0;

    friend bool operator==(const WorkerLocation&, const WorkerLocation&) = default;
};

enum class TaskKind { Normal, Emergency };

struct TaskContext {
    GeoPoint center;
    double radius_m = std::numeric_limits<double>::infinity();
    std::vector<ClassId> admissible_classes; // sorted; empty means all
};

struct Question {
    QuestionId id = 0;
    std::vector<Label> candidates;
    bool multi_label = false;
    LabelSet ground_truth;
};

struct Task {
    TaskId id = 0;
    TaskKind kind = TaskKind::Normal;
    TaskTypeId task_type = 0;
    TaskContext context;
    std::vector<Question> questions;
    std::uint32_t payload_bytes = 0;
    double created_at = 0.0;

    bool admits(ClassId c) const noexcept;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool mentions(std::string_view fragment) const;
};

inline constexpr double kDefaultEmergencyMaxRadiusM = 5'000.0;

ValidationReport validate_task(const Task& task, const Taxonomy& taxonomy,
                               double emergency_max_radius_m = kDefaultEmergencyMaxRadiusM);

const char* to_string(TaskKind kind) noexcept;

} // namespace mcs
