#pragma once

// Semi-supervised location efficiency learning: group (location class,
// task type) outcomes into features, cluster them with seed labels pinned,
// and turn clusters into efficient/inefficient verdicts.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mcs/dispatch.hpp"
#include "mcs/domain.hpp"

namespace mcs {

// One assignment outcome as seen by the location learner.
struct LocationObservation {
    ClassId class_id = 0;
    TaskTypeId task_type = 0;
    bool answered = false;
    bool correct = false;
    double prs = 0.0; // meaningful only when answered
};

struct LocationFeature {
    ClassId class_id = 0;
    TaskTypeId task_type = 0;
    double mean_accuracy = 0.0; // over answered observations
    double mean_prs = 0.0;
    double response_rate = 0.0; // answered / observations
    std::size_t sample_count = 0;

    friend bool operator==(const LocationFeature&, const LocationFeature&) = default;
};

inline constexpr std::size_t kFeatureDims = 3;

struct FeatureSet {
    std::vector<LocationFeature> features; // sorted by (class, type)
    // Standardized values, dimension-major: standardized[d * n + i].
    std::vector<double> standardized;
    std::array<double, kFeatureDims> mean{};
    std::array<double, kFeatureDims> scale{}; // 1 for constant dimensions

    std::size_t size() const noexcept { return features.size(); }
    double value(std::size_t i, std::size_t d) const { return standardized[d * size() + i]; }
};

// Raw (accuracy, prs, response rate) vector of a feature.
std::array<double, kFeatureDims> raw_vector(const LocationFeature& f);

// Throws NoData when there are no observations or no (class, type) group
// reaches min_samples.
FeatureSet featurize(std::span<const LocationObservation> observations, std::size_t min_samples);

enum class Verdict { Efficient, Inefficient };

const char* to_string(Verdict v) noexcept;

struct SeedLabel {
    ClassId class_id = 0;
    TaskTypeId task_type = 0;
    Verdict verdict = Verdict::Efficient;
};

struct ClusterParams {
    std::size_t k = 2;
    int max_iters = 100;
    double tol = 1e-9;
    std::uint64_t seed = 0;
};

struct ClusterResult {
    std::size_t k = 0;
    std::vector<std::size_t> assignment;  // per feature
    std::vector<double> centroids;        // row-major k x kFeatureDims, standardized
    std::vector<std::uint8_t> pinned;     // per feature: 1 when seed-labelled
    std::vector<std::size_t> sizes;       // per cluster
    int iterations = 0;
    bool converged = false;
    bool degenerate = false; // some cluster ended empty
};

// Cluster index reserved for a seed verdict when seeds are supplied.
constexpr std::size_t cluster_of(Verdict v) noexcept { return v == Verdict::Efficient ? 0 : 1; }

// k-means on standardized features. With seeds, clusters 0/1 start at the
// means of the Efficient/Inefficient seed points and those points stay
// pinned; remaining centroids are farthest-point picks. Without seeds the
// first centroid is a seeded random point. Throws TooFewPoints when there
// are fewer features than k and InvalidArgument for k < 2 or one-sided
// seeds.
ClusterResult seeded_cluster(const FeatureSet& features, std::span<const SeedLabel> seeds,
                             const ClusterParams& params);

struct EfficiencyThresholds {
    double accuracy = 0.7;
    double prs = 0.0;
};

struct EfficiencyPair {
    ClassId class_id = 0;
    TaskTypeId task_type = 0;
    Verdict verdict = Verdict::Inefficient;
    double confidence = 0.0;
    std::size_t samples = 0;

    friend bool operator==(const EfficiencyPair&, const EfficiencyPair&) = default;
};

// A cluster is Efficient iff its mean raw accuracy and mean PRS both reach
// their thresholds; members inherit the verdict. Confidence is the member's
// normalised margin from the threshold surface on the verdict's side.
std::vector<EfficiencyPair> label_efficiency(const ClusterResult& clusters, const FeatureSet& features,
                                             const EfficiencyThresholds& thresholds);

// Seeds from the extremes: highest raw accuracy Efficient, lowest
// Inefficient. Returns nothing for fewer than two features.
std::vector<SeedLabel> extreme_seeds(const FeatureSet& features);

struct GeolearnParams {
    std::size_t min_samples = 20;
    ClusterParams cluster;
    EfficiencyThresholds thresholds;
};

struct GeolearnResult {
    FeatureSet features;
    ClusterResult clusters;
    std::vector<EfficiencyPair> pairs;
};

// featurize -> seeded_cluster -> label_efficiency. Empty seeds select
// extreme_seeds.
GeolearnResult learn_efficiency(std::span<const LocationObservation> observations,
                                std::span<const SeedLabel> seeds, const GeolearnParams& params);

// Number of (class, type) pairs whose verdict differs or that appear in
// only one of the lists.
std::size_t verdict_churn(std::span<const EfficiencyPair> before, std::span<const EfficiencyPair> after);

EfficiencyPrior to_prior(std::span<const EfficiencyPair> pairs);

} // namespace mcs
