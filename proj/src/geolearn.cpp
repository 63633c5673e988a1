#include "mcs/geolearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mcs/error.hpp"
#include "mcs/kernels.hpp"
#include "mcs/rng.hpp"

namespace mcs {

const char* to_string(Verdict v) noexcept {
    return v == Verdict::Efficient ? "efficient" : "inefficient";
}

std::array<double, kFeatureDims> raw_vector(const LocationFeature& f) {
    return {f.mean_accuracy, f.mean_prs, f.response_rate};
}

FeatureSet featurize(std::span<const LocationObservation> observations, std::size_t min_samples) {
    if (observations.empty()) fail(ErrorCode::NoData, "no location observations");

    struct Acc {
        std::size_t total = 0, answered = 0, correct = 0;
        double prs = 0.0;
    };
    std::map<std::pair<ClassId, TaskTypeId>, Acc> groups;
    for (const auto& o : observations) {
        auto& g = groups[{o.class_id, o.task_type}];
        ++g.total;
        if (o.answered) {
            ++g.answered;
            g.correct += o.correct ? 1 : 0;
            g.prs += o.prs;
        }
    }

    FeatureSet fs;
    for (const auto& [key, g] : groups) {
        if (g.total < min_samples) continue;
        LocationFeature f;
        f.class_id = key.first;
        f.task_type = key.second;
        f.sample_count = g.total;
        f.response_rate = static_cast<double>(g.answered) / static_cast<double>(g.total);
        if (g.answered > 0) {
            f.mean_accuracy = static_cast<double>(g.correct) / static_cast<double>(g.answered);
            f.mean_prs = g.prs / static_cast<double>(g.answered);
        }
        fs.features.push_back(f);
    }
    if (fs.features.empty()) {
        fail(ErrorCode::NoData, "no (class, task type) group has at least " + std::to_string(min_samples) +
                                    " observations");
    }

    const std::size_t n = fs.features.size();
    fs.standardized.resize(kFeatureDims * n);
    for (std::size_t d = 0; d < kFeatureDims; ++d) {
        double mean = 0.0;
        for (const auto& f : fs.features) mean += raw_vector(f)[d];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& f : fs.features) {
            const double diff = raw_vector(f)[d] - mean;
            var += diff * diff;
        }
        var /= static_cast<double>(n);
        const double sd = std::sqrt(var);
        const double scale = sd > 1e-12 ? sd : 1.0;
        fs.mean[d] = mean;
        fs.scale[d] = scale;
        for (std::size_t i = 0; i < n; ++i) {
            fs.standardized[d * n + i] = (raw_vector(fs.features[i])[d] - mean) / scale;
        }
    }
    return fs;
}

namespace {

// Index of the feature for (class, type), or n when absent.
std::size_t find_feature(const FeatureSet& fs, ClassId c, TaskTypeId t) {
    for (std::size_t i = 0; i < fs.size(); ++i) {
        if (fs.features[i].class_id == c && fs.features[i].task_type == t) return i;
    }
    return fs.size();
}

std::size_t nearest(std::span<const double> dist_row) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < dist_row.size(); ++c) {
        if (dist_row[c] < dist_row[best]) best = c;
    }
    return best;
}

// Appends farthest-point centroids until there are k of them.
void add_farthest(const FeatureSet& fs, std::vector<double>& centroids, std::size_t k) {
    const std::size_t n = fs.size();
    const auto& kern = kernels::active();
    while (centroids.size() / kFeatureDims < k) {
        const std::size_t have = centroids.size() / kFeatureDims;
        std::vector<double> dist(n * have);
        kern.sq_dist(fs.standardized, n, kFeatureDims, centroids, have, dist);
        std::size_t pick = 0;
        double pick_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = *std::min_element(dist.begin() + static_cast<std::ptrdiff_t>(i * have),
                                               dist.begin() + static_cast<std::ptrdiff_t>((i + 1) * have));
            if (d > pick_d) {
                pick_d = d;
                pick = i;
            }
        }
        for (std::size_t d = 0; d < kFeatureDims; ++d) centroids.push_back(fs.value(pick, d));
    }
}

} // namespace

ClusterResult seeded_cluster(const FeatureSet& fs, std::span<const SeedLabel> seeds,
                             const ClusterParams& params) {
    const std::size_t n = fs.size();
    const std::size_t k = params.k;
    if (k < 2) fail(ErrorCode::InvalidArgument, "k must be >= 2");
    if (n == 0 || n < k) {
        fail(ErrorCode::TooFewPoints, std::to_string(n) + " features cannot form " + std::to_string(k) + " clusters");
    }
    if (params.max_iters < 1) fail(ErrorCode::InvalidArgument, "max_iters must be >= 1");

    ClusterResult r;
    r.k = k;
    r.pinned.assign(n, 0);
    std::vector<std::size_t> pin_cluster(n, 0);
    std::vector<double> centroids;

    if (!seeds.empty()) {
        std::array<std::vector<std::size_t>, 2> members;
        for (const auto& s : seeds) {
            const std::size_t i = find_feature(fs, s.class_id, s.task_type);
            if (i == n || r.pinned[i]) continue;
            r.pinned[i] = 1;
            pin_cluster[i] = cluster_of(s.verdict);
            members[cluster_of(s.verdict)].push_back(i);
        }
        if (members[0].empty() || members[1].empty()) {
            fail(ErrorCode::InvalidArgument, "seeds must label at least one feature per verdict");
        }
        for (const auto& group : members) {
            for (std::size_t d = 0; d < kFeatureDims; ++d) {
                double sum = 0.0;
                for (std::size_t i : group) sum += fs.value(i, d);
                centroids.push_back(sum / static_cast<double>(group.size()));
            }
        }
    } else {
        Rng rng(derive_seed(params.seed, "kmeans"));
        const std::size_t first = rng.index(n);
        for (std::size_t d = 0; d < kFeatureDims; ++d) centroids.push_back(fs.value(first, d));
    }
    add_farthest(fs, centroids, k);

    const auto& kern = kernels::active();
    std::vector<double> dist(n * k);
    std::vector<std::size_t> assignment(n, k); // k marks "unassigned"
    for (int it = 1; it <= params.max_iters; ++it) {
        kern.sq_dist(fs.standardized, n, kFeatureDims, centroids, k, dist);
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = r.pinned[i] ? pin_cluster[i]
                                              : nearest(std::span<const double>(dist).subspan(i * k, k));
            changed |= c != assignment[i];
            assignment[i] = c;
        }

        std::vector<double> next(k * kFeatureDims, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assignment[i]];
            for (std::size_t d = 0; d < kFeatureDims; ++d) next[assignment[i] * kFeatureDims + d] += fs.value(i, d);
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double moved = 0.0;
            for (std::size_t d = 0; d < kFeatureDims; ++d) {
                double& v = next[c * kFeatureDims + d];
                v = counts[c] > 0 ? v / static_cast<double>(counts[c]) : centroids[c * kFeatureDims + d];
                const double diff = v - centroids[c * kFeatureDims + d];
                moved += diff * diff;
            }
            shift = std::max(shift, std::sqrt(moved));
        }
        centroids = std::move(next);
        r.iterations = it;
        r.sizes = std::move(counts);
        if (!changed && shift < params.tol) {
            r.converged = true;
            break;
        }
    }
    r.assignment = std::move(assignment);
    r.centroids = std::move(centroids);
    r.degenerate = std::any_of(r.sizes.begin(), r.sizes.end(), [](std::size_t s) { return s == 0; });
    return r;
}

std::vector<EfficiencyPair> label_efficiency(const ClusterResult& clusters, const FeatureSet& fs,
                                             const EfficiencyThresholds& thr) {
    if (!(thr.accuracy >= 0.0 && thr.accuracy <= 1.0) || !(thr.prs >= 0.0)) {
        fail(ErrorCode::InvalidArgument, "efficiency thresholds out of range");
    }
    if (clusters.assignment.size() != fs.size()) {
        fail(ErrorCode::InvalidArgument, "cluster assignment does not match the feature set");
    }
    const std::size_t k = clusters.k;
    std::vector<double> acc(k, 0.0), prs(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const std::size_t c = clusters.assignment[i];
        acc[c] += fs.features[i].mean_accuracy;
        prs[c] += fs.features[i].mean_prs;
        ++count[c];
    }
    std::vector<Verdict> verdict(k, Verdict::Inefficient);
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] == 0) continue;
        const double a = acc[c] / static_cast<double>(count[c]);
        const double p = prs[c] / static_cast<double>(count[c]);
        verdict[c] = (a >= thr.accuracy && p >= thr.prs) ? Verdict::Efficient : Verdict::Inefficient;
    }

    const double acc_span = std::max(thr.accuracy, 1.0 - thr.accuracy);
    std::vector<EfficiencyPair> out;
    out.reserve(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto& f = fs.features[i];
        const double m_acc = acc_span > 0.0 ? (f.mean_accuracy - thr.accuracy) / acc_span : 1.0;
        const double m_prs = thr.prs > 0.0 ? std::clamp((f.mean_prs - thr.prs) / thr.prs, -1.0, 1.0) : 1.0;
        const double signed_margin = std::min(m_acc, m_prs);
        const Verdict v = verdict[clusters.assignment[i]];
        const double conf = std::clamp(v == Verdict::Efficient ? signed_margin : -signed_margin, 0.0, 1.0);
        out.push_back({f.class_id, f.task_type, v, conf, f.sample_count});
    }
    return out;
}

std::vector<SeedLabel> extreme_seeds(const FeatureSet& fs) {
    if (fs.size() < 2) return {};
    std::size_t hi = 0, lo = 0;
    for (std::size_t i = 1; i < fs.size(); ++i) {
        if (fs.features[i].mean_accuracy > fs.features[hi].mean_accuracy) hi = i;
        if (fs.features[i].mean_accuracy < fs.features[lo].mean_accuracy) lo = i;
    }
    if (hi == lo) lo = hi == 0 ? 1 : 0;
    return {{fs.features[hi].class_id, fs.features[hi].task_type, Verdict::Efficient},
            {fs.features[lo].class_id, fs.features[lo].task_type, Verdict::Inefficient}};
}

GeolearnResult learn_efficiency(std::span<const LocationObservation> observations,
                                std::span<const SeedLabel> seeds, const GeolearnParams& params) {
    GeolearnResult r;
    r.features = featurize(observations, params.min_samples);
    std::vector<SeedLabel> auto_seeds;
    if (seeds.empty()) {
        auto_seeds = extreme_seeds(r.features);
        seeds = auto_seeds;
    }
    r.clusters = seeded_cluster(r.features, seeds, params.cluster);
    r.pairs = label_efficiency(r.clusters, r.features, params.thresholds);
    return r;
}

std::size_t verdict_churn(std::span<const EfficiencyPair> before, std::span<const EfficiencyPair> after) {
    std::map<std::pair<ClassId, TaskTypeId>, Verdict> old;
    for (const auto& p : before) old[{p.class_id, p.task_type}] = p.verdict;
    std::size_t churn = 0;
    for (const auto& p : after) {
        auto it = old.find({p.class_id, p.task_type});
        if (it == old.end()) {
            ++churn;
        } else {
            churn += it->second != p.verdict ? 1 : 0;
            old.erase(it);
        }
    }
    return churn + old.size();
}

EfficiencyPrior to_prior(std::span<const EfficiencyPair> pairs) {
    EfficiencyPrior prior;
    for (const auto& p : pairs) prior[{p.class_id, p.task_type}] = p.verdict == Verdict::Efficient;
    return prior;
}

} // namespace mcs
