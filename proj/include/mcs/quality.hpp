#pragma once

// Quality model: response-time scores, answer aggregation (majority,
// credibility-weighted majority, confusion-matrix EM, multi-label
// thresholding), accuracy, credibility weights and gamification scores.

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcs/domain.hpp"
#include "mcs/response.hpp"
#include "mcs/world.hpp"

namespace mcs {

struct Answer {
    TaskId task_id = 0;
    QuestionId question_id = 0;
    WorkerId worker_id = 0;
    LabelSet labels; // non-empty; singleton unless the question is multi-label
    double read_at = 0.0;
    double sent_at = 0.0;

    double response_time() const noexcept { return sent_at - read_at; }

    friend bool operator==(const Answer&, const Answer&) = default;
};

struct ArstReport {
    double sum = 0.0; // the ARST value
    double mean = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

// Summed response time over the answers of one task. Throws NoAnswers.
ArstReport aggregated_response_time(std::span<const Answer> answers);

// Most frequent label, smallest label id on ties. Throws NoAnswers, and
// InvalidArgument for an answer carrying more than one label.
Label majority_vote(std::span<const Answer> answers);

using WeightMap = std::map<WorkerId, double>;

// Label with the largest summed weight, smallest id on ties. Throws
// MissingWeight when an answering worker has no weight.
Label weighted_majority(std::span<const Answer> answers, const WeightMap& weights);

// One question's worth of single-label votes for EM.
struct EmItem {
    QuestionId question_id = 0;
    std::vector<Label> candidates;
    std::vector<std::pair<WorkerId, Label>> votes;
};

struct EmParams {
    int max_iters = 100;
    double tol = 1e-6;
    double alpha = 1.0; // Laplace pseudo-count for confusions and priors
};

struct EmResult {
    std::map<QuestionId, Label> labels;
    std::map<QuestionId, std::vector<double>> posteriors; // over label_space
    std::vector<Label> label_space;                       // sorted union of candidates
    // Row-major |L| x |L|: confusion[w][true * L + answered].
    std::map<WorkerId, std::vector<double>> confusion;
    std::vector<double> priors;
    int iterations = 0;
    bool converged = false;
};

// Dawid-Skene style EM with majority-vote initialisation. Throws EmptyMatrix
// when there are no items or an item has no votes.
EmResult em_aggregate(std::span<const EmItem> items, const EmParams& params = {});

// Labels chosen by at least a fraction theta of the answers. Throws
// NoAnswers, and InvalidArgument unless 0 < theta <= 1.
LabelSet multilabel_aggregate(std::span<const Answer> answers, double theta);

// Weighted variant: fraction of total weight instead of answer count.
LabelSet multilabel_aggregate_weighted(std::span<const Answer> answers, const WeightMap& weights,
                                       double theta);

using LabelMap = std::map<QuestionId, LabelSet>;

// Fraction of questions whose estimate equals the truth exactly (set
// equality for multi-label). Throws EmptyInput and KeyMismatch.
double accuracy(const LabelMap& estimated, const LabelMap& truth);

struct CredibilityWeight {
    WorkerId worker_id = 0;
    double weight = 1.0;
};

inline constexpr double kDefaultMinCredibility = 0.1;

// w_min + (1 - w_min) * class_affinity[task_class].
CredibilityWeight credibility_weight(WorkerId worker, const WorkerProfile& profile, ClassId task_class,
                                     double w_min = kDefaultMinCredibility);

struct AggregationReport {
    std::string method;
    LabelMap estimates;
    double accuracy = 0.0;
    bool has_accuracy = false;
    int iterations = 0;
    double compute_seconds = 0.0;
};

struct GamificationParams {
    PrsParams prs;
    double half_life_s = 86'400.0;
    double w_acc = 0.5;
    double w_eff = 0.5;

    void validate() const;
};

// Sum over records of 2^(-age / half_life) * (w_acc * correct +
// w_eff * min(1, PRS(t))), with age = now - timestamp clamped at 0.
double gamification_score(const ActivityHistory& history, const GamificationParams& params, double now);

struct GamificationScore {
    WorkerId worker_id = 0;
    double score = 0.0;
    std::size_t rank = 0; // 1 = top
};

// Orders by descending score, smaller worker id first on equal scores.
std::vector<GamificationScore> rank_gamification(std::span<const std::pair<WorkerId, double>> scores);

} // namespace mcs
