#include "mcs/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mcs/error.hpp"

namespace mcs {

void PrsParams::validate() const {
    if (!(t_min > 0.0 && t_min < beta)) {
        fail(ErrorCode::InvalidArgument, "PRS parameters must satisfy 0 < t_min < beta");
    }
}

void PrsTable::validate() const {
    global.validate();
    for (const auto& [type, p] : by_type) p.validate();
}

double personal_response_time(const PrsParams& p, double t) {
    if (!(t > 0.0)) fail(ErrorCode::NonPositiveTime, "response time must be positive");
    return p.beta / std::max(t, p.t_min);
}

double delta_to_beta(const PrsParams& p, double t) {
    if (!(t > 0.0)) fail(ErrorCode::NonPositiveTime, "response time must be positive");
    return std::abs(p.beta - t);
}

ArstReport aggregated_response_time(std::span<const Answer> answers) {
    if (answers.empty()) fail(ErrorCode::NoAnswers, "ARST needs at least one answer");
    ArstReport r;
    r.count = answers.size();
    for (const auto& a : answers) {
        const double t = a.response_time();
        r.sum += t;
        r.max = std::max(r.max, t);
    }
    r.mean = r.sum / static_cast<double>(r.count);
    return r;
}

namespace {

Label single_label(const Answer& a) {
    if (a.labels.size() != 1) {
        fail(ErrorCode::InvalidArgument, "single-label aggregation got an answer with " +
                                             std::to_string(a.labels.size()) + " labels");
    }
    return a.labels.front();
}

template <typename Score>
Label argmax_smallest(const std::map<Label, Score>& tally) {
    // std::map iterates in ascending label order, so strict > keeps the smallest.
    auto best = tally.begin();
    for (auto it = tally.begin(); it != tally.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return best->first;
}

} // namespace

Label majority_vote(std::span<const Answer> answers) {
    if (answers.empty()) fail(ErrorCode::NoAnswers, "majority vote needs at least one answer");
    std::map<Label, std::size_t> tally;
    for (const auto& a : answers) ++tally[single_label(a)];
    return argmax_smallest(tally);
}

Label weighted_majority(std::span<const Answer> answers, const WeightMap& weights) {
    if (answers.empty()) fail(ErrorCode::NoAnswers, "weighted majority needs at least one answer");
    std::map<Label, double> tally;
    for (const auto& a : answers) {
        auto it = weights.find(a.worker_id);
        if (it == weights.end()) {
            fail(ErrorCode::MissingWeight, "no credibility weight for worker " + std::to_string(a.worker_id));
        }
        tally[single_label(a)] += it->second;
    }
    return argmax_smallest(tally);
}

EmResult em_aggregate(std::span<const EmItem> items, const EmParams& params) {
    if (items.empty()) fail(ErrorCode::EmptyMatrix, "EM needs at least one question");
    if (params.max_iters < 1) fail(ErrorCode::InvalidArgument, "EM max_iters must be >= 1");
    if (!(params.tol > 0.0)) fail(ErrorCode::InvalidArgument, "EM tolerance must be positive");
    if (!(params.alpha > 0.0)) fail(ErrorCode::InvalidArgument, "EM smoothing must be positive");

    EmResult result;
    std::set<Label> space;
    std::map<WorkerId, std::size_t> worker_index;
    for (const auto& item : items) {
        if (item.votes.empty()) {
            fail(ErrorCode::EmptyMatrix, "question " + std::to_string(item.question_id) + " has no votes");
        }
        space.insert(item.candidates.begin(), item.candidates.end());
        for (const auto& [w, l] : item.votes) worker_index.emplace(w, 0);
    }
    result.label_space.assign(space.begin(), space.end());
    std::size_t next = 0;
    for (auto& [w, idx] : worker_index) idx = next++;

    const std::size_t L = result.label_space.size();
    const std::size_t Q = items.size();
    const std::size_t W = worker_index.size();
    auto label_idx = [&](Label l) {
        auto it = std::lower_bound(result.label_space.begin(), result.label_space.end(), l);
        return static_cast<std::size_t>(it - result.label_space.begin());
    };

    // Dense copies of the vote structure.
    struct Vote {
        std::size_t worker;
        std::size_t label;
    };
    std::vector<std::vector<Vote>> votes(Q);
    std::vector<std::vector<std::uint8_t>> allowed(Q, std::vector<std::uint8_t>(L, 0));
    std::vector<std::vector<double>> post(Q, std::vector<double>(L, 0.0));
    for (std::size_t q = 0; q < Q; ++q) {
        for (Label c : items[q].candidates) allowed[q][label_idx(c)] = 1;
        for (const auto& [w, l] : items[q].votes) {
            const std::size_t li = label_idx(l);
            if (li >= L || result.label_space[li] != l || !allowed[q][li]) {
                fail(ErrorCode::InvalidArgument, "vote label is not a candidate of question " +
                                                     std::to_string(items[q].question_id));
            }
            votes[q].push_back({worker_index[w], li});
            post[q][li] += 1.0;
        }
        for (double& p : post[q]) p /= static_cast<double>(votes[q].size());
    }

    const double a = params.alpha;
    std::vector<double> priors(L);
    std::vector<double> conf(W * L * L);
    std::vector<double> denom(W * L);

    for (int it = 1; it <= params.max_iters; ++it) {
        // M-step.
        std::fill(priors.begin(), priors.end(), a);
        std::fill(conf.begin(), conf.end(), a);
        std::fill(denom.begin(), denom.end(), a * static_cast<double>(L));
        for (std::size_t q = 0; q < Q; ++q) {
            for (std::size_t l = 0; l < L; ++l) priors[l] += post[q][l];
            for (const auto& v : votes[q]) {
                for (std::size_t l = 0; l < L; ++l) {
                    conf[(v.worker * L + l) * L + v.label] += post[q][l];
                    denom[v.worker * L + l] += post[q][l];
                }
            }
        }
        const double prior_total = static_cast<double>(Q) + a * static_cast<double>(L);
        for (double& p : priors) p /= prior_total;
        for (std::size_t w = 0; w < W; ++w) {
            for (std::size_t l = 0; l < L; ++l) {
                for (std::size_t m = 0; m < L; ++m) conf[(w * L + l) * L + m] /= denom[w * L + l];
            }
        }

        // E-step in log space, restricted to each question's candidates.
        double delta = 0.0;
        std::vector<double> logp(L);
        for (std::size_t q = 0; q < Q; ++q) {
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < L; ++l) {
                if (!allowed[q][l]) continue;
                double s = std::log(priors[l]);
                for (const auto& v : votes[q]) s += std::log(conf[(v.worker * L + l) * L + v.label]);
                logp[l] = s;
                top = std::max(top, s);
            }
            double z = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                logp[l] = allowed[q][l] ? std::exp(logp[l] - top) : 0.0;
                z += logp[l];
            }
            for (std::size_t l = 0; l < L; ++l) {
                const double p = logp[l] / z;
                delta = std::max(delta, std::abs(p - post[q][l]));
                post[q][l] = p;
            }
        }
        result.iterations = it;
        if (delta < params.tol) {
            result.converged = true;
            break;
        }
    }

    for (std::size_t q = 0; q < Q; ++q) {
        std::size_t best = L;
        for (std::size_t l = 0; l < L; ++l) {
            if (!allowed[q][l]) continue;
            if (best == L || post[q][l] > post[q][best]) best = l;
        }
        result.labels[items[q].question_id] = result.label_space[best];
        result.posteriors[items[q].question_id] = post[q];
    }
    for (const auto& [w, idx] : worker_index) {
        result.confusion[w].assign(conf.begin() + static_cast<std::ptrdiff_t>(idx * L * L),
                                   conf.begin() + static_cast<std::ptrdiff_t>((idx + 1) * L * L));
    }
    result.priors = priors;
    return result;
}

namespace {

LabelSet threshold_labels(const std::map<Label, double>& mass, double total, double theta) {
    LabelSet out;
    for (const auto& [label, m] : mass) {
        if (m / total >= theta) out.push_back(label);
    }
    return out;
}

void check_theta(double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) fail(ErrorCode::InvalidArgument, "theta must be in (0, 1]");
}

} // namespace

LabelSet multilabel_aggregate(std::span<const Answer> answers, double theta) {
    check_theta(theta);
    if (answers.empty()) fail(ErrorCode::NoAnswers, "multi-label aggregation needs at least one answer");
    std::map<Label, double> mass;
    for (const auto& a : answers) {
        for (Label l : std::set<Label>(a.labels.begin(), a.labels.end())) mass[l] += 1.0;
    }
    return threshold_labels(mass, static_cast<double>(answers.size()), theta);
}

LabelSet multilabel_aggregate_weighted(std::span<const Answer> answers, const WeightMap& weights,
                                       double theta) {
    check_theta(theta);
    if (answers.empty()) fail(ErrorCode::NoAnswers, "multi-label aggregation needs at least one answer");
    std::map<Label, double> mass;
    double total = 0.0;
    for (const auto& a : answers) {
        auto it = weights.find(a.worker_id);
        if (it == weights.end()) {
            fail(ErrorCode::MissingWeight, "no credibility weight for worker " + std::to_string(a.worker_id));
        }
        total += it->second;
        for (Label l : std::set<Label>(a.labels.begin(), a.labels.end())) mass[l] += it->second;
    }
    return threshold_labels(mass, total, theta);
}

double accuracy(const LabelMap& estimated, const LabelMap& truth) {
    if (truth.empty() || estimated.empty()) fail(ErrorCode::EmptyInput, "accuracy needs at least one question");
    if (estimated.size() != truth.size()) {
        fail(ErrorCode::KeyMismatch, "estimated and truth cover different question sets");
    }
    std::size_t correct = 0;
    auto e = estimated.begin();
    for (auto t = truth.begin(); t != truth.end(); ++t, ++e) {
        if (e->first != t->first) {
            fail(ErrorCode::KeyMismatch, "question " + std::to_string(t->first) + " has no estimate");
        }
        correct += e->second == t->second ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

CredibilityWeight credibility_weight(WorkerId worker, const WorkerProfile& profile, ClassId task_class,
                                     double w_min) {
    if (!(w_min > 0.0 && w_min < 1.0)) fail(ErrorCode::InvalidArgument, "w_min must be in (0, 1)");
    const double affinity =
        task_class < profile.class_affinity.size() ? profile.class_affinity[task_class] : 0.0;
    return {worker, w_min + (1.0 - w_min) * std::clamp(affinity, 0.0, 1.0)};
}

void GamificationParams::validate() const {
    prs.validate();
    if (!(half_life_s > 0.0)) fail(ErrorCode::InvalidArgument, "gamification half-life must be positive");
    if (!(w_acc >= 0.0 && w_eff >= 0.0) || std::abs(w_acc + w_eff - 1.0) > 1e-9) {
        fail(ErrorCode::InvalidArgument, "gamification weights must be non-negative and sum to 1");
    }
}

double gamification_score(const ActivityHistory& history, const GamificationParams& params, double now) {
    params.validate();
    double score = 0.0;
    for (const auto& r : history.records) {
        const double age = std::max(0.0, now - r.timestamp);
        const double decay = std::exp2(-age / params.half_life_s);
        const double efficiency = std::min(1.0, personal_response_time(params.prs, r.response_s));
        score += decay * (params.w_acc * (r.correct ? 1.0 : 0.0) + params.w_eff * efficiency);
    }
    return score;
}

std::vector<GamificationScore> rank_gamification(std::span<const std::pair<WorkerId, double>> scores) {
    std::vector<GamificationScore> out;
    out.reserve(scores.size());
    for (const auto& [id, s] : scores) out.push_back({id, s, 0});
    std::sort(out.begin(), out.end(), [](const GamificationScore& a, const GamificationScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.worker_id < b.worker_id;
    });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
    return out;
}

} // namespace mcs
