#pragma once

// Personal response time (PRS) scoring against a "best waiting factor".

#include <map>

#include "mcs/domain.hpp"

namespace mcs {

struct PrsParams {
    double beta = 30.0; // seconds
    double t_min = 1.0; // clamp floor, seconds

    // Throws InvalidArgument unless 0 < t_min < beta.
    void validate() const;
};

// beta / max(t, t_min). Throws NonPositiveTime for t <= 0.
double personal_response_time(const PrsParams& p, double t);

// |beta - t|. Throws NonPositiveTime for t <= 0.
double delta_to_beta(const PrsParams& p, double t);

// Per-task-type beta with a global fallback.
struct PrsTable {
    PrsParams global;
    std::map<TaskTypeId, PrsParams> by_type;

    const PrsParams& for_type(TaskTypeId t) const {
        auto it = by_type.find(t);
        return it == by_type.end() ? global : it->second;
    }
    void validate() const;
};

} // namespace mcs
