#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hardstop/errors.hpp"
#include "hardstop/geometry.hpp"

namespace hardstop {

/// One quasi-static load step of an activity cycle.
struct TrajectorySample {
    double cycle_pct = 0.0;
    WorkspaceVector workspace;
    std::optional<double> delta_z;  // mm
    std::optional<double> f_z;      // N
};

/// Activity motion cycle, discretized into quasi-static steps (61 per cycle by
/// convention).
struct Trajectory {
    std::string label;
    std::vector<TrajectorySample> samples;

    void validate() const {
        if (samples.empty()) throw ValidationError("Trajectory '" + label + "': no samples");
        double prev = -1.0;
        for (const TrajectorySample& s : samples) {
            if (s.cycle_pct < 0.0 || s.cycle_pct > 100.0)
                throw ValidationError("Trajectory '" + label + "': cycle_pct outside [0, 100]");
            if (!(s.cycle_pct > prev))
                throw ValidationError("Trajectory '" + label + "': cycle_pct must be strictly increasing");
            prev = s.cycle_pct;
        }
    }
};

}  // namespace hardstop
