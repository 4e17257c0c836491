#pragma once

#include "crom/types.hpp"

namespace crom {

// Loose shape check for planar flux runs: |y| reaches a single dominant peak
// and settles back below settle_frac * peak by the end of the record.
bool single_pulse_shape(const Vector& y, double settle_frac = 0.25);

// Reentry classification on the flux record: activity persisting past
// tail_start (in ms) above threshold_frac of the global |y| peak.
bool sustained_activity(const Vector& y, double dt, double tail_start,
                        double threshold_frac = 0.05);

}  // namespace crom
