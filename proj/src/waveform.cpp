#include "crom/waveform.hpp"

#include <cmath>
#include <stdexcept>

namespace crom {

bool single_pulse_shape(const Vector& y, double settle_frac) {
  if (y.size() < 3) return false;
  Index peak_at = 0;
  const double peak = y.cwiseAbs().maxCoeff(&peak_at);
  if (!(peak > 0.0)) return false;
  if (peak_at == 0 || peak_at == y.size() - 1) return false;
  return std::abs(y[y.size() - 1]) < settle_frac * peak;
}

bool sustained_activity(const Vector& y, double dt, double tail_start,
                        double threshold_frac) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double peak = y.size() > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
  if (!(peak > 0.0)) return false;
  const Index first = static_cast<Index>(std::ceil(tail_start / dt));
  double tail_peak = 0.0;
  for (Index k = std::max<Index>(first, 0); k < y.size(); ++k) {
    tail_peak = std::max(tail_peak, std::abs(y[k]));
  }
  return tail_peak > threshold_frac * peak;
}

}  // namespace crom
