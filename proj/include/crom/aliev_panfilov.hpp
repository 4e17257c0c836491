#pragma once

#include "crom/types.hpp"

namespace crom {

// Constants of the Aliev-Panfilov monodomain model. Defaults are the
// published fixed values; gamma and t_s are the free parameters (gamma
// controls repolarization speed, t_s the onset of a timed S2 stimulus).
struct APParameters {
  double beta_t = 12.9;      // [ms] time scale
  double beta_phi = 100.0;   // [mV] potential scale
  double delta_phi = -80.0;  // [mV] potential offset, see to_dimensionless
  double c = 8.0;
  double alpha = 0.01;
  double b = 0.15;
  double mu1 = 0.2;
  double mu2 = 0.3;
  double gamma = 0.002;      // free
  double t_s = 0.0;          // [ms] S2 stimulus start (protocols only)

  void validate() const;
};

// Dimensionless potential from physical potential [mV]. The offset enters as
// phi = (Phi - delta_phi)/beta_phi so that the resting -80 mV maps to phi = 0
// and the 20 mV plateau maps to phi = 1. Applying the tabled delta_phi = -80
// with a literal plus sign would map rest to phi = -1.6, outside the model's
// [0, 1] range, so the shift is taken with the sign that restores it.
double to_dimensionless(double Phi, const APParameters& p);
Vector to_dimensionless(const Vector& Phi, const APParameters& p);
double to_physical(double phi, const APParameters& p);
Vector to_physical(const Vector& phi, const APParameters& p);

struct ReactionRates {
  Vector f_phi;  // [mV/ms] nodal rate of the physical potential
  Vector f_r;    // [-] nodal rate of the recovery variable in scaled time
};

// Nodal Aliev-Panfilov rates (ICI treatment: evaluated at nodes, the mass
// matrix is applied by the caller):
//   f_phi = (beta_phi/beta_t) * (c phi (phi - alpha)(1 - phi) - r phi)
//   f_r   = (gamma + mu1 r / (mu2 + phi)) * (-r - c phi (phi - b - 1))
ReactionRates eval_reaction(const Vector& phi, const Vector& r, const APParameters& p);

}  // namespace crom
