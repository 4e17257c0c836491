#include "crom/aliev_panfilov.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "crom/errors.hpp"

namespace crom {

void APParameters::validate() const {
  if (!(beta_t > 0.0)) throw std::invalid_argument("beta_t must be positive");
  if (!(beta_phi > 0.0)) throw std::invalid_argument("beta_phi must be positive");
  if (!(mu2 > 0.0)) throw std::invalid_argument("mu2 must be positive");
}

double to_dimensionless(double Phi, const APParameters& p) {
  return (Phi - p.delta_phi) / p.beta_phi;
}

Vector to_dimensionless(const Vector& Phi, const APParameters& p) {
  return (Phi.array() - p.delta_phi) / p.beta_phi;
}

double to_physical(double phi, const APParameters& p) {
  return phi * p.beta_phi + p.delta_phi;
}

Vector to_physical(const Vector& phi, const APParameters& p) {
  return phi.array() * p.beta_phi + p.delta_phi;
}

ReactionRates eval_reaction(const Vector& phi, const Vector& r, const APParameters& p) {
  if (phi.size() != r.size()) {
    throw DimensionError("phi has length " + std::to_string(phi.size()) +
                         " but r has length " + std::to_string(r.size()));
  }
  const Index n = phi.size();
  ReactionRates rates;
  rates.f_phi.resize(n);
  rates.f_r.resize(n);
  const double volt_rate = p.beta_phi / p.beta_t;
  for (Index i = 0; i < n; ++i) {
    const double ph = phi[i];
    const double rv = r[i];
    const double den = p.mu2 + ph;
    if (den == 0.0) {
      throw SingularityError("mu2 + phi vanishes at node " + std::to_string(i));
    }
    rates.f_phi[i] = volt_rate * (p.c * ph * (ph - p.alpha) * (1.0 - ph) - rv * ph);
    rates.f_r[i] = (p.gamma + p.mu1 * rv / den) * (-rv - p.c * ph * (ph - p.b - 1.0));
  }
  return rates;
}

}  // namespace crom
