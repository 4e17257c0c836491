#include "crom/fom.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include "crom/errors.hpp"

namespace crom {

namespace {

SparseMatrix block_diag(const SparseMatrix& top, const SparseMatrix& bottom,
                        double top_scale, double bottom_scale) {
  const Index n = top.rows();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(top.nonZeros() + bottom.nonZeros()));
  for (Index col = 0; col < top.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(top, col); it; ++it) {
      triplets.emplace_back(it.row(), it.col(), top_scale * it.value());
    }
  }
  for (Index col = 0; col < bottom.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(bottom, col); it; ++it) {
      triplets.emplace_back(n + it.row(), n + it.col(), bottom_scale * it.value());
    }
  }
  SparseMatrix out(2 * n, 2 * n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Vector masked_input(const Vector& input, const std::vector<Index>& nodes, Index full) {
  Vector out = Vector::Zero(full);
  for (const Index node : nodes) out[node] = input[node];
  return out;
}

}  // namespace

std::pair<double, double> FullOrderSystem::stimulus(Index k, const APParameters& p) const {
  if (protocol.kind != ProtocolKind::S1S2Scroll || k < 1) return {0.0, 0.0};
  const double t_prev = static_cast<double>(k - 1) * dt;
  const double s1 =
      (t_prev >= 0.0 && t_prev < protocol.s1_window) ? protocol.amplitude : 0.0;
  const double s2 = (t_prev >= p.t_s && t_prev < p.t_s + protocol.s2_duration)
                        ? protocol.amplitude
                        : 0.0;
  return {s1, s2};
}

Vector FullOrderSystem::nonlinearity(const Vector& x, const APParameters& p) const {
  const Vector phi = to_dimensionless(x.head(N), p);
  const ReactionRates rates = eval_reaction(phi, x.tail(N), p);
  Vector f(2 * N);
  f.head(N) = rates.f_phi;
  f.tail(N) = rates.f_r;
  return f;
}

FullOrderSystem build_fom(const AssembledOperators& ops,
                          const std::map<std::string, std::vector<Index>>& node_sets,
                          const APParameters& params, double dt, Index n_steps,
                          const StimulusProtocol& protocol) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (n_steps < 0) throw std::invalid_argument("n_steps must be non-negative");
  if (!(protocol.s1_window >= 0.0) || !(protocol.s2_duration >= 0.0)) {
    throw std::invalid_argument("stimulus windows must be non-negative");
  }
  params.validate();
  ops.validate();

  const auto require_set = [&](const std::string& name) -> const std::vector<Index>& {
    const auto it = node_sets.find(name);
    if (it == node_sets.end()) {
      throw std::invalid_argument("protocol references unknown node set '" + name + "'");
    }
    for (const Index node : it->second) {
      if (node < 0 || node >= ops.dimension) {
        throw ValidationError("node set '" + name + "' index " + std::to_string(node) +
                              " outside the operator dimension");
      }
    }
    return it->second;
  };

  FullOrderSystem sys;
  sys.N = ops.dimension;
  sys.dt = dt;
  sys.n_steps = n_steps;
  sys.protocol = protocol;
  sys.base_params = params;
  sys.mass = ops.mass;
  sys.stiffness = ops.stiffness;
  sys.operator_hash = ops.content_hash();

  // E = diag(M, beta_t M); A = diag(S, 0); EE = E - dt A; AA = E.
  sys.AA = block_diag(ops.mass, ops.mass, 1.0, params.beta_t);
  const SparseMatrix dtA = block_diag(ops.stiffness, SparseMatrix(sys.N, sys.N), dt, 0.0);
  sys.EE = sys.AA - dtA;

  sys.B = Vector::Zero(2 * sys.N);
  sys.B.head(sys.N) = ops.input;
  sys.C = Vector::Zero(2 * sys.N);
  sys.C.head(sys.N) = ops.output;
  sys.B_s1 = Vector::Zero(2 * sys.N);
  sys.B_s2 = Vector::Zero(2 * sys.N);

  sys.x0 = Vector::Zero(2 * sys.N);
  sys.x0.head(sys.N).setConstant(-80.0);
  switch (protocol.kind) {
    case ProtocolKind::None:
      break;
    case ProtocolKind::PlanarInitialCondition: {
      const auto& ic_nodes = require_set(protocol.s1_node_set);
      for (const Index node : ic_nodes) sys.x0[node] = -10.0;
      break;
    }
    case ProtocolKind::S1S2Scroll: {
      const auto& s1_nodes = require_set(protocol.s1_node_set);
      const auto& s2_nodes = require_set(protocol.s2_node_set);
      sys.B_s1.head(sys.N) = masked_input(ops.input, s1_nodes, sys.N);
      sys.B_s2.head(sys.N) = masked_input(ops.input, s2_nodes, sys.N);
      break;
    }
  }

  auto solver = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
  solver->compute(sys.EE);
  if (solver->info() != Eigen::Success) {
    throw FactorizationError("factorization of EE = E - dt A failed");
  }
  sys.factorization = std::move(solver);
  return sys;
}

namespace {

Vector imex_step_with_f(const FullOrderSystem& sys, const Vector& x_prev, Index k,
                        const APParameters& p, const Vector& f) {
  const Index n = sys.N;
  Vector rhs = sys.AA * x_prev;
  rhs.head(n) += sys.dt * (sys.mass * f.head(n));
  rhs.tail(n) += sys.dt * (sys.mass * f.tail(n));
  const auto [i1, i2] = sys.stimulus(k, p);
  if (i1 != 0.0) rhs += (sys.dt * i1) * sys.B_s1;
  if (i2 != 0.0) rhs += (sys.dt * i2) * sys.B_s2;
  Vector x = sys.factorization->solve(rhs);
  if (!x.allFinite()) {
    throw DivergenceError("non-finite state at step " + std::to_string(k));
  }
  return x;
}

}  // namespace

Vector imex_step(const FullOrderSystem& sys, const Vector& x_prev, Index k,
                 const APParameters& p) {
  if (!x_prev.allFinite()) {
    throw std::invalid_argument("previous state contains non-finite values");
  }
  return imex_step_with_f(sys, x_prev, k, p, sys.nonlinearity(x_prev, p));
}

Trajectory solve_fom(const FullOrderSystem& sys, const APParameters& p,
                     const FomSolveOptions& opts) {
  Trajectory traj;
  traj.params = p;
  traj.outputs.resize(sys.n_steps + 1);
  traj.has_states = opts.record_states;
  traj.has_nonlinear = opts.record_nonlinear;
  if (opts.record_states) traj.states.resize(2 * sys.N, sys.n_steps + 1);
  if (opts.record_nonlinear && sys.n_steps > 0) {
    traj.nonlinear.resize(2 * sys.N, sys.n_steps);
  }

  Vector x = sys.x0;
  traj.outputs[0] = sys.output(x);
  if (opts.record_states) traj.states.col(0) = x;

  for (Index k = 1; k <= sys.n_steps; ++k) {
    const Vector f = sys.nonlinearity(x, p);
    if (opts.record_nonlinear) traj.nonlinear.col(k - 1) = f;
    x = imex_step_with_f(sys, x, k, p, f);
    traj.outputs[k] = sys.output(x);
    if (opts.record_states) traj.states.col(k) = x;
  }
  return traj;
}

}  // namespace crom
