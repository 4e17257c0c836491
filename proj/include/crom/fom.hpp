#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCholesky>

#include "crom/aliev_panfilov.hpp"
#include "crom/assembly.hpp"
#include "crom/types.hpp"

namespace crom {

enum class ProtocolKind { None, PlanarInitialCondition, S1S2Scroll };

struct StimulusProtocol {
  ProtocolKind kind = ProtocolKind::None;
  double amplitude = 10.0;    // I [-]
  double s1_window = 10.0;    // [ms]; S1 active while t in [0, s1_window)
  double s2_duration = 20.0;  // [ms]; S2 active while t in [t_s, t_s + s2_duration)
  std::string s1_node_set = "left_edge";
  std::string s2_node_set = "s2_region";
};

// Coupled 2N-dimensional time-discrete system
//   EE x^k = AA x^{k-1} + dt (M_f f(x^{k-1}) + B i_s^k),  EE = E - dt A, AA = E,
// with E = diag(M, beta_t M), A = diag(S, 0), M_f = diag(M, M) and scalar
// output y = C x. The state layout is [potential mV; recovery].
//
// The stimulus value for the step ending at t^k is the window indicator at
// t^{k-1} over half-open windows: with dt = 2 ms a 10 ms S1 span is exactly
// 5 active steps and a 20 ms S2 span exactly 10.
struct FullOrderSystem {
  SparseMatrix EE, AA;    // 2N x 2N
  SparseMatrix mass;      // N x N block, applies M_f per block
  SparseMatrix stiffness; // N x N block S (EE top-left = M - dt S)
  Vector B;             // [b; 0] full-domain input shape
  Vector B_s1, B_s2;    // node-set-masked stimulus channels (zero when unused)
  Vector C;             // output row as a vector: [c_phi; 0]
  Vector x0;
  double dt = 0.0;
  Index n_steps = 0;
  Index N = 0;
  StimulusProtocol protocol;
  APParameters base_params;
  std::uint64_t operator_hash = 0;
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> factorization;

  Index full_dim() const { return 2 * N; }
  bool has_stimulus() const { return protocol.kind == ProtocolKind::S1S2Scroll; }

  // (S1, S2) amplitudes applied during the step ending at index k.
  std::pair<double, double> stimulus(Index k, const APParameters& p) const;

  // Nodal nonlinearity f(x) = [f_phi; f_r], 2N.
  Vector nonlinearity(const Vector& x, const APParameters& p) const;

  double output(const Vector& x) const { return C.dot(x); }
};

struct Trajectory {
  DenseMatrix states;     // 2N x (n_steps + 1) when recorded
  DenseMatrix nonlinear;  // 2N x n_steps when recorded; column k-1 = f(x^{k-1})
  Vector outputs;         // n_steps + 1
  APParameters params;
  bool has_states = false;
  bool has_nonlinear = false;
};

// Assembles the coupled blocks, sets the protocol initial state and
// factorizes EE once. gamma and t_s do not enter EE, so the factorization is
// reused across every parameter of a greedy run.
FullOrderSystem build_fom(const AssembledOperators& ops,
                          const std::map<std::string, std::vector<Index>>& node_sets,
                          const APParameters& params, double dt, Index n_steps,
                          const StimulusProtocol& protocol);

Vector imex_step(const FullOrderSystem& sys, const Vector& x_prev, Index k,
                 const APParameters& p);

struct FomSolveOptions {
  bool record_states = true;
  bool record_nonlinear = false;
};

Trajectory solve_fom(const FullOrderSystem& sys, const APParameters& p,
                     const FomSolveOptions& opts = {});

}  // namespace crom
