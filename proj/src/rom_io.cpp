#include "crom/rom_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "crom/errors.hpp"

namespace crom {

namespace {

constexpr char kMagic[8] = {'C', 'R', 'O', 'M', 'R', 'O', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::ofstream& out, const void* data, std::size_t len) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
}

void put_u32(std::ofstream& out, std::uint32_t v) { put_bytes(out, &v, sizeof(v)); }
void put_u64(std::ofstream& out, std::uint64_t v) { put_bytes(out, &v, sizeof(v)); }
void put_i64(std::ofstream& out, std::int64_t v) { put_bytes(out, &v, sizeof(v)); }
void put_f64(std::ofstream& out, double v) { put_bytes(out, &v, sizeof(v)); }

void put_string(std::ofstream& out, const std::string& s) {
  put_u64(out, s.size());
  put_bytes(out, s.data(), s.size());
}

void put_matrix(std::ofstream& out, const DenseMatrix& m) {
  put_i64(out, m.rows());
  put_i64(out, m.cols());
  put_bytes(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

void put_vector(std::ofstream& out, const Vector& v) {
  put_i64(out, v.size());
  put_bytes(out, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

void put_indices(std::ofstream& out, const std::vector<Index>& idx) {
  put_u64(out, idx.size());
  for (const Index i : idx) put_i64(out, i);
}

void get_bytes(std::ifstream& in, void* data, std::size_t len, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
  if (!in) throw ValidationError(std::string("ROM archive truncated while reading ") + what);
}

std::uint32_t get_u32(std::ifstream& in, const char* what) {
  std::uint32_t v = 0;
  get_bytes(in, &v, sizeof(v), what);
  return v;
}

std::uint64_t get_u64(std::ifstream& in, const char* what) {
  std::uint64_t v = 0;
  get_bytes(in, &v, sizeof(v), what);
  return v;
}

std::int64_t get_i64(std::ifstream& in, const char* what) {
  std::int64_t v = 0;
  get_bytes(in, &v, sizeof(v), what);
  return v;
}

double get_f64(std::ifstream& in, const char* what) {
  double v = 0;
  get_bytes(in, &v, sizeof(v), what);
  return v;
}

std::string get_string(std::ifstream& in, const char* what) {
  const std::uint64_t len = get_u64(in, what);
  if (len > (1ull << 20)) throw ValidationError("ROM archive string field too large");
  std::string s(len, '\0');
  if (len > 0) get_bytes(in, s.data(), len, what);
  return s;
}

DenseMatrix get_matrix(std::ifstream& in, const char* what) {
  const std::int64_t rows = get_i64(in, what);
  const std::int64_t cols = get_i64(in, what);
  if (rows < 0 || cols < 0) throw ValidationError("ROM archive matrix has negative shape");
  DenseMatrix m(rows, cols);
  if (m.size() > 0) {
    get_bytes(in, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), what);
  }
  return m;
}

Vector get_vector(std::ifstream& in, const char* what) {
  const std::int64_t size = get_i64(in, what);
  if (size < 0) throw ValidationError("ROM archive vector has negative length");
  Vector v(size);
  if (size > 0) get_bytes(in, v.data(), sizeof(double) * static_cast<std::size_t>(size), what);
  return v;
}

std::vector<Index> get_indices(std::ifstream& in, const char* what) {
  const std::uint64_t count = get_u64(in, what);
  std::vector<Index> idx(count);
  for (std::uint64_t i = 0; i < count; ++i) idx[i] = get_i64(in, what);
  return idx;
}

void put_params(std::ofstream& out, const APParameters& p) {
  put_f64(out, p.beta_t);
  put_f64(out, p.beta_phi);
  put_f64(out, p.delta_phi);
  put_f64(out, p.c);
  put_f64(out, p.alpha);
  put_f64(out, p.b);
  put_f64(out, p.mu1);
  put_f64(out, p.mu2);
  put_f64(out, p.gamma);
  put_f64(out, p.t_s);
}

APParameters get_params(std::ifstream& in) {
  APParameters p;
  p.beta_t = get_f64(in, "params");
  p.beta_phi = get_f64(in, "params");
  p.delta_phi = get_f64(in, "params");
  p.c = get_f64(in, "params");
  p.alpha = get_f64(in, "params");
  p.b = get_f64(in, "params");
  p.mu1 = get_f64(in, "params");
  p.mu2 = get_f64(in, "params");
  p.gamma = get_f64(in, "params");
  p.t_s = get_f64(in, "params");
  return p;
}

}  // namespace

void save_rom(const std::string& path, const ReducedModel& rom) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");

  put_bytes(out, kMagic, sizeof(kMagic));
  put_u32(out, kVersion);

  put_i64(out, rom.N);
  put_f64(out, rom.dt);
  put_i64(out, rom.n_steps);
  put_u64(out, rom.operator_hash);

  put_u32(out, static_cast<std::uint32_t>(rom.protocol.kind));
  put_f64(out, rom.protocol.amplitude);
  put_f64(out, rom.protocol.s1_window);
  put_f64(out, rom.protocol.s2_duration);
  put_string(out, rom.protocol.s1_node_set);
  put_string(out, rom.protocol.s2_node_set);
  put_params(out, rom.base_params);

  put_matrix(out, rom.EE_r);
  put_matrix(out, rom.AA_r);
  put_vector(out, rom.B_s1_r);
  put_vector(out, rom.B_s2_r);
  put_vector(out, rom.C_r);
  put_vector(out, rom.x0_r);

  put_matrix(out, rom.basis.V_phi);
  put_matrix(out, rom.basis.V_r);

  put_matrix(out, rom.hyper.U_phi);
  put_matrix(out, rom.hyper.U_r);
  put_indices(out, rom.hyper.idx_phi);
  put_indices(out, rom.hyper.idx_r);
  put_i64(out, rom.hyper.n_ei_phi);
  put_i64(out, rom.hyper.n_ei_r);

  put_matrix(out, rom.deim_op);
  put_matrix(out, rom.Vphi_rows_phi);
  put_matrix(out, rom.Vr_rows_phi);
  put_matrix(out, rom.Vphi_rows_r);
  put_matrix(out, rom.Vr_rows_r);

  put_matrix(out, rom.residual.R);
  put_i64(out, rom.residual.n);
  put_i64(out, rom.residual.n_inputs);
  put_i64(out, rom.residual.n_ei);
  put_i64(out, rom.residual.n_ext);

  put_f64(out, rom.rho_bar);
  put_f64(out, rom.beta);
  put_f64(out, rom.dual_residual_norm);
  put_f64(out, rom.dual_lifted_norm);
  put_i64(out, rom.n_du);
  put_f64(out, rom.estimator_scaling);
  put_f64(out, rom.greedy_tol);

  if (!out) throw IoError("failed writing ROM archive '" + path + "'");
}

ReducedModel load_rom(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open ROM archive '" + path + "'");

  char magic[8] = {};
  get_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ValidationError("'" + path + "' is not a ROM archive");
  }
  const std::uint32_t version = get_u32(in, "version");
  if (version != kVersion) {
    throw ValidationError("ROM archive version " + std::to_string(version) +
                          " unsupported (expected " + std::to_string(kVersion) + ")");
  }

  ReducedModel rom;
  rom.N = get_i64(in, "N");
  rom.dt = get_f64(in, "dt");
  rom.n_steps = get_i64(in, "n_steps");
  rom.operator_hash = get_u64(in, "operator_hash");

  rom.protocol.kind = static_cast<ProtocolKind>(get_u32(in, "protocol"));
  rom.protocol.amplitude = get_f64(in, "protocol");
  rom.protocol.s1_window = get_f64(in, "protocol");
  rom.protocol.s2_duration = get_f64(in, "protocol");
  rom.protocol.s1_node_set = get_string(in, "protocol");
  rom.protocol.s2_node_set = get_string(in, "protocol");
  rom.base_params = get_params(in);

  rom.EE_r = get_matrix(in, "EE_r");
  rom.AA_r = get_matrix(in, "AA_r");
  rom.B_s1_r = get_vector(in, "B_s1_r");
  rom.B_s2_r = get_vector(in, "B_s2_r");
  rom.C_r = get_vector(in, "C_r");
  rom.x0_r = get_vector(in, "x0_r");

  rom.basis.V_phi = get_matrix(in, "V_phi");
  rom.basis.V_r = get_matrix(in, "V_r");

  rom.hyper.U_phi = get_matrix(in, "U_phi");
  rom.hyper.U_r = get_matrix(in, "U_r");
  rom.hyper.idx_phi = get_indices(in, "idx_phi");
  rom.hyper.idx_r = get_indices(in, "idx_r");
  rom.hyper.n_ei_phi = get_i64(in, "n_ei_phi");
  rom.hyper.n_ei_r = get_i64(in, "n_ei_r");

  rom.deim_op = get_matrix(in, "deim_op");
  rom.Vphi_rows_phi = get_matrix(in, "Vphi_rows_phi");
  rom.Vr_rows_phi = get_matrix(in, "Vr_rows_phi");
  rom.Vphi_rows_r = get_matrix(in, "Vphi_rows_r");
  rom.Vr_rows_r = get_matrix(in, "Vr_rows_r");

  rom.residual.R = get_matrix(in, "residual");
  rom.residual.n = get_i64(in, "residual");
  rom.residual.n_inputs = get_i64(in, "residual");
  rom.residual.n_ei = get_i64(in, "residual");
  rom.residual.n_ext = get_i64(in, "residual");

  rom.rho_bar = get_f64(in, "estimator");
  rom.beta = get_f64(in, "estimator");
  rom.dual_residual_norm = get_f64(in, "estimator");
  rom.dual_lifted_norm = get_f64(in, "estimator");
  rom.n_du = get_i64(in, "estimator");
  rom.estimator_scaling = get_f64(in, "estimator");
  rom.greedy_tol = get_f64(in, "estimator");

  rom.factorize();
  return rom;
}

}  // namespace crom
