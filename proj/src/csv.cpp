#include "crom/csv.hpp"

#include <fstream>

#include "crom/errors.hpp"

namespace crom {

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.precision(17);
  return out;
}

void write_parameter_cells(std::ofstream& out, const Parameter& p) {
  out << p[0] << "," << (p.size() > 1 ? p[1] : 0.0);
}

}  // namespace

void write_flux_csv(const std::string& path, const Vector& outputs, double dt) {
  std::ofstream out = open_csv(path);
  out << "t,y\n";
  for (Index k = 0; k < outputs.size(); ++k) {
    out << static_cast<double>(k) * dt << "," << outputs[k] << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_history_csv(const std::string& path, const GreedyHistory& history) {
  std::ofstream out = open_csv(path);
  out << "iter,gamma,ts,epsilon,delta_rb,delta_ei,scaling,n_phi,n_r,n_ei_phi,n_ei_r,"
         "train_size,seconds\n";
  for (const auto& it : history.iterations) {
    out << it.iteration << ",";
    write_parameter_cells(out, it.p_star);
    out << "," << it.epsilon << "," << it.delta_rb << "," << it.delta_ei << ","
        << it.scaling << "," << it.n_phi << "," << it.n_r << "," << it.n_ei_phi << ","
        << it.n_ei_r << "," << it.train_size << "," << it.seconds << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_estimate_csv(const std::string& path, const std::vector<Parameter>& samples,
                        const std::vector<double>& delta,
                        const std::vector<double>& delta_rb,
                        const std::vector<double>& delta_ei) {
  std::ofstream out = open_csv(path);
  out << "gamma,ts,delta,delta_rb,delta_ei\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    write_parameter_cells(out, samples[i]);
    out << "," << delta[i] << "," << delta_rb[i] << "," << delta_ei[i] << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

void write_validation_csv(const std::string& path, const std::vector<ValidationRow>& rows) {
  std::ofstream out = open_csv(path);
  out << "gamma,ts,eps_rel,delta_scaled,fom_seconds,rom_seconds,speedup\n";
  for (const auto& row : rows) {
    write_parameter_cells(out, row.p);
    out << "," << row.eps_rel << "," << row.delta_scaled << "," << row.fom_seconds << ","
        << row.rom_seconds << "," << row.speedup << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace crom
