#include "stbem/post.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stbem {

double energy_functional(const stochastic_solution& phi, const toeplitz_blocks& V,
                         const mode_tensor& F) {
  const mode_tensor& ph = phi.coeff;
  if (!ph.same_shape(F)) throw std::invalid_argument("energy_functional: shape mismatch");
  double e = 0.0;
  Eigen::VectorXd vphi(ph.n_elems);
  for (std::size_t i = 0; i < ph.n_modes; ++i)
    for (std::size_t l = 0; l < ph.n_steps; ++l) {
      vphi.setZero();
      for (std::size_t m = 0; m <= l; ++m)
        V.apply_block(static_cast<int>(l - m), ph.slab(i, m), vphi);
      e += ph.slab(i, l).dot(0.5 * vphi - F.slab(i, l));
    }
  return e;
}

double galerkin_energy(const stochastic_solution& phi, const mode_tensor& F) {
  const mode_tensor& ph = phi.coeff;
  if (!ph.same_shape(F)) throw std::invalid_argument("galerkin_energy: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < ph.n_modes; ++i)
    for (std::size_t l = 0; l < ph.n_steps; ++l) acc += F.slab(i, l).dot(ph.slab(i, l));
  return -0.5 * acc;
}

double l2_space_time_norm(const mode_tensor& field, const surface_mesh& mesh,
                          const time_grid& grid) {
  if (field.n_elems != mesh.n_elements() ||
      field.n_steps != static_cast<std::size_t>(grid.n_steps))
    throw std::invalid_argument("l2_space_time_norm: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < field.n_modes; ++i)
    for (std::size_t m = 0; m < field.n_steps; ++m) {
      const auto v = field.slab(i, m);
      for (std::size_t s = 0; s < field.n_elems; ++s) acc += v[s] * v[s] * mesh.areas[s];
    }
  return std::sqrt(acc * grid.dt);
}

double fit_rate(const std::vector<convergence_record>& records) {
  if (records.size() < 2) throw std::invalid_argument("fit_rate: need at least two records");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& r : records) {
    if (!(r.abscissa > 0.0)) throw std::invalid_argument("fit_rate: nonpositive abscissa");
    if (!(r.error > 0.0)) throw std::invalid_argument("fit_rate: nonpositive error");
    const double x = std::log(r.abscissa), y = std::log(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(records.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-14 * (n * sxx + sx * sx + 1e-300))
    throw std::invalid_argument("fit_rate: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

richardson_result richardson_extrapolate(const std::vector<std::pair<double, double>>& data) {
  if (data.size() < 3)
    throw std::invalid_argument("richardson_extrapolate: need at least three samples");
  const auto& [x1, e1] = data[data.size() - 3];
  const auto& [x2, e2] = data[data.size() - 2];
  const auto& [x3, e3] = data[data.size() - 1];
  if (!(x1 < x2 && x2 < x3))
    throw std::invalid_argument("richardson_extrapolate: abscissae must increase");
  const double d12 = e1 - e2, d23 = e2 - e3;
  if (d12 == 0.0 || d23 == 0.0 || d12 * d23 < 0.0)
    throw std::invalid_argument("richardson_extrapolate: non-monotone samples");

  // Solve (x1^-q - x2^-q)/(x2^-q - x3^-q) = d12/d23 for q by bisection.
  auto ratio = [&](double q) {
    const double p1 = std::pow(x1, -q), p2 = std::pow(x2, -q), p3 = std::pow(x3, -q);
    return (p1 - p2) / (p2 - p3);
  };
  const double target = d12 / d23;
  double qlo = 1e-3, qhi = 8.0;
  if ((ratio(qlo) - target) * (ratio(qhi) - target) > 0.0)
    throw std::invalid_argument("richardson_extrapolate: rate outside bracket");
  for (int it = 0; it < 200; ++it) {
    const double qm = 0.5 * (qlo + qhi);
    if ((ratio(qlo) - target) * (ratio(qm) - target) <= 0.0)
      qhi = qm;
    else
      qlo = qm;
  }
  richardson_result r;
  r.rate = 0.5 * (qlo + qhi);
  const double p2 = std::pow(x2, -r.rate), p3 = std::pow(x3, -r.rate);
  r.constant = d23 / (p2 - p3);
  r.limit = e3 - r.constant * p3;
  return r;
}

double a_weighting_db(double f) {
  if (!(f > 0.0)) return -1e9;
  const double f2 = f * f;
  const double ra = (148693636.0 * f2 * f2) /
                    ((f2 + 424.36) * std::sqrt((f2 + 11599.29) * (f2 + 544496.41)) *
                     (f2 + 148693636.0));
  return 20.0 * std::log10(ra) + 2.0;
}

spectrum fft_spl_a_weighted(std::span<const double> pressure, double dt, double db_floor) {
  const std::size_t n = pressure.size();
  if (n < 2) throw std::invalid_argument("fft_spl_a_weighted: series too short");
  if (!(dt > 0.0)) throw std::invalid_argument("fft_spl_a_weighted: dt must be > 0");

  spectrum sp;
  const std::size_t n_bins = n / 2 + 1;
  sp.frequency.resize(n_bins);
  sp.spl_db.resize(n_bins);
  sp.spl_dba.resize(n_bins);
  const double p_ref = 2e-5;

  for (std::size_t k = 0; k < n_bins; ++k) {
    std::complex<double> x(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * M_PI * static_cast<double>(j * k % n) / static_cast<double>(n);
      x += pressure[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    const bool interior = (k != 0) && !(n % 2 == 0 && k == n / 2);
    const double amp = (interior ? 2.0 : 1.0) * std::abs(x) / static_cast<double>(n);
    const double rms = (k == 0) ? std::abs(amp) : amp / std::sqrt(2.0);
    const double f = static_cast<double>(k) / (static_cast<double>(n) * dt);
    sp.frequency[k] = f;
    const double spl = rms > 0.0 ? 20.0 * std::log10(rms / p_ref) : db_floor;
    sp.spl_db[k] = std::max(spl, db_floor);
    sp.spl_dba[k] = std::max(sp.spl_db[k] + (k == 0 ? 0.0 : a_weighting_db(f)), db_floor);
  }
  return sp;
}

void export_vtk(const std::string& path, const surface_mesh& mesh,
                const std::vector<std::pair<std::string, Eigen::VectorXd>>& cell_fields) {
  for (const auto& [name, field] : cell_fields)
    if (field.size() != static_cast<Eigen::Index>(mesh.n_elements()))
      throw std::invalid_argument("export_vtk: field '" + name + "' length mismatch");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_vtk: cannot write " + path);
  os.precision(12);
  os << "# vtk DataFile Version 3.0\nstbem surface fields\nASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.vertices.size() << " double\n";
  for (const auto& v : mesh.vertices) os << v.x() << " " << v.y() << " " << v.z() << "\n";
  os << "CELLS " << mesh.n_elements() << " " << 4 * mesh.n_elements() << "\n";
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "CELL_TYPES " << mesh.n_elements() << "\n";
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) os << "5\n";
  if (!cell_fields.empty()) {
    os << "CELL_DATA " << mesh.n_elements() << "\n";
    for (const auto& [name, field] : cell_fields) {
      os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (Eigen::Index i = 0; i < field.size(); ++i) os << field[i] << "\n";
    }
  }
  if (!os) throw std::runtime_error("export_vtk: write failed for " + path);
}

void export_csv(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_csv: cannot write " + path);
  os.precision(17);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  if (!os) throw std::runtime_error("export_csv: write failed for " + path);
}

std::vector<std::vector<double>> import_csv(const std::string& path,
                                            std::vector<std::string>* header) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("import_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("import_csv: empty file " + path);
  if (header) {
    header->clear();
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header->push_back(tok);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace stbem
