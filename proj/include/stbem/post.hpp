#ifndef STBEM_POST_HPP
#define STBEM_POST_HPP

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stbem/kernels.hpp"
#include "stbem/mesh.hpp"
#include "stbem/solution.hpp"

namespace stbem {

/// Space-time energy functional E = sum_kappa (1/2 phi_k . V phi_k - F_k . phi_k)
/// with V the assembled lower-triangular space-time operator. At the Galerkin
/// solution this equals -1/2 sum_kappa F_k . phi_k.
double energy_functional(const stochastic_solution& phi, const toeplitz_blocks& V,
                         const mode_tensor& F);

/// -1/2 sum_kappa F_k . phi_k (Galerkin shortcut, used to test the identity).
double galerkin_energy(const stochastic_solution& phi, const mode_tensor& F);

/// L2 norm over (0,T) x Gamma x Xi of a piecewise-constant expansion;
/// orthonormal modes make the stochastic factor a plain mode-sum of squares.
double l2_space_time_norm(const mode_tensor& field, const surface_mesh& mesh,
                          const time_grid& grid);

struct convergence_record {
  std::string label;
  double abscissa = 0.0;  // SG degree + 1 or space-time DOF
  double error = 0.0;
  int level = 0;
  double cfl = 0.0;
};

/// Least-squares slope of log(error) against log(abscissa).
double fit_rate(const std::vector<convergence_record>& records);

struct richardson_result {
  double limit = 0.0;     // extrapolated value
  double rate = 0.0;      // decay exponent with respect to the abscissa
  double constant = 0.0;
};

/// Fits E(x) = E_inf + C x^{-q} through the last three (abscissa, value)
/// samples; abscissae need not be equally spaced on a log axis.
richardson_result richardson_extrapolate(const std::vector<std::pair<double, double>>& data);

struct spectrum {
  std::vector<double> frequency;  // Hz
  std::vector<double> spl_db;     // re 20 uPa
  std::vector<double> spl_dba;    // A-weighted
};

/// One-sided magnitude spectrum of a uniformly sampled pressure series,
/// expressed as SPL re 20 uPa with the IEC 61672 A-weighting added.
spectrum fft_spl_a_weighted(std::span<const double> pressure, double dt,
                            double db_floor = -300.0);

/// IEC 61672 A-weighting in dB at a frequency in Hz (0 dB at 1 kHz).
double a_weighting_db(double freq_hz);

/// VTK legacy ASCII export with named per-element scalar fields.
void export_vtk(const std::string& path, const surface_mesh& mesh,
                const std::vector<std::pair<std::string, Eigen::VectorXd>>& cell_fields);

void export_csv(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<double>>& rows);

std::vector<std::vector<double>> import_csv(const std::string& path,
                                            std::vector<std::string>* header = nullptr);

}  // namespace stbem

#endif
