#pragma once

// Discretization of the second variation of H + cS at phi_c,
//
//   L = -phi_c - 2 kappa (4 - d^2)^{-1} + c (1 - d^2)(4 - d^2)^{-1},
//
// as a dense symmetric matrix on the collocation nodes, and the spectral
// quantities derived from it.

#include <span>
#include <vector>

#include "dplab/soliton_profile.hpp"
#include "dplab/spectral_grid.hpp"

namespace dplab {

/// Dense symmetric n x n matrix of L in the nodal basis (row-major).
struct OperatorMatrix {
  GridPtr grid;
  SolitonParams params;
  int n = 0;
  std::vector<double> data;

  double operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
  }
  Field apply(const Field& y) const;
  /// (L y, y) in the grid L2 pairing.
  double quadratic_form(const Field& y) const;
  double max_entry() const;
  /// max |M - M^T| / max |M|.
  double symmetry_residual() const;
};

/// Assembles L with potential -phi given by samples on the grid.
OperatorMatrix assemble_L(const Field& phi, const SolitonParams& params);

/// Samples the profile on the grid (tail-wrap checked) and assembles L.
OperatorMatrix assemble_L(const SolitonProfile& profile, const GridPtr& grid);

struct EigenDecomposition {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // column j (row-major storage) is eigenvector j
  int n = 0;
  std::vector<double> vector(int j) const;
};

/// Full symmetric eigendecomposition (LAPACK dsyevd).
EigenDecomposition symmetric_eigensolve(const OperatorMatrix& m);

/// The k smallest eigenpairs (LAPACK dsyevr).
EigenDecomposition lowest_eigenpairs(std::span<const double> matrix, int n, int k);

struct SpectralReport {
  double neg_eigenvalue = 0.0;
  int neg_count = 0;
  double kernel_eigenvalue = 0.0;
  double kernel_overlap = 0.0;
  int kernel_index = -1;
  std::vector<double> neg_eigenvector;  // L2-normalized samples of chi
  double ess_gap_proxy = 0.0;
  double theta = 0.0;
  double operator_norm = 0.0;  // max |eigenvalue|
  std::vector<double> lowest_eigenvalues;
};

/// Full eigendecomposition, kernel identification by overlap with phi_x, and
/// the constrained coercivity constant.
SpectralReport eigen_report(const OperatorMatrix& m, const SolitonProfile& profile);

/// Minimum eigenvalue of L restricted to the Euclidean orthogonal complement
/// of the given constraint vectors. Throws std::runtime_error when the
/// constraints are numerically collinear.
double constrained_min_eigenvalue(const OperatorMatrix& m, std::span<const Field> constraints);

/// theta: minimum of (L y, y)/|y|^2 over y with (y, phi)_S = (y, phi_x)_S = 0.
double constrained_theta(const OperatorMatrix& m, const SolitonProfile& profile);

/// Constraint vectors (1 - d^2)(4 - d^2)^{-1} phi and the same of phi_x.
std::vector<Field> coercivity_constraints(const SolitonProfile& profile, const GridPtr& grid);

}  // namespace dplab
