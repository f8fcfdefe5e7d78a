#include "dplab/linearized_operator.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dplab/kernels.hpp"

namespace dplab {

Field OperatorMatrix::apply(const Field& y) const {
  if (y.size() != n) throw std::invalid_argument("OperatorMatrix::apply size mismatch");
  Field out(grid);
  for (int i = 0; i < n; ++i) {
    std::span<const double> row(data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(n),
                                static_cast<std::size_t>(n));
    out[i] = kernels::parallel::dot(row, y.samples());
  }
  return out;
}

double OperatorMatrix::quadratic_form(const Field& y) const { return l2_inner(apply(y), y); }

double OperatorMatrix::max_entry() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

double OperatorMatrix::symmetry_residual() const {
  double r = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) r = std::max(r, std::abs((*this)(i, j) - (*this)(j, i)));
  const double m = max_entry();
  return m > 0.0 ? r / m : r;
}

OperatorMatrix assemble_L(const Field& phi, const SolitonParams& params) {
  params.validate();
  const GridPtr& grid = phi.grid_ptr();
  const int n = grid->size();
  Field unit(grid);
  unit[0] = 1.0;
  const double c = params.c;
  const double kappa = params.kappa;
  const Field column = apply_symbol(unit, [c, kappa](double xi) {
    const double x2 = xi * xi;
    return Complex((c * (1.0 + x2) - 2.0 * kappa) / (4.0 + x2), 0.0);
  });

  OperatorMatrix m;
  m.grid = grid;
  m.params = params;
  m.n = n;
  m.data.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  kernels::parallel::circulant_fill(column.samples(), m.data);
  const auto N = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i < N; ++i) m.data[i * N + i] -= phi[static_cast<int>(i)];
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = i + 1; j < N; ++j) {
      const double avg = 0.5 * (m.data[i * N + j] + m.data[j * N + i]);
      m.data[i * N + j] = avg;
      m.data[j * N + i] = avg;
    }
  return m;
}

OperatorMatrix assemble_L(const SolitonProfile& profile, const GridPtr& grid) {
  return assemble_L(sample_on_grid(profile, grid, 0.0), profile.params());
}

std::vector<double> EigenDecomposition::vector(int j) const {
  const int cols = static_cast<int>(values.size());
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = vectors[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)];
  return v;
}

EigenDecomposition symmetric_eigensolve(const OperatorMatrix& m) {
  EigenDecomposition e;
  e.n = m.n;
  e.vectors = m.data;
  e.values.resize(static_cast<std::size_t>(m.n));
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_ROW_MAJOR, 'V', 'U', m.n, e.vectors.data(), m.n, e.values.data());
  if (info != 0) throw std::runtime_error("dsyevd failed with info " + std::to_string(info));
  return e;
}

EigenDecomposition lowest_eigenpairs(std::span<const double> matrix, int n, int k) {
  k = std::clamp(k, 1, n);
  std::vector<double> a(matrix.begin(), matrix.end());
  EigenDecomposition e;
  e.n = n;
  e.values.resize(static_cast<std::size_t>(n));
  e.vectors.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_ROW_MAJOR, 'V', 'I', 'U', n, a.data(), n, 0.0, 0.0, 1, k,
                                         0.0, &found, e.values.data(), e.vectors.data(), k, support.data());
  if (info != 0) throw std::runtime_error("dsyevr failed with info " + std::to_string(info));
  e.values.resize(static_cast<std::size_t>(found));
  return e;
}

std::vector<Field> coercivity_constraints(const SolitonProfile& profile, const GridPtr& grid) {
  const Field phi = sample_on_grid(profile, grid, 0.0);
  return {s_operator(phi), s_operator(derivative(phi, 1))};
}

double constrained_min_eigenvalue(const OperatorMatrix& m, std::span<const Field> constraints) {
  const int n = m.n;
  const auto N = static_cast<std::size_t>(n);
  if (constraints.empty()) return lowest_eigenpairs(m.data, n, 1).values.front();

  // Orthonormal basis of the constraint span (modified Gram-Schmidt).
  std::vector<std::vector<double>> q;
  for (const Field& f : constraints) {
    std::vector<double> v(f.values());
    const double norm0 = std::sqrt(kernels::serial::dot(v, v));
    if (!(norm0 > 0.0)) throw std::runtime_error("constraint vector is zero");
    for (const auto& b : q) kernels::serial::axpy(-kernels::serial::dot(b, v), b, v);
    const double norm = std::sqrt(kernels::serial::dot(v, v));
    if (norm < 1e-8 * norm0) {
      std::ostringstream os;
      os << "constraint vectors nearly collinear (residual ratio " << norm / norm0 << ")";
      throw std::runtime_error(os.str());
    }
    for (auto& x : v) x /= norm;
    q.push_back(std::move(v));
  }

  // Gershgorin bound on |M|_2 sets the shift that pushes span(q) above the
  // spectrum of the projected operator.
  double gersh = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < N; ++j) row += std::abs(m.data[i * N + j]);
    gersh = std::max(gersh, row);
  }
  const double shift = 4.0 * gersh + 1.0;

  // A = P M P + shift * Q Q^T with P = I - Q Q^T.
  const std::size_t k = q.size();
  std::vector<std::vector<double>> mq(k, std::vector<double>(N));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t i = 0; i < N; ++i)
      mq[a][i] = kernels::serial::dot(std::span<const double>(m.data.data() + i * N, N), q[a]);
  std::vector<double> qmq(k * k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) qmq[a * k + b] = kernels::serial::dot(q[a], mq[b]);

  std::vector<double> proj(m.data);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      double corr = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        corr -= q[a][i] * mq[a][j] + mq[a][i] * q[a][j];
        corr += shift * q[a][i] * q[a][j];
        for (std::size_t b = 0; b < k; ++b) corr += q[a][i] * qmq[a * k + b] * q[b][j];
      }
      proj[i * N + j] += corr;
    }
  }
  return lowest_eigenpairs(proj, n, 1).values.front();
}

double constrained_theta(const OperatorMatrix& m, const SolitonProfile& profile) {
  const auto constraints = coercivity_constraints(profile, m.grid);
  return constrained_min_eigenvalue(m, constraints);
}

SpectralReport eigen_report(const OperatorMatrix& m, const SolitonProfile& profile) {
  const auto eig = symmetric_eigensolve(m);
  const int n = m.n;
  const double h = m.grid->spacing();

  const Field phi = sample_on_grid(profile, m.grid, 0.0);
  const Field dphi = derivative(phi, 1);
  const double dnorm = std::sqrt(kernels::serial::dot(dphi.samples(), dphi.samples()));

  SpectralReport r;
  r.operator_norm = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));

  // Kernel candidate: best overlap with phi_x among the eigenvalues closest
  // to zero. Vectors returned by LAPACK have unit Euclidean norm.
  const int cols = n;
  auto overlap = [&](int j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += eig.vectors[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j)] * dphi[i];
    return std::abs(s) / dnorm;
  };
  double best = -1.0;
  for (int j = 0; j < n; ++j) {
    if (std::abs(eig.values[static_cast<std::size_t>(j)]) > 0.5 * r.operator_norm) continue;
    const double ov = overlap(j);
    if (ov > best) {
      best = ov;
      r.kernel_index = j;
    }
  }
  r.kernel_overlap = std::clamp(best, 0.0, 1.0);
  r.kernel_eigenvalue = eig.values[static_cast<std::size_t>(r.kernel_index)];

  r.neg_count = 0;
  r.ess_gap_proxy = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    if (j == r.kernel_index) continue;
    const double v = eig.values[static_cast<std::size_t>(j)];
    if (v < 0.0)
      ++r.neg_count;
    else
      r.ess_gap_proxy = std::min(r.ess_gap_proxy, v);
  }
  const int neg_index = r.kernel_index == 0 ? 1 : 0;
  r.neg_eigenvalue = eig.values[static_cast<std::size_t>(neg_index)];
  r.neg_eigenvector = eig.vector(neg_index);
  for (auto& v : r.neg_eigenvector) v /= std::sqrt(h);
  for (int j = 0; j < std::min(n, 16); ++j) r.lowest_eigenvalues.push_back(eig.values[static_cast<std::size_t>(j)]);

  r.theta = constrained_theta(m, profile);
  return r;
}

}  // namespace dplab
