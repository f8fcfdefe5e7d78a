#pragma once

// Periodic Fourier collocation: grids, real grid functions and the
// nonlocal operators (a - d^2)^{-1}, (4 - d^2)^{-1/2} applied through
// their exact Fourier symbols.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace dplab {

using Complex = std::complex<double>;

class FftPlans;

/// Uniform periodic grid on [-P/2, P/2) with n nodes.
///
/// The grid owns the FFTW plans used by every Field living on it. Plans are
/// created once; transforms use the new-array execute interface, so a grid
/// may be shared freely between threads.
class PeriodicGrid {
 public:
  PeriodicGrid(int n, double period);
  ~PeriodicGrid();
  PeriodicGrid(const PeriodicGrid&) = delete;
  PeriodicGrid& operator=(const PeriodicGrid&) = delete;

  int size() const { return n_; }
  double period() const { return period_; }
  double spacing() const { return h_; }
  double node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }
  std::span<const double> nodes() const { return nodes_; }

  /// Signed wavenumbers 2*pi*k/P for the full DFT ordering (length n).
  std::span<const double> wavenumbers() const { return wavenumbers_; }

  /// Nonnegative wavenumbers of the half spectrum (length n/2 + 1).
  std::span<const double> half_wavenumbers() const { return half_; }
  int spectrum_size() const { return n_ / 2 + 1; }

  /// Unnormalized forward real-to-complex DFT.
  void forward(std::span<const double> in, std::span<Complex> out) const;
  /// Inverse DFT including the 1/n normalization.
  void inverse(std::span<const Complex> in, std::span<double> out) const;

  /// Maps x onto the periodic representative in [-P/2, P/2).
  double wrap(double x) const;

  bool same_as(const PeriodicGrid& other) const;

 private:
  int n_;
  double period_;
  double h_;
  std::vector<double> nodes_;
  std::vector<double> wavenumbers_;
  std::vector<double> half_;
  std::unique_ptr<FftPlans> plans_;
};

using GridPtr = std::shared_ptr<const PeriodicGrid>;

/// Validates n (power of two, >= 8) and period (> 0).
GridPtr make_grid(int n, double period);

/// Real samples of a function on a PeriodicGrid.
class Field {
 public:
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::vector<double> samples);

  template <typename F>
  static Field from_function(GridPtr grid, F&& f) {
    Field out(grid);
    for (int k = 0; k < grid->size(); ++k) out.values_[k] = f(grid->node(k));
    return out;
  }

  const PeriodicGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int size() const { return static_cast<int>(values_.size()); }

  std::span<double> samples() { return values_; }
  std::span<const double> samples() const { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& operator[](int k) { return values_[static_cast<std::size_t>(k)]; }
  double operator[](int k) const { return values_[static_cast<std::size_t>(k)]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator*(Field a, double s);

/// Throws std::invalid_argument unless both fields live on the same grid.
void require_same_grid(const Field& a, const Field& b);

std::vector<Complex> to_spectrum(const Field& f);
Field from_spectrum(const GridPtr& grid, std::span<const Complex> spectrum);

/// Multiplies the half spectrum of f by symbol(xi) and transforms back. The
/// symbol must correspond to a real operator (even real part, odd imaginary
/// part); the imaginary part is dropped on the Nyquist mode.
Field apply_symbol(const Field& f, const std::function<Complex(double)>& symbol);

/// Solves (a - d^2) g = f.
Field helmholtz_inverse(const Field& f, double a);
/// Applies (4 - d^2)^{-1/2}.
Field sqrt_helmholtz_inverse4(const Field& f);
/// Spectral derivative of order 1, 2 or 3 (Nyquist zeroed for odd orders).
Field derivative(const Field& f, int order);
/// Applies (1 - d^2)(4 - d^2)^{-1}, the operator behind the S inner product.
Field s_operator(const Field& f);
/// Translates f by `shift` (f(x - shift)) using the Fourier shift theorem.
Field translate(const Field& f, double shift);
/// Zeroes every mode with |k| > n/3.
Field dealias(const Field& f);

double integrate(const Field& f);
double l2_inner(const Field& u, const Field& v);
double l2_norm(const Field& u);
double max_abs(const Field& u);
/// (u, v)_S = integral of u * (1 - d^2)(4 - d^2)^{-1} v.
double s_inner(const Field& u, const Field& v);

/// Evaluates the trigonometric interpolant of f (and its first two
/// derivatives) at an arbitrary point.
struct InterpolantValue {
  double value;
  double d1;
  double d2;
};
InterpolantValue evaluate_interpolant(std::span<const Complex> spectrum,
                                      const PeriodicGrid& grid, double x);

}  // namespace dplab
