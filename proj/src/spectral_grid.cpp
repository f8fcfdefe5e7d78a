#include "dplab/spectral_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dplab/kernels.hpp"

namespace dplab {

namespace {

// FFTW planning is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

class FftPlans {
 public:
  explicit FftPlans(int n) : n_(n) {
    std::vector<double> real(static_cast<std::size_t>(n));
    std::vector<Complex> spec(static_cast<std::size_t>(n / 2 + 1));
    auto* r = real.data();
    auto* c = reinterpret_cast<fftw_complex*>(spec.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    r2c_ = fftw_plan_dft_r2c_1d(n, r, c, flags);
    c2r_ = fftw_plan_dft_c2r_1d(n, c, r, flags);
    if (r2c_ == nullptr || c2r_ == nullptr)
      throw std::runtime_error("FFTW plan creation failed for n=" + std::to_string(n));
  }
  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c_);
    fftw_destroy_plan(c2r_);
  }

  void forward(std::span<const double> in, std::span<Complex> out) const {
    // r2c leaves its input untouched but the API takes a non-const pointer.
    thread_local std::vector<double> buf;
    buf.assign(in.begin(), in.end());
    fftw_execute_dft_r2c(r2c_, buf.data(), reinterpret_cast<fftw_complex*>(out.data()));
  }

  void inverse(std::span<const Complex> in, std::span<double> out) const {
    // c2r destroys its input.
    thread_local std::vector<Complex> buf;
    buf.assign(in.begin(), in.end());
    fftw_execute_dft_c2r(c2r_, reinterpret_cast<fftw_complex*>(buf.data()), out.data());
    const double scale = 1.0 / n_;
    for (auto& v : out) v *= scale;
  }

 private:
  int n_;
  fftw_plan r2c_ = nullptr;
  fftw_plan c2r_ = nullptr;
};

PeriodicGrid::PeriodicGrid(int n, double period) : n_(n), period_(period), h_(period / n) {
  if (!is_power_of_two(n) || n < 8)
    throw std::invalid_argument("grid size must be a power of two >= 8, got " + std::to_string(n));
  if (!(period > 0.0) || !std::isfinite(period))
    throw std::invalid_argument("grid period must be positive and finite");
  nodes_.resize(static_cast<std::size_t>(n));
  wavenumbers_.resize(static_cast<std::size_t>(n));
  half_.resize(static_cast<std::size_t>(n / 2 + 1));
  const double dk = 2.0 * std::numbers::pi / period;
  for (int k = 0; k < n; ++k) {
    nodes_[k] = -0.5 * period + k * h_;
    const int signed_k = (k <= n / 2) ? k : k - n;
    wavenumbers_[k] = dk * signed_k;
  }
  for (int k = 0; k <= n / 2; ++k) half_[k] = dk * k;
  plans_ = std::make_unique<FftPlans>(n);
}

PeriodicGrid::~PeriodicGrid() = default;

void PeriodicGrid::forward(std::span<const double> in, std::span<Complex> out) const {
  if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != spectrum_size())
    throw std::invalid_argument("forward transform size mismatch");
  plans_->forward(in, out);
}

void PeriodicGrid::inverse(std::span<const Complex> in, std::span<double> out) const {
  if (static_cast<int>(out.size()) != n_ || static_cast<int>(in.size()) != spectrum_size())
    throw std::invalid_argument("inverse transform size mismatch");
  plans_->inverse(in, out);
}

double PeriodicGrid::wrap(double x) const {
  double y = std::fmod(x + 0.5 * period_, period_);
  if (y < 0.0) y += period_;
  return y - 0.5 * period_;
}

bool PeriodicGrid::same_as(const PeriodicGrid& other) const {
  return this == &other || (n_ == other.n_ && period_ == other.period_);
}

GridPtr make_grid(int n, double period) { return std::make_shared<const PeriodicGrid>(n, period); }

// ---------------------------------------------------------------------------

Field::Field(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("Field requires a grid");
  values_.assign(static_cast<std::size_t>(grid_->size()), 0.0);
}

Field::Field(GridPtr grid, std::vector<double> samples)
    : grid_(std::move(grid)), values_(std::move(samples)) {
  if (!grid_) throw std::invalid_argument("Field requires a grid");
  if (static_cast<int>(values_.size()) != grid_->size())
    throw std::invalid_argument("sample count does not match grid size");
}

void require_same_grid(const Field& a, const Field& b) {
  if (!a.grid().same_as(b.grid())) throw std::invalid_argument("fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  kernels::parallel::axpy(1.0, other.values_, values_);
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  kernels::parallel::axpy(-1.0, other.values_, values_);
  return *this;
}

Field& Field::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }

// ---------------------------------------------------------------------------

std::vector<Complex> to_spectrum(const Field& f) {
  std::vector<Complex> spec(static_cast<std::size_t>(f.grid().spectrum_size()));
  f.grid().forward(f.samples(), spec);
  return spec;
}

Field from_spectrum(const GridPtr& grid, std::span<const Complex> spectrum) {
  Field out(grid);
  grid->inverse(spectrum, out.samples());
  return out;
}

Field apply_symbol(const Field& f, const std::function<Complex(double)>& symbol) {
  auto spec = to_spectrum(f);
  const auto xi = f.grid().half_wavenumbers();
  const std::size_t nyq = spec.size() - 1;
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= symbol(xi[k]);
  spec[0] = Complex(spec[0].real(), 0.0);
  spec[nyq] = Complex(spec[nyq].real(), 0.0);
  return from_spectrum(f.grid_ptr(), spec);
}

Field helmholtz_inverse(const Field& f, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("helmholtz_inverse requires a > 0");
  return apply_symbol(f, [a](double xi) { return Complex(1.0 / (a + xi * xi), 0.0); });
}

Field sqrt_helmholtz_inverse4(const Field& f) {
  return apply_symbol(f, [](double xi) { return Complex(1.0 / std::sqrt(4.0 + xi * xi), 0.0); });
}

Field derivative(const Field& f, int order) {
  if (order < 1 || order > 3) throw std::invalid_argument("derivative order must be 1, 2 or 3");
  auto spec = to_spectrum(f);
  const auto xi = f.grid().half_wavenumbers();
  const std::size_t nyq = spec.size() - 1;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    Complex factor = 1.0;
    for (int p = 0; p < order; ++p) factor *= Complex(0.0, xi[k]);
    spec[k] *= factor;
  }
  if (order % 2 == 1)
    spec[nyq] = 0.0;
  else
    spec[nyq] = Complex(spec[nyq].real(), 0.0);
  return from_spectrum(f.grid_ptr(), spec);
}

Field s_operator(const Field& f) {
  return apply_symbol(f, [](double xi) {
    const double x2 = xi * xi;
    return Complex((1.0 + x2) / (4.0 + x2), 0.0);
  });
}

Field translate(const Field& f, double shift) {
  auto spec = to_spectrum(f);
  const auto xi = f.grid().half_wavenumbers();
  const std::size_t nyq = spec.size() - 1;
  for (std::size_t k = 0; k < nyq; ++k) spec[k] *= std::polar(1.0, -xi[k] * shift);
  // The Nyquist mode is a cosine on the grid; only its real projection survives.
  spec[nyq] = Complex(spec[nyq].real() * std::cos(xi[nyq] * shift), 0.0);
  return from_spectrum(f.grid_ptr(), spec);
}

Field dealias(const Field& f) {
  auto spec = to_spectrum(f);
  const int cutoff = f.grid().size() / 3;
  for (int k = cutoff + 1; k < static_cast<int>(spec.size()); ++k) spec[static_cast<std::size_t>(k)] = 0.0;
  return from_spectrum(f.grid_ptr(), spec);
}

double integrate(const Field& f) { return f.grid().spacing() * kernels::parallel::sum(f.samples()); }

double l2_inner(const Field& u, const Field& v) {
  require_same_grid(u, v);
  return u.grid().spacing() * kernels::parallel::dot(u.samples(), v.samples());
}

double l2_norm(const Field& u) { return std::sqrt(l2_inner(u, u)); }

double max_abs(const Field& u) {
  double m = 0.0;
  for (double v : u.samples()) m = std::max(m, std::abs(v));
  return m;
}

double s_inner(const Field& u, const Field& v) {
  require_same_grid(u, v);
  // Evaluated in Fourier space so the form is symmetric to round-off.
  const auto su = to_spectrum(u);
  const auto sv = to_spectrum(v);
  const auto xi = u.grid().half_wavenumbers();
  const int n = u.grid().size();
  double acc = 0.0;
  for (std::size_t k = 0; k < su.size(); ++k) {
    const double x2 = xi[k] * xi[k];
    const double w = (k == 0 || static_cast<int>(k) == n / 2) ? 1.0 : 2.0;
    acc += w * (1.0 + x2) / (4.0 + x2) * (su[k] * std::conj(sv[k])).real();
  }
  return acc * u.grid().spacing() / n;
}

InterpolantValue evaluate_interpolant(std::span<const Complex> spectrum, const PeriodicGrid& grid,
                                      double x) {
  const int n = grid.size();
  const auto xi = grid.half_wavenumbers();
  const double dx = x - grid.node(0);
  InterpolantValue r{0.0, 0.0, 0.0};
  for (int k = 0; k <= n / 2; ++k) {
    const double w = (k == 0 || k == n / 2) ? 1.0 : 2.0;
    const Complex e = std::polar(1.0, xi[k] * dx);
    const Complex term = spectrum[static_cast<std::size_t>(k)] * e;
    if (k == n / 2) {
      // Real cosine interpolant of the Nyquist mode.
      const double a = spectrum[static_cast<std::size_t>(k)].real();
      r.value += a * std::cos(xi[k] * dx);
      r.d1 += -a * xi[k] * std::sin(xi[k] * dx);
      r.d2 += -a * xi[k] * xi[k] * std::cos(xi[k] * dx);
      continue;
    }
    r.value += w * term.real();
    r.d1 += w * (Complex(0.0, xi[k]) * term).real();
    r.d2 += -w * xi[k] * xi[k] * term.real();
  }
  r.value /= n;
  r.d1 /= n;
  r.d2 /= n;
  return r;
}

}  // namespace dplab
