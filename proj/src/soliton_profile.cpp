#include "dplab/soliton_profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dplab/kernels.hpp"
#include "dplab/quadrature.hpp"

namespace dplab {

void SolitonParams::validate() const {
  if (!(std::isfinite(c) && std::isfinite(kappa)) || !(kappa > 0.0) || !(c > 2.0 * kappa)) {
    std::ostringstream os;
    os << "soliton parameters require c > 2*kappa > 0 (c=" << c << ", kappa=" << kappa << ")";
    throw std::invalid_argument(os.str());
  }
}

double amplitude_polynomial(double phi, const SolitonParams& p) {
  return 0.5 * phi * phi - (p.c - 2.0 * p.kappa / 3.0) * phi + 0.5 * p.c * p.c - p.kappa * p.c;
}

double peak_amplitude(const SolitonParams& p) {
  p.validate();
  const double k = 2.0 * p.kappa / 3.0;
  const double disc = std::sqrt(k * (p.c + k));
  // (c - k) - disc loses digits as kappa -> 0; use the product of the roots.
  const double big = (p.c - k) + disc;
  const double product = p.c * p.c - 2.0 * p.kappa * p.c;
  return product / big;
}

double upper_root(const SolitonParams& p) {
  p.validate();
  const double k = 2.0 * p.kappa / 3.0;
  return (p.c - k) + std::sqrt(k * (p.c + k));
}

double decay_rate(const SolitonParams& p) {
  p.validate();
  return std::sqrt(1.0 - 2.0 * p.kappa / p.c);
}

double speed_from_amplitude(double amplitude, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("speed_from_amplitude requires kappa > 0");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude))
    throw std::invalid_argument("speed_from_amplitude: amplitude must be positive and finite");
  // With q = c + k, k = 2 kappa/3, the amplitude is q - 2k - sqrt(k q), a
  // quadratic in sqrt(q).
  const double k = 2.0 * kappa / 3.0;
  const double r = 0.5 * (std::sqrt(k) + std::sqrt(9.0 * k + 4.0 * amplitude));
  double c = r * r - k;
  // One Newton polish on the forward map.
  for (int it = 0; it < 2; ++it) {
    const double a = peak_amplitude({c, kappa});
    const double dadc = 1.0 - 0.5 * std::sqrt(k / (c + k));
    c -= (a - amplitude) / dadc;
  }
  return c;
}

ProfileSlope profile_slope(double phi, const SolitonParams& p) {
  const double phim = peak_amplitude(p);
  const double big = upper_root(p) - phim;
  const double gap = std::max(phim - phi, 0.0);
  const double two_f = gap * (big + gap);
  const double f = 0.5 * two_f;
  const double fp = phi - (p.c - 2.0 * p.kappa / 3.0);
  const double cm = p.c - phi;
  ProfileSlope s;
  s.dx = -phi * std::sqrt(two_f) / cm;
  s.dxx = (2.0 * phi * f + phi * phi * fp) / (cm * cm) + 2.0 * phi * phi * f / (cm * cm * cm);
  return s;
}

// ---------------------------------------------------------------------------

SolitonProfile::SolitonProfile(SolitonParams params, double spacing, std::vector<double> phi,
                               std::vector<double> dphi, std::vector<double> ddphi,
                               double fitted_decay)
    : params_(params),
      h_(spacing),
      phi_(std::move(phi)),
      dphi_(std::move(dphi)),
      ddphi_(std::move(ddphi)),
      nu_(dplab::decay_rate(params)),
      fitted_nu_(fitted_decay) {
  if (phi_.size() < 4 || dphi_.size() != phi_.size() || ddphi_.size() != phi_.size())
    throw std::invalid_argument("profile table too short or inconsistent");
  if (!(h_ > 0.0)) throw std::invalid_argument("profile spacing must be positive");
  tail_coeff_ = phi_.back() * std::exp(nu_ * tail_start());
}

namespace {

struct HermiteBasis {
  double v[6];
  double d[6];
};

HermiteBasis quintic_basis(double t) {
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  HermiteBasis b;
  b.v[0] = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
  b.v[1] = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
  b.v[2] = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
  b.v[3] = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  b.v[4] = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
  b.v[5] = 0.5 * t3 - t4 + 0.5 * t5;
  b.d[0] = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
  b.d[1] = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
  b.d[2] = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
  b.d[3] = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
  b.d[4] = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
  b.d[5] = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
  return b;
}

}  // namespace

double SolitonProfile::evaluate(double x) const {
  const double ax = std::abs(x);
  if (ax >= tail_start()) return tail_coeff_ * std::exp(-nu_ * ax);
  const auto i = std::min(static_cast<std::size_t>(ax / h_), phi_.size() - 2);
  const double t = (ax - h_ * static_cast<double>(i)) / h_;
  const auto b = quintic_basis(t);
  return phi_[i] * b.v[0] + h_ * dphi_[i] * b.v[1] + h_ * h_ * ddphi_[i] * b.v[2] +
         phi_[i + 1] * b.v[3] + h_ * dphi_[i + 1] * b.v[4] + h_ * h_ * ddphi_[i + 1] * b.v[5];
}

double SolitonProfile::evaluate_dx(double x) const {
  const double ax = std::abs(x);
  const double sign = x < 0.0 ? -1.0 : 1.0;
  if (ax >= tail_start()) return -sign * nu_ * tail_coeff_ * std::exp(-nu_ * ax);
  const auto i = std::min(static_cast<std::size_t>(ax / h_), phi_.size() - 2);
  const double t = (ax - h_ * static_cast<double>(i)) / h_;
  const auto b = quintic_basis(t);
  const double d = phi_[i] * b.d[0] + h_ * dphi_[i] * b.d[1] + h_ * h_ * ddphi_[i] * b.d[2] +
                   phi_[i + 1] * b.d[3] + h_ * dphi_[i + 1] * b.d[4] +
                   h_ * h_ * ddphi_[i + 1] * b.d[5];
  return sign * d / h_;
}

// ---------------------------------------------------------------------------

namespace {

// The march switches from the peak variable tau to v = -log(phi) below this
// fraction of the amplitude.
constexpr double kSwitchFraction = 0.5;

class ProfileBuilder {
 public:
  ProfileBuilder(const SolitonParams& p, const ProfileOptions& o)
      : p_(p), opt_(o), phim_(peak_amplitude(p)), gap_(upper_root(p) - phim_) {}

  SolitonProfile build() {
    std::vector<double> phi{phim_};
    std::vector<double> dphi{0.0};
    std::vector<double> ddphi{profile_slope(phim_, p_).dxx};

    bool peak_phase = true;
    double v = 0.0;  // tau in the peak phase, -log(phi) afterwards
    const double stop = opt_.tol * phim_;
    const std::size_t max_nodes = 50'000'000;
    while (phi.back() >= stop) {
      if (phi.size() > max_nodes) throw std::runtime_error("profile table exceeded size limit");
      if (peak_phase && phi.back() < kSwitchFraction * phim_) {
        peak_phase = false;
        v = -std::log(phi.back());
      }
      v = advance(peak_phase, v);
      double value;
      double dx;
      if (peak_phase) {
        value = phim_ - v * v;
        dx = -value * v * std::sqrt(gap_ + v * v) / (p_.c - value);
      } else {
        value = std::exp(-v);
        dx = profile_slope(value, p_).dx;
      }
      phi.push_back(value);
      dphi.push_back(dx);
      ddphi.push_back(profile_slope(value, p_).dxx);
    }

    const double fitted = fit_last_decade(phi);
    SolitonProfile profile(p_, opt_.spacing, std::move(phi), std::move(dphi), std::move(ddphi),
                           fitted);
    check(profile);
    return profile;
  }

 private:
  // dx/dtau with phi = phim - tau^2.
  double peak_integrand(double tau) const {
    const double s = phim_ - tau * tau;
    return 2.0 * (p_.c - s) / (s * std::sqrt(gap_ + tau * tau));
  }
  // dx/dv with phi = exp(-v).
  double tail_integrand(double v) const {
    const double s = std::exp(-v);
    const double d = phim_ - s;
    return (p_.c - s) / std::sqrt(d * (gap_ + d));
  }

  double integrand(bool peak, double v) const { return peak ? peak_integrand(v) : tail_integrand(v); }

  // Finds v1 > v0 with integral_{v0}^{v1} dx/dv = spacing.
  double advance(bool peak, double v0) const {
    const double h = opt_.spacing;
    auto f = [&](double s) { return integrand(peak, s); };
    double v = v0 + h / f(v0);
    if (peak) v = std::min(v, 0.999 * std::sqrt(phim_));
    double defect = 0.0;
    for (int it = 0; it < 12; ++it) {
      const auto q = integrate_adaptive(f, v0, v, 1e-18, 1e-14, 64);
      if (!q.converged) throw std::runtime_error("profile quadrature did not converge");
      defect = q.value - h;
      const double step = defect / f(v);
      v -= step;
      if (peak) v = std::clamp(v, v0, 0.999 * std::sqrt(phim_));
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(v))) return v;
    }
    if (std::abs(defect) > 1e-12 * h) throw std::runtime_error("profile table inversion did not converge");
    return v;
  }

  double fit_last_decade(const std::vector<double>& phi) const {
    // Least squares slope of log(phi) against x over nodes with phi < 10*stop.
    const double stop = opt_.tol * phim_;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
      if (phi[i] >= 10.0 * stop) continue;
      const double x = opt_.spacing * static_cast<double>(i);
      const double y = std::log(phi[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m < 2) return decay_rate(p_);
    const double denom = m * sxx - sx * sx;
    return -(m * sxy - sx * sy) / denom;
  }

  void check(const SolitonProfile& prof) const {
    const auto phi = prof.table_phi();
    const auto dphi = prof.table_dphi();
    const double scale = p_.c * p_.c * p_.c * p_.c;
    for (std::size_t i = 1; i < phi.size(); ++i) {
      if (!(phi[i] < phi[i - 1]) || !(phi[i] > 0.0))
        throw std::runtime_error("profile table is not strictly decreasing and positive");
      const double cm = p_.c - phi[i];
      const double lhs = 0.5 * cm * cm * dphi[i] * dphi[i];
      const double rhs = phi[i] * phi[i] * amplitude_polynomial(phi[i], p_);
      if (std::abs(lhs - rhs) > opt_.tol * scale)
        throw std::runtime_error("profile first-integral residual above tolerance");
    }
    if (!(phi[0] < p_.c)) throw std::runtime_error("profile amplitude not below c");
  }

  SolitonParams p_;
  ProfileOptions opt_;
  double phim_;
  double gap_;
};

}  // namespace

SolitonProfile build_profile(const SolitonParams& params, const ProfileOptions& options) {
  params.validate();
  if (!(options.tol > 0.0) || options.tol > 1e-6)
    throw std::invalid_argument("build_profile: tol must lie in (0, 1e-6]");
  if (!(options.spacing > 0.0)) throw std::invalid_argument("build_profile: spacing must be positive");
  return ProfileBuilder(params, options).build();
}

SolitonProfile build_profile(const SolitonParams& params, double tol) {
  ProfileOptions o;
  o.tol = tol;
  return build_profile(params, o);
}

double tail_wrap_ratio(const SolitonProfile& profile, const PeriodicGrid& grid) {
  return profile.evaluate(0.5 * grid.period()) / profile.amplitude();
}

namespace {

void check_wrap(const SolitonProfile& profile, const PeriodicGrid& grid, double tol) {
  const double ratio = tail_wrap_ratio(profile, grid);
  if (ratio > tol) {
    std::ostringstream os;
    os << "grid period " << grid.period() << " too short for c=" << profile.params().c
       << ": wrapped tail ratio " << ratio << " exceeds " << tol;
    throw std::domain_error(os.str());
  }
}

}  // namespace

Field sample_on_grid(const SolitonProfile& profile, const GridPtr& grid, double center,
                     double wrap_tolerance) {
  check_wrap(profile, *grid, wrap_tolerance);
  Field out(grid);
  const PeriodicGrid& g = *grid;
  kernels::parallel::tabulate(g.nodes(), out.samples(),
                              [&](double x) { return profile.evaluate(g.wrap(x - center)); });
  return out;
}

Field sample_dx_on_grid(const SolitonProfile& profile, const GridPtr& grid, double center,
                        double wrap_tolerance) {
  check_wrap(profile, *grid, wrap_tolerance);
  Field out(grid);
  const PeriodicGrid& g = *grid;
  kernels::parallel::tabulate(g.nodes(), out.samples(),
                              [&](double x) { return profile.evaluate_dx(g.wrap(x - center)); });
  return out;
}

}  // namespace dplab
