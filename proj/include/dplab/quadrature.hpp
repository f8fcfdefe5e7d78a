#pragma once

#include <functional>

namespace dplab {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// One 15-point Kronrod rule on [a, b] with the embedded 7-point Gauss rule
/// as error estimate.
QuadratureResult gauss_kronrod15(const std::function<double(double)>& f, double a, double b);

/// Globally adaptive Gauss-Kronrod (7/15) quadrature. Bisects the interval
/// with the largest error estimate until the summed estimate drops below
/// max(abs_tol, rel_tol * |I|) or max_intervals is reached.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol, int max_intervals = 200);

}  // namespace dplab
